#pragma once

#include "plmodem/bits.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace plmodem::framing {

inline constexpr int kPreambleBits = 4;
inline constexpr int kPayloadBits = 32;
inline constexpr int kCrcBits = 8;
inline constexpr int kFrameBits = kPreambleBits + kPayloadBits + kCrcBits; // 44

// Fixed alternating preamble.
inline constexpr std::array<Bit, kPreambleBits> kPreamble = {1, 0, 1, 0};

// CRC-8, generator x^8+x^2+x+1 (0x07), init 0x00, MSB-first, no reflection,
// no final XOR.
std::uint8_t crc8(const BitStream& payload); // payload must be 32 bits

struct Frame {
    BitStream preamble; // always 1,0,1,0
    BitStream payload;  // 32 bits
    BitStream crc;      // 8 bits, = crc8(payload)

    BitStream serialize() const; // preamble ‖ payload ‖ crc, 44 bits
    std::string to_hex() const;  // 11 hex digits; last digit carries 1 pad bit
};

Frame encode_frame(const BitStream& payload);

// Throws InvalidLength / BadPreamble / CrcMismatch.
BitStream decode_frame(const BitStream& bits);

enum class DecodeStatus { ok, invalid_length, bad_preamble, crc_mismatch };

// Non-throwing variant used by the receiver's frame scanner.
DecodeStatus try_decode_frame(const BitStream& bits, std::size_t offset,
                              BitStream& payload_out);

// Split into 4-byte payload chunks, MSB-first, last chunk zero-padded.
std::vector<Frame> packetize(std::span<const std::uint8_t> data);

} // namespace plmodem::framing
