#include "plmodem/framing.hpp"

#include "plmodem/error.hpp"

namespace plmodem::framing {

namespace {
constexpr std::uint8_t kCrcPoly = 0x07;
}

std::uint8_t crc8(const BitStream& payload) {
    if (payload.size() != kPayloadBits)
        fail("InvalidPayloadLength",
             "crc8 expects a 32-bit payload, got " + std::to_string(payload.size()));
    check_binary(payload);
    std::uint8_t rem = 0x00;
    for (Bit b : payload) {
        bool top = (rem & 0x80u) != 0;
        rem = static_cast<std::uint8_t>((rem << 1) | b);
        if (top)
            rem ^= kCrcPoly;
    }
    // flush the 8 appended zero bits of the dividend
    for (int i = 0; i < kCrcBits; ++i) {
        bool top = (rem & 0x80u) != 0;
        rem = static_cast<std::uint8_t>(rem << 1);
        if (top)
            rem ^= kCrcPoly;
    }
    return rem;
}

BitStream Frame::serialize() const {
    BitStream out;
    out.reserve(kFrameBits);
    out.insert(out.end(), preamble.begin(), preamble.end());
    out.insert(out.end(), payload.begin(), payload.end());
    out.insert(out.end(), crc.begin(), crc.end());
    return out;
}

std::string Frame::to_hex() const {
    return hex_from_bits(serialize());
}

static BitStream crc_bits(std::uint8_t crc) {
    BitStream out(kCrcBits);
    for (int i = 0; i < kCrcBits; ++i)
        out[i] = static_cast<Bit>((crc >> (7 - i)) & 1u);
    return out;
}

Frame encode_frame(const BitStream& payload) {
    if (payload.size() != kPayloadBits)
        fail("InvalidPayloadLength",
             "payload must be 32 bits, got " + std::to_string(payload.size()));
    check_binary(payload);
    Frame f;
    f.preamble.assign(kPreamble.begin(), kPreamble.end());
    f.payload = payload;
    f.crc = crc_bits(crc8(payload));
    return f;
}

DecodeStatus try_decode_frame(const BitStream& bits, std::size_t offset,
                              BitStream& payload_out) {
    if (offset + kFrameBits > bits.size())
        return DecodeStatus::invalid_length;
    for (int i = 0; i < kPreambleBits; ++i)
        if (bits[offset + i] != kPreamble[i])
            return DecodeStatus::bad_preamble;
    BitStream payload(bits.begin() + offset + kPreambleBits,
                      bits.begin() + offset + kPreambleBits + kPayloadBits);
    std::uint8_t expect = crc8(payload);
    std::uint8_t got = 0;
    for (int i = 0; i < kCrcBits; ++i)
        got = static_cast<std::uint8_t>((got << 1) |
                                        bits[offset + kPreambleBits + kPayloadBits + i]);
    if (expect != got)
        return DecodeStatus::crc_mismatch;
    payload_out = std::move(payload);
    return DecodeStatus::ok;
}

BitStream decode_frame(const BitStream& bits) {
    if (bits.size() != kFrameBits)
        fail("InvalidLength",
             "frame must be 44 bits, got " + std::to_string(bits.size()));
    check_binary(bits);
    BitStream payload;
    switch (try_decode_frame(bits, 0, payload)) {
    case DecodeStatus::ok:
        return payload;
    case DecodeStatus::bad_preamble:
        fail("BadPreamble", "preamble is not 1010");
    case DecodeStatus::crc_mismatch:
        fail("CrcMismatch", "received CRC does not match recomputed CRC");
    default:
        fail("InvalidLength", "frame must be 44 bits");
    }
}

std::vector<Frame> packetize(std::span<const std::uint8_t> data) {
    std::vector<Frame> frames;
    frames.reserve((data.size() + 3) / 4);
    for (std::size_t off = 0; off < data.size(); off += 4) {
        std::array<std::uint8_t, 4> chunk = {0, 0, 0, 0};
        for (std::size_t i = 0; i < 4 && off + i < data.size(); ++i)
            chunk[i] = data[off + i];
        frames.push_back(encode_frame(bits_from_bytes(chunk)));
    }
    return frames;
}

} // namespace plmodem::framing
