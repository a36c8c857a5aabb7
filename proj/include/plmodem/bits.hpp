#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace plmodem {

using Bit = std::uint8_t;

// Ordered bit sequence; every element is 0 or 1. MSB-first everywhere.
using BitStream = std::vector<Bit>;

BitStream bits_from_bytes(std::span<const std::uint8_t> bytes);

// Last partial byte is zero-padded on the right.
std::vector<std::uint8_t> bytes_from_bits(const BitStream& bits);

BitStream bits_from_hex(const std::string& hex);
std::string hex_from_bits(const BitStream& bits);

BitStream bits_from_string(const std::string& s); // "0101..."
std::string to_string(const BitStream& bits);

void check_binary(const BitStream& bits); // throws InvalidBit

} // namespace plmodem
