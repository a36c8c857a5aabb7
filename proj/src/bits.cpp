#include "plmodem/bits.hpp"

#include "plmodem/error.hpp"

#include <cctype>

namespace plmodem {

BitStream bits_from_bytes(std::span<const std::uint8_t> bytes) {
    BitStream out;
    out.reserve(bytes.size() * 8);
    for (std::uint8_t b : bytes)
        for (int i = 7; i >= 0; --i)
            out.push_back(static_cast<Bit>((b >> i) & 1u));
    return out;
}

std::vector<std::uint8_t> bytes_from_bits(const BitStream& bits) {
    check_binary(bits);
    std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i])
            out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    return out;
}

static int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    fail("InvalidHex", std::string("not a hex digit: '") + c + "'");
}

BitStream bits_from_hex(const std::string& hex) {
    BitStream out;
    out.reserve(hex.size() * 4);
    for (char c : hex) {
        if (std::isspace(static_cast<unsigned char>(c)))
            continue;
        int v = hex_nibble(c);
        for (int i = 3; i >= 0; --i)
            out.push_back(static_cast<Bit>((v >> i) & 1));
    }
    return out;
}

std::string hex_from_bits(const BitStream& bits) {
    check_binary(bits);
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        int v = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            v <<= 1;
            if (i + j < bits.size() && bits[i + j])
                v |= 1;
        }
        out += digits[v];
    }
    return out;
}

BitStream bits_from_string(const std::string& s) {
    BitStream out;
    out.reserve(s.size());
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c)))
            continue;
        if (c != '0' && c != '1')
            fail("InvalidBit", std::string("expected '0' or '1', got '") + c + "'");
        out.push_back(static_cast<Bit>(c - '0'));
    }
    return out;
}

std::string to_string(const BitStream& bits) {
    check_binary(bits);
    std::string out;
    out.reserve(bits.size());
    for (Bit b : bits)
        out += static_cast<char>('0' + b);
    return out;
}

void check_binary(const BitStream& bits) {
    for (Bit b : bits)
        if (b != 0 && b != 1)
            fail("InvalidBit", "bit stream element is not 0 or 1");
}

} // namespace plmodem
