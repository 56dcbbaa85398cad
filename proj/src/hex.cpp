#include "qtoken/hex.hpp"

#include <stdexcept>

namespace qtoken {

namespace {

constexpr char kDigits[] = "0123456789abcdef";

int nibble_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument(std::string("invalid hex digit '") + c + "'");
}

std::size_t hex_len(std::size_t num_bits) { return (num_bits + 3) / 4; }

}  // namespace

std::string bits_to_hex(const std::vector<bool>& bits) {
    std::string out(hex_len(bits.size()), '0');
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (!bits[i]) continue;
        const int nib = nibble_value(out[i / 4]) | (8 >> (i % 4));
        out[i / 4] = kDigits[nib];
    }
    return out;
}

std::vector<bool> hex_to_bits(std::string_view hex, std::size_t num_bits) {
    if (hex.size() != hex_len(num_bits)) {
        throw std::invalid_argument("hex string has " + std::to_string(hex.size()) +
                                    " digits, expected " + std::to_string(hex_len(num_bits)));
    }
    std::vector<bool> bits(num_bits);
    for (std::size_t d = 0; d < hex.size(); ++d) {
        const int nib = nibble_value(hex[d]);
        for (int b = 0; b < 4; ++b) {
            const std::size_t pos = d * 4 + b;
            const bool set = (nib >> (3 - b)) & 1;
            if (pos < num_bits) {
                bits[pos] = set;
            } else if (set) {
                throw std::invalid_argument("nonzero padding bits in hex string");
            }
        }
    }
    return bits;
}

std::string uint_to_hex(std::uint64_t value, int num_bits) {
    std::vector<bool> bits(num_bits);
    for (int i = 0; i < num_bits; ++i) bits[i] = (value >> (num_bits - 1 - i)) & 1;
    return bits_to_hex(bits);
}

std::uint64_t hex_to_uint(std::string_view hex, int num_bits) {
    if (num_bits < 0 || num_bits > 64) throw std::invalid_argument("bit width out of range");
    const auto bits = hex_to_bits(hex, static_cast<std::size_t>(num_bits));
    std::uint64_t v = 0;
    for (bool b : bits) v = (v << 1) | (b ? 1u : 0u);
    return v;
}

}  // namespace qtoken
