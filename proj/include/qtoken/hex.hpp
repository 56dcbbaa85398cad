#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qtoken {

/// MSB-first bit strings packed into lowercase hex. The final nibble is
/// zero-padded when the bit count is not a multiple of four.
std::string bits_to_hex(const std::vector<bool>& bits);
std::vector<bool> hex_to_bits(std::string_view hex, std::size_t num_bits);

/// Fixed-width hex of the low `num_bits` bits of `value`.
std::string uint_to_hex(std::uint64_t value, int num_bits);
std::uint64_t hex_to_uint(std::string_view hex, int num_bits);

}  // namespace qtoken
