#include "qtoken/token_scheme.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qtoken/hex.hpp"

namespace qtoken {

namespace {

void check_k(int k) {
    if (k < 4 || k % 4 != 0 || k > 28) {
        throw std::invalid_argument("security parameter k=" + std::to_string(k) +
                                    " must be a positive multiple of 4 (at most 28)");
    }
}

std::uint32_t block_mask(int k) { return k >= 32 ? ~0u : ((1u << k) - 1); }

}  // namespace

SchemeParams SchemeParams::for_k(int k) {
    check_k(k);
    SchemeParams p;
    p.k = k;
    p.n = 2 * k;
    p.m = static_cast<std::uint64_t>(k) << k;
    p.cap_mint = (std::uint64_t{1} << (k / 4)) - 1;
    p.cap_test = std::uint64_t{1} << (k / 2);
    p.t = 2 * k;
    p.eps_l = std::ldexp(1.0, -k / 2);
    p.eps_f = 6.0 * std::ldexp(1.0, -k / 4);
    return p;
}

ClassicalParams ClassicalParams::for_k(int k) {
    check_k(k);
    ClassicalParams p;
    p.k = k;
    p.n = k;
    p.cap_mint = std::uint64_t{1} << (k / 4);
    p.m = static_cast<std::uint64_t>(k) * p.cap_mint;
    p.cap_test = std::uint64_t{1} << (k / 2);
    p.t = k;
    p.eps_l = std::ldexp(1.0, -k / 2);
    p.eps_f = std::ldexp(1.0, -k / 4);
    return p;
}

// ---------------------------------------------------------------------------
// SecretString

SecretString::SecretString(int k, std::vector<std::uint32_t> blocks, std::string series_id)
    : k_(k), blocks_(std::move(blocks)), series_id_(std::move(series_id)) {
    if (k_ < 1 || k_ > 31) throw std::invalid_argument("block width must be in [1, 31]");
    if (blocks_.empty()) throw std::invalid_argument("secret string has no blocks");
    const std::uint32_t mask = block_mask(k_);
    std::uint32_t all = 0;
    for (auto b : blocks_) all |= b;
    if (all & ~mask) throw std::invalid_argument("secret block wider than k bits");
}

SecretString SecretString::random(int k, std::uint64_t num_blocks, Rng& rng,
                                  std::string series_id) {
    if (k < 1 || k > 31) throw std::invalid_argument("block width must be in [1, 31]");
    std::vector<std::uint32_t> blocks(num_blocks);
    const std::uint32_t mask = block_mask(k);
    // Each 64-bit draw supplies floor(64 / k) independent blocks.
    const std::uint64_t per_draw = static_cast<std::uint64_t>(64 / k);
    std::uint64_t i = 0;
    while (i < num_blocks) {
        std::uint64_t word = rng();
        const std::uint64_t end = std::min(num_blocks, i + per_draw);
        for (; i < end; ++i, word >>= k) blocks[i] = static_cast<std::uint32_t>(word) & mask;
    }
    return SecretString(k, std::move(blocks), std::move(series_id));
}

SecretString SecretString::random_indexed(int k, Rng& rng, std::string series_id) {
    if (k < 1 || k > kMaxIndexedK) {
        throw std::invalid_argument("indexed secret needs k in [1, " +
                                    std::to_string(kMaxIndexedK) + "]");
    }
    return random(k, std::uint64_t{1} << k, rng, std::move(series_id));
}

SecretString SecretString::from_bits(int k, const std::vector<bool>& bits, std::string series_id) {
    if (k < 1 || bits.empty() || bits.size() % static_cast<std::size_t>(k) != 0) {
        throw std::invalid_argument("secret length " + std::to_string(bits.size()) +
                                    " is not a positive multiple of k=" + std::to_string(k));
    }
    std::vector<std::uint32_t> blocks(bits.size() / k);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        blocks[i / k] = (blocks[i / k] << 1) | (bits[i] ? 1u : 0u);
    }
    return SecretString(k, std::move(blocks), std::move(series_id));
}

SecretString SecretString::from_hex(int k, std::uint64_t num_blocks, std::string_view hex,
                                    std::string series_id) {
    return from_bits(k, hex_to_bits(hex, num_blocks * static_cast<std::uint64_t>(k)),
                     std::move(series_id));
}

std::uint32_t SecretString::block(std::uint64_t index) const {
    if (index < 1 || index > blocks_.size()) {
        throw std::out_of_range("block index " + std::to_string(index) + " outside [1, " +
                                std::to_string(blocks_.size()) + "]");
    }
    return blocks_[index - 1];
}

std::vector<bool> SecretString::bits() const {
    std::vector<bool> out;
    out.reserve(length_bits());
    for (auto b : blocks_) {
        for (int i = k_ - 1; i >= 0; --i) out.push_back((b >> i) & 1u);
    }
    return out;
}

std::string SecretString::to_hex() const { return bits_to_hex(bits()); }

// ---------------------------------------------------------------------------
// TokenReport / VerificationHistory

std::uint64_t TokenReport::to_bits(int k) const {
    return (static_cast<std::uint64_t>(index - 1) << k) | value;
}

TokenReport TokenReport::from_bits(int k, std::uint64_t bits) {
    const std::uint64_t mask = (std::uint64_t{1} << k) - 1;
    return {static_cast<std::uint32_t>((bits >> k) & mask) + 1,
            static_cast<std::uint32_t>(bits & mask)};
}

std::string TokenReport::to_hex(int k) const { return uint_to_hex(to_bits(k), 2 * k); }

TokenReport TokenReport::from_hex(int k, std::string_view hex) {
    return from_bits(k, hex_to_uint(hex, 2 * k));
}

void VerificationHistory::append(const TokenReport& r) {
    entries_.push_back(r);
    keys_.insert(key(r));
}

// ---------------------------------------------------------------------------
// Scheme operations

SparseState token_state(const SecretString& secret) {
    if (!secret.indexed()) {
        throw std::invalid_argument("token minting needs one secret block per index (k * 2^k bits)");
    }
    const int k = secret.k();
    const double amp = 1.0 / std::sqrt(std::ldexp(1.0, k));
    std::vector<SparseState::Entry> entries;
    entries.reserve(secret.num_blocks());
    for (std::uint64_t i = 0; i < secret.num_blocks(); ++i) {
        entries.push_back({(i << k) | secret.blocks()[i], Amplitude{amp, 0.0}});
    }
    return SparseState::from_entries(2 * k, std::move(entries));
}

MintedTokens mint(const SecretString& secret, std::size_t count) {
    if (count == 0) throw std::invalid_argument("mint count must be at least 1");
    MintedTokens out;
    out.tokens.assign(count, token_state(secret));
    const int k = secret.k();
    out.exceeds_cap = (k % 4 != 0) || count > SchemeParams::for_k(k).cap_mint;
    return out;
}

std::vector<std::uint32_t> mint_classical(const SecretString& secret) {
    const auto params = ClassicalParams::for_k(secret.k());
    if (secret.num_blocks() != params.cap_mint) {
        throw std::invalid_argument("classical secret must hold exactly 2^{k/4} blocks");
    }
    return {secret.blocks().begin(), secret.blocks().end()};
}

TokenReport report_from_basis_index(int k, std::uint64_t index) {
    return TokenReport::from_bits(k, index);
}

TokenReport report(const SparseState& token, Rng& rng) {
    if (token.num_qubits() % 2 != 0) {
        throw std::invalid_argument("token register must have an even number of qubits");
    }
    return report_from_basis_index(token.num_qubits() / 2, measure_all(token, rng));
}

TokenReport report_emulated(const SecretString& secret, Rng& rng) {
    if (!secret.indexed()) throw std::invalid_argument("emulated report needs an indexed secret");
    const auto i = static_cast<std::uint32_t>(uniform_below(rng, secret.num_blocks())) + 1;
    return {i, secret.block(i)};
}

bool test(const SecretString& secret, const VerificationHistory& history, const TokenReport& r) {
    if (r.index < 1 || r.index > secret.num_blocks()) return false;
    if (secret.block(r.index) != r.value) return false;
    return !history.contains(r);
}

bool test_classical(const SecretString& secret, std::span<const std::uint32_t> history,
                    std::uint32_t r) {
    const auto blocks = secret.blocks();
    if (std::find(blocks.begin(), blocks.end(), r) == blocks.end()) return false;
    return std::find(history.begin(), history.end(), r) == history.end();
}

std::vector<bool> btest(const SecretString& secret, std::span<const TokenReport> reports) {
    const auto params = SchemeParams::for_k(secret.k());
    if (reports.size() > params.cap_test) {
        throw std::length_error("btest given " + std::to_string(reports.size()) +
                                " reports, budget is " + std::to_string(params.cap_test));
    }
    VerificationHistory history;
    std::vector<bool> accepted;
    accepted.reserve(reports.size());
    for (const auto& r : reports) {
        accepted.push_back(test(secret, history, r));
        history.append(r);
    }
    return accepted;
}

std::size_t hamming_weight(const std::vector<bool>& bits) {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true));
}

}  // namespace qtoken
