#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "qtoken/rng.hpp"
#include "qtoken/sparse_state.hpp"

namespace qtoken {

/// Parameters of the quantum token scheme for security parameter k (4 | k).
struct SchemeParams {
    int k = 0;
    int n = 0;                   ///< qubits per token, 2k
    std::uint64_t m = 0;         ///< secret bits, k * 2^k
    std::uint64_t cap_mint = 0;  ///< tokens per series, 2^{k/4} - 1
    std::uint64_t cap_test = 0;  ///< verification attempts per series, 2^{k/2}
    int t = 0;                   ///< report bits, 2k
    double eps_l = 0.0;          ///< 2^{-k/2}
    double eps_f = 0.0;          ///< 6 * 2^{-k/4}

    static SchemeParams for_k(int k);
    std::uint64_t index_space() const { return std::uint64_t{1} << k; }
};

/// Parameters of the classical block scheme: 2^{k/4} tokens of k bits each.
struct ClassicalParams {
    int k = 0;
    int n = 0;
    std::uint64_t m = 0;
    std::uint64_t cap_mint = 0;
    std::uint64_t cap_test = 0;
    int t = 0;
    double eps_l = 0.0;
    double eps_f = 0.0;

    static ClassicalParams for_k(int k);
};

/// Largest k accepted for secrets with one block per index.
inline constexpr int kMaxIndexedK = 24;

/// The bank's secret, stored as consecutive k-bit blocks. Block I (1-based)
/// holds bits k(I-1)+1 .. kI, most significant bit first; for a secret with
/// 2^k blocks this is the function I -> F_S(I).
class SecretString {
public:
    SecretString(int k, std::vector<std::uint32_t> blocks, std::string series_id = {});

    /// Uniformly random secret of `num_blocks` blocks.
    static SecretString random(int k, std::uint64_t num_blocks, Rng& rng,
                               std::string series_id = {});
    /// Uniformly random secret with one block per index in [1, 2^k].
    static SecretString random_indexed(int k, Rng& rng, std::string series_id = {});

    static SecretString from_bits(int k, const std::vector<bool>& bits, std::string series_id = {});
    static SecretString from_hex(int k, std::uint64_t num_blocks, std::string_view hex,
                                 std::string series_id = {});

    int k() const { return k_; }
    std::uint64_t num_blocks() const { return blocks_.size(); }
    std::uint64_t length_bits() const { return blocks_.size() * static_cast<std::uint64_t>(k_); }
    const std::string& series_id() const { return series_id_; }
    std::span<const std::uint32_t> blocks() const { return blocks_; }

    /// True when there is one block per index in [1, 2^k].
    bool indexed() const { return k_ <= kMaxIndexedK && blocks_.size() == (std::uint64_t{1} << k_); }

    /// Block I, 1-based. Throws std::out_of_range.
    std::uint32_t block(std::uint64_t index) const;

    std::vector<bool> bits() const;
    std::string to_hex() const;

    friend bool operator==(const SecretString& a, const SecretString& b) {
        return a.k_ == b.k_ && a.blocks_ == b.blocks_;
    }

private:
    int k_;
    std::vector<std::uint32_t> blocks_;
    std::string series_id_;
};

/// The classical pair (I, R): I in [1, 2^k], R a k-bit value.
struct TokenReport {
    std::uint32_t index = 0;
    std::uint32_t value = 0;

    /// The 2k-bit wire form: (I-1) in the high k bits, R in the low k bits.
    std::uint64_t to_bits(int k) const;
    static TokenReport from_bits(int k, std::uint64_t bits);
    std::string to_hex(int k) const;
    static TokenReport from_hex(int k, std::string_view hex);

    friend bool operator==(const TokenReport&, const TokenReport&) = default;
};

/// Append-only record of submitted reports with O(1) membership.
class VerificationHistory {
public:
    void append(const TokenReport& r);
    bool contains(const TokenReport& r) const { return keys_.contains(key(r)); }
    std::size_t size() const { return entries_.size(); }
    std::span<const TokenReport> entries() const { return entries_; }

private:
    static std::uint64_t key(const TokenReport& r) {
        return (static_cast<std::uint64_t>(r.index) << 32) | r.value;
    }
    std::vector<TokenReport> entries_;
    std::unordered_set<std::uint64_t> keys_;
};

struct MintedTokens {
    std::vector<SparseState> tokens;
    /// Set when more tokens than cap_mint were requested (or k has no cap).
    bool exceeds_cap = false;
};

/// The honest 2k-qubit token: sum_i |i-1>|F_S(i)> / 2^{k/2}.
SparseState token_state(const SecretString& secret);

/// `count` identical honest tokens.
MintedTokens mint(const SecretString& secret, std::size_t count);

/// The classical scheme's tokens: the consecutive k-bit blocks of S.
std::vector<std::uint32_t> mint_classical(const SecretString& secret);

/// Measures a 2k-qubit token in the computational basis and parses (I, R).
TokenReport report(const SparseState& token, Rng& rng);

/// Parses a 2k-qubit basis index into (I, R).
TokenReport report_from_basis_index(int k, std::uint64_t index);

/// Samples the honest report distribution directly: I uniform, R = F_S(I).
TokenReport report_emulated(const SecretString& secret, Rng& rng);

/// Accepts iff R equals block I of S and (I, R) is not in H.
bool test(const SecretString& secret, const VerificationHistory& history, const TokenReport& r);

/// Accepts iff r is one of the minted classical blocks and not in `history`.
bool test_classical(const SecretString& secret, std::span<const std::uint32_t> history,
                    std::uint32_t r);

/// Acceptance bit per submission, each judged against all earlier submissions.
/// Throws std::length_error when more than cap_test reports are given.
std::vector<bool> btest(const SecretString& secret, std::span<const TokenReport> reports);

std::size_t hamming_weight(const std::vector<bool>& bits);

}  // namespace qtoken
