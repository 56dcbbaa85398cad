#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qtoken/sparse_state.hpp"
#include "qtoken/token_scheme.hpp"

namespace qtoken {

// ---------------------------------------------------------------------------
// Forging users

enum class GuessPolicy {
    UniformFreshIndex,  ///< guesses at unused indices with uniform values
    Replay,             ///< resubmits the measured pairs
    BlockCollision,     ///< guesses at unused indices reusing observed values
};

std::string to_string(GuessPolicy p);
GuessPolicy guess_policy_from_string(std::string_view name);

struct ForgerStrategy {
    std::string name;
    std::size_t q = 0;             ///< honest tokens measured
    std::size_t guess_budget = 0;  ///< total reports submitted
    GuessPolicy policy = GuessPolicy::UniformFreshIndex;

    /// Throws std::invalid_argument unless q <= tokens_available,
    /// guess_budget <= cap_test and q <= guess_budget.
    void validate(const SchemeParams& params, std::size_t tokens_available) const;
};

enum class TokenSource { Quantum, Emulated };

struct ForgeryOutcome {
    std::size_t accepted = 0;
    std::size_t submitted = 0;
    std::size_t measured = 0;
    /// More verifications passed than tokens consumed.
    bool win() const { return accepted > measured; }
};

/// The forger's submissions: the `q` measured honest reports first, then
/// guesses per the policy up to `guess_budget` reports in total.
std::vector<TokenReport> plan_forgery(const SecretString& secret, const ForgerStrategy& strategy,
                                      Rng& rng, TokenSource source = TokenSource::Emulated);

/// Measures `q` honest tokens, builds `guess_budget` submissions per the
/// policy and runs them through btest. Tokens available = cap_mint.
ForgeryOutcome run_forgery(const SecretString& secret, const ForgerStrategy& strategy, Rng& rng,
                           TokenSource source = TokenSource::Emulated);

/// min(1, 5 N (q+1) / |Y|): chance that an adversary with q queries gets
/// more than q of N output pairs right.
double eval_forgery_bound(std::uint64_t n, std::uint64_t q, std::uint64_t y_size);
/// Same with constant 6, as used for the scheme's eps_f.
double eval_forgery_bound_6(std::uint64_t n, std::uint64_t q, std::uint64_t y_size);

/// |Y|^{-r} * sum_{i=0}^{q} C(r, i) (|Y|-1)^i: chance that q queries yield r > q
/// correct pairs. Throws std::invalid_argument when r <= q.
double eval_all_correct_bound(std::uint64_t q, std::uint64_t r, std::uint64_t y_size);

/// Single-bit toy scheme (one secret bit per index): the forger measures one
/// token and submits that pair plus one uniform guess at another index.
ForgeryOutcome run_toy_forgery(int index_bits, Rng& rng);

// ---------------------------------------------------------------------------
// Tracking banks

struct TrackingBankStrategy {
    enum class Kind { Honest, LoadedEntangled, PermutationPaired };
    Kind kind = Kind::Honest;
    /// PermutationPaired only: the pairing h on 0-based indices.
    std::vector<std::uint32_t> permutation;

    std::string name() const;
    static TrackingBankStrategy from_name(std::string_view name);
};

struct AdversarialMint {
    SparseState joint;
    RegisterLayout layout;
};

/// sum_i |i>_bank |i, F_S(i)>_token / 2^{k/2}. Registers "bank" (k qubits)
/// and "token" (2k qubits); the bank keeps the first.
AdversarialMint mint_loaded(const SecretString& secret);

/// sum_i |i, F_S(i)>_token1 |h(i), F_S(h(i))>_token2 / 2^{k/2}.
/// Throws std::invalid_argument when h is not a bijection on [0, 2^k).
AdversarialMint mint_permutation_paired(const SecretString& secret,
                                        std::span<const std::uint32_t> h);

/// Uniformly random permutation of [0, size).
std::vector<std::uint32_t> random_permutation(std::uint32_t size, Rng& rng);

/// Loaded bank: measures its retained register in `retained` and flags the
/// message as coming from the traced token iff the indices agree.
bool trace_loaded(const SparseState& retained, const RegisterLayout& layout,
                  const TokenReport& message, Rng& rng);

/// Permutation-paired bank: history positions (a, b) where report b carries
/// index h(index of report a) and both reports are valid for `secret`.
std::vector<std::pair<std::size_t, std::size_t>> trace_permutation_pairs(
    const SecretString& secret, std::span<const std::uint32_t> h,
    std::span<const TokenReport> history);

}  // namespace qtoken
