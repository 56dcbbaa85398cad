#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qtoken/density.hpp"
#include "qtoken/sparse_state.hpp"
#include "qtoken/token_scheme.hpp"

namespace qtoken {

/// Either "cheating detected" (a swap test returned 1) or a passed report.
class AuditOutcome {
public:
    static AuditOutcome cheat_detected() { return AuditOutcome(std::nullopt); }
    static AuditOutcome passed(TokenReport r) { return AuditOutcome(r); }

    bool detected() const { return !report_; }
    /// Throws std::logic_error on a CheatDetected outcome.
    const TokenReport& report() const;

private:
    explicit AuditOutcome(std::optional<TokenReport> r) : report_(r) {}
    std::optional<TokenReport> report_;
};

struct AuditResult {
    AuditOutcome outcome;
    /// Joint state after the audit. On a pass the token register is collapsed
    /// and the pattern register is left for the next audit.
    SparseState post_state;
};

/// Swap-tests the pattern register against the token register; on outcome 0
/// measures the token register of the post-state and parses the report.
AuditResult report_prime(const SparseState& joint, const RegisterLayout& layout,
                         std::string_view pattern, std::string_view token, Rng& rng);

struct ChainResult {
    /// Swap-test outcomes in execution order (last token register first).
    std::vector<int> swap_bits;
    AuditOutcome outcome;
    SparseState post_state;
};

/// Swap-tests the pattern against tokens.back(), ..., tokens.front() on the
/// evolving state, aborting on the first outcome 1; otherwise reports on
/// tokens.front(). With a single token this is report_prime.
ChainResult report_chain(const SparseState& joint, const RegisterLayout& layout,
                         std::string_view pattern, const std::vector<std::string>& tokens,
                         Rng& rng);

/// Exact Pr[report_prime = CheatDetected].
double report_prime_detection_probability(const SparseState& joint, const RegisterLayout& layout,
                                          std::string_view pattern, std::string_view token);

/// Exact Pr[report_chain = CheatDetected], from the product of outcome-0
/// probabilities along the chain of post-states.
double report_chain_detection_probability(const SparseState& joint, const RegisterLayout& layout,
                                          std::string_view pattern,
                                          const std::vector<std::string>& tokens);

struct AnonymityGap {
    /// 1/2 + ||sigma_{0,1} - sigma_{0,2}||_1 / 4: best guess of which token
    /// register was used, given register 0 and the whole token register.
    double advantage;
    /// Same, when the guesser only sees register 0 and the classical report.
    double report_advantage;
    /// Pr[swap test between registers 1 and 2 returns 1].
    double swap_bot;
    /// 1/2 + sqrt(swap_bot).
    double bound;
};

/// Compares how well a holder of register `side` can tell registers `first`
/// and `second` apart against the swap-test detection bound.
AnonymityGap anonymity_gap(const SparseState& chi, const RegisterLayout& layout,
                           std::string_view side, std::string_view first,
                           std::string_view second, int dense_limit = kDefaultDenseLimit);

}  // namespace qtoken
