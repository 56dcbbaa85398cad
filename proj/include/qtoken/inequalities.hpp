#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qtoken/rng.hpp"

namespace qtoken::inequalities {

inline constexpr double kViolationTolerance = 1e-9;

/// Outcome of checking one inequality `lhs <= rhs` on many instances.
struct CheckSummary {
    std::string name;
    std::size_t instances = 0;
    /// max(lhs - rhs) over all instances; <= kViolationTolerance means it held.
    double max_violation = -1.0;
    /// Instances with lhs - rhs > kViolationTolerance.
    std::size_t violations = 0;

    void record(double lhs, double rhs);
    bool held() const { return violations == 0; }
};

/// ||(v|S1)|S2|| <= ||v|S2|| for random vectors and subspaces of C^d / R^d, d <= max_dim.
CheckSummary projection_chain(std::size_t instances, Rng& rng, int max_dim = 16);

/// The same chain for commuting projectors (simultaneously diagonal in a random basis).
CheckSummary projection_chain_commuting(std::size_t instances, Rng& rng, int max_dim = 16);

/// The same chain with S1, S2 the symmetric subspaces of registers (2,3) and (1,2)
/// on random states of registers r1, r2, r3.
CheckSummary projection_chain_swap(std::size_t instances, Rng& rng, int reg_qubits = 2);

/// ||v|S2||^2 - ||(v|S1)|S2||^2 <= 2 ||v|S1perp|| ||v||.
CheckSummary projection_difference(std::size_t instances, Rng& rng, int max_dim = 16);

/// Random |chi> over registers 0 (side_qubits), 1 and 2 (reg_qubits each):
/// 1/2 + ||sigma_1 - sigma_2||_1 / 4 <= 1/2 + sqrt(Swap1(sigma)).
CheckSummary swap_mixed(std::size_t instances, Rng& rng, int side_qubits = 2, int reg_qubits = 2);

/// Random |chi> over registers 0, 1, 2, 3:
/// Swap12(chi) <= Swap23(chi) + Swap12(chi after Swap23 returned 0).
CheckSummary swap_chain(std::size_t instances, Rng& rng, int side_qubits = 0, int reg_qubits = 2);

/// anonymity_gap on random |chi>: advantage <= 1/2 + sqrt(Pr[bot]).
/// Also checks report_advantage <= advantage.
std::vector<CheckSummary> report_indistinguishability(std::size_t instances, Rng& rng,
                                                      int side_qubits = 2, int reg_qubits = 2);

/// Exact detection probabilities on random states over pattern + `tokens`
/// registers: Pr[chain detects] >= Pr[single audit on the first token detects].
CheckSummary pattern_chain(std::size_t instances, Rng& rng, int reg_qubits = 2,
                           int tokens = 2);

/// Identical registers: every inequality collapses to 0 <= 0 (or 1/2 <= 1/2).
/// Recorded as |lhs - rhs| <= 0 so any slack counts as a violation.
std::vector<CheckSummary> identical_register_family(std::size_t instances, Rng& rng);

/// Loaded-bank states with an honest pattern, at block width k.
std::vector<CheckSummary> loaded_family(std::size_t instances, Rng& rng, int k = 2);

}  // namespace qtoken::inequalities
