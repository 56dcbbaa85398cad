#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qtoken/rng.hpp"

namespace qtoken {

using Amplitude = std::complex<double>;

inline constexpr double kPruneThreshold = 1e-12;
inline constexpr double kNormTolerance = 1e-9;
inline constexpr int kMaxQubits = 62;

/// Normalized pure state stored as a sorted basis-index -> amplitude map.
///
/// Qubit 0 is the most significant bit of the basis index, so the register at
/// offset 0 of a layout occupies the high bits. Amplitudes with magnitude below
/// kPruneThreshold are dropped and the remainder renormalized on construction;
/// every instance therefore satisfies |sum |a|^2 - 1| <= kNormTolerance.
class RegisterLayout;

class SparseState {
public:
    struct Entry {
        std::uint64_t index;
        Amplitude amplitude;
    };

    /// Computational basis state |index>.
    static SparseState basis(int num_qubits, std::uint64_t index);

    /// Builds a state from arbitrary (possibly unnormalized, unsorted,
    /// duplicated) entries. Duplicates are summed. Throws on a zero vector or
    /// an index outside [0, 2^num_qubits).
    static SparseState from_entries(int num_qubits, std::vector<Entry> entries);

    static SparseState from_dense(int num_qubits, std::span<const Amplitude> amplitudes);

    int num_qubits() const { return num_qubits_; }
    std::size_t nonzeros() const { return entries_.size(); }
    std::span<const Entry> entries() const { return entries_; }

    /// Zero when the index is not stored.
    Amplitude amplitude(std::uint64_t index) const;

    double norm_squared() const;

    std::vector<Amplitude> to_dense() const;

private:
    friend SparseState apply_register_swap(const SparseState&, const RegisterLayout&,
                                           std::string_view, std::string_view);

    SparseState(int num_qubits, std::vector<Entry> entries)
        : num_qubits_(num_qubits), entries_(std::move(entries)) {}

    int num_qubits_ = 0;
    std::vector<Entry> entries_;
};

struct Register {
    std::string name;
    int offset = 0;
    int width = 0;
};

/// Named contiguous qubit ranges, laid out left to right without gaps.
class RegisterLayout {
public:
    RegisterLayout() = default;
    RegisterLayout(std::initializer_list<std::pair<std::string, int>> regs);

    /// Appends a register after the current last one.
    RegisterLayout& add(std::string name, int width);

    /// Layout of a tensor product: this layout's registers followed by `other`'s.
    RegisterLayout concat(const RegisterLayout& other) const;

    const Register& at(std::string_view name) const;
    bool contains(std::string_view name) const;
    const std::vector<Register>& registers() const { return registers_; }
    int total_width() const { return total_width_; }

private:
    std::vector<Register> registers_;
    int total_width_ = 0;
};

/// Value of `reg`'s bit-field inside a basis index of a `total`-qubit state.
std::uint64_t register_value(std::uint64_t index, const Register& reg, int total);

/// Basis index with `reg`'s bit-field replaced by `value`.
std::uint64_t with_register_value(std::uint64_t index, const Register& reg, int total,
                                  std::uint64_t value);

SparseState tensor(const SparseState& a, const SparseState& b);

/// <a|b>, conjugate-linear in `a`.
Amplitude inner_product(const SparseState& a, const SparseState& b);

/// |<a|b>|^2
double fidelity(const SparseState& a, const SparseState& b);

struct MeasureResult {
    std::uint64_t value;
    SparseState post_state;
};

/// Computational-basis measurement of one register; the returned state is the
/// renormalized conditional state.
MeasureResult measure_register(const SparseState& state, const RegisterLayout& layout,
                               std::string_view reg, Rng& rng);

/// Full computational-basis measurement. Returns the sampled basis index.
std::uint64_t measure_all(const SparseState& state, Rng& rng);

/// Marginal distribution of a register as sorted (value, probability) pairs.
std::vector<std::pair<std::uint64_t, double>> register_distribution(const SparseState& state,
                                                                    const RegisterLayout& layout,
                                                                    std::string_view reg);

/// Exchanges the bit-fields of two equal-width registers.
SparseState apply_register_swap(const SparseState& state, const RegisterLayout& layout,
                                std::string_view reg_a, std::string_view reg_b);

struct SwapOutcome {
    int bit;
    SparseState post_state;
};

/// Projective swap test: outcome 0 projects onto (I+SWAP)/2, outcome 1 onto (I-SWAP)/2.
SwapOutcome swap_test(const SparseState& state, const RegisterLayout& layout,
                      std::string_view reg_a, std::string_view reg_b, Rng& rng);

/// Exact Pr[swap test = 1] = (1 - <v|SWAP|v>)/2. No sampling, no collapse.
double swap_probability(const SparseState& state, const RegisterLayout& layout,
                        std::string_view reg_a, std::string_view reg_b);

struct SwapBranch {
    double probability;
    /// Renormalized post-measurement state; empty when the branch has probability zero.
    std::optional<SparseState> post_state;
};

/// Probability and post-state of one swap-test outcome, without sampling.
SwapBranch swap_branch(const SparseState& state, const RegisterLayout& layout,
                       std::string_view reg_a, std::string_view reg_b, int bit);

/// Haar-random pure state (dense support).
SparseState random_state(int num_qubits, Rng& rng);

}  // namespace qtoken
