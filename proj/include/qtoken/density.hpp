#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qtoken/sparse_state.hpp"

namespace qtoken {

inline constexpr int kDefaultDenseLimit = 12;

/// Thrown when a reduced density matrix would exceed the dense qubit limit.
class DenseLimitExceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Dense density matrix. Construction checks Hermiticity, unit trace and
/// positive semidefiniteness to within 1e-9.
class DensityMatrix {
public:
    explicit DensityMatrix(Eigen::MatrixXcd entries);

    static DensityMatrix pure(const SparseState& state);

    Eigen::Index dim() const { return entries_.rows(); }
    const Eigen::MatrixXcd& entries() const { return entries_; }
    Eigen::VectorXd eigenvalues() const;

private:
    Eigen::MatrixXcd entries_;
};

/// Partial trace over every register not listed in `keep`. The kept
/// registers appear in the order given, so {"b", "a"} yields the
/// qubit-permuted marginal.
DensityMatrix reduced_density(const SparseState& state, const RegisterLayout& layout,
                              const std::vector<std::string>& keep,
                              int dense_limit = kDefaultDenseLimit);

/// Pr[swap test = 1] = (1 - Tr(rho SWAP)) / 2 for a density matrix over two
/// registers of `register_width` qubits each.
double swap_probability(const DensityMatrix& rho, int register_width);

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
double trace_norm(const Eigen::MatrixXcd& hermitian);

/// Optimal probability of telling r1 from r2 given one copy: 1/2 + ||r1 - r2||_1 / 4.
double trace_distance_advantage(const DensityMatrix& r1, const DensityMatrix& r2);

}  // namespace qtoken
