#include "qtoken/density.hpp"

#include <algorithm>
#include <cmath>

namespace qtoken {

namespace {
constexpr double kTol = 1e-9;
}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
        throw std::invalid_argument("density matrix must be square and non-empty");
    }
    if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > kTol) {
        throw std::invalid_argument("density matrix is not Hermitian");
    }
    if (std::abs(entries_.trace() - std::complex<double>(1.0, 0.0)) > kTol) {
        throw std::invalid_argument("density matrix trace differs from 1");
    }
    if (eigenvalues().minCoeff() < -kTol) {
        throw std::invalid_argument("density matrix has a negative eigenvalue");
    }
}

DensityMatrix DensityMatrix::pure(const SparseState& state) {
    const auto v = state.to_dense();
    Eigen::Map<const Eigen::VectorXcd> vec(v.data(), static_cast<Eigen::Index>(v.size()));
    return DensityMatrix(vec * vec.adjoint());
}

Eigen::VectorXd DensityMatrix::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(entries_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

DensityMatrix reduced_density(const SparseState& state, const RegisterLayout& layout,
                              const std::vector<std::string>& keep, int dense_limit) {
    if (layout.total_width() != state.num_qubits()) {
        throw std::invalid_argument("layout does not match state width");
    }
    std::vector<const Register*> kept;
    int kept_width = 0;
    for (const auto& name : keep) {
        const Register& r = layout.at(name);
        if (std::find(kept.begin(), kept.end(), &r) != kept.end()) {
            throw std::invalid_argument("register '" + name + "' listed twice");
        }
        kept.push_back(&r);
        kept_width += r.width;
    }
    if (kept_width > dense_limit) {
        throw DenseLimitExceeded("reduced density over " + std::to_string(kept_width) +
                                 " qubits exceeds the dense limit of " +
                                 std::to_string(dense_limit));
    }
    std::vector<const Register*> traced;
    for (const auto& r : layout.registers()) {
        if (std::find(kept.begin(), kept.end(), &r) == kept.end()) traced.push_back(&r);
    }

    const int n = state.num_qubits();
    struct Split {
        std::uint64_t env;
        std::uint64_t sys;
        Amplitude amp;
    };
    std::vector<Split> split;
    split.reserve(state.nonzeros());
    for (const auto& e : state.entries()) {
        std::uint64_t sys = 0;
        for (const Register* r : kept) sys = (sys << r->width) | register_value(e.index, *r, n);
        std::uint64_t env = 0;
        for (const Register* r : traced) env = (env << r->width) | register_value(e.index, *r, n);
        split.push_back({env, sys, e.amplitude});
    }
    std::sort(split.begin(), split.end(),
              [](const Split& a, const Split& b) { return a.env < b.env; });

    const Eigen::Index dim = Eigen::Index{1} << kept_width;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t lo = 0; lo < split.size();) {
        std::size_t hi = lo;
        while (hi < split.size() && split[hi].env == split[lo].env) ++hi;
        for (std::size_t i = lo; i < hi; ++i) {
            for (std::size_t j = lo; j < hi; ++j) {
                rho(static_cast<Eigen::Index>(split[i].sys), static_cast<Eigen::Index>(split[j].sys)) +=
                    split[i].amp * std::conj(split[j].amp);
            }
        }
        lo = hi;
    }
    return DensityMatrix(std::move(rho));
}

double swap_probability(const DensityMatrix& rho, int register_width) {
    const Eigen::Index side = Eigen::Index{1} << register_width;
    if (rho.dim() != side * side) {
        throw std::invalid_argument("density matrix is not over two registers of the given width");
    }
    // Tr(rho (I - SWAP)) / 2, term by term so a symmetric rho gives exactly 0.
    const auto& m = rho.entries();
    double p = 0.0;
    for (Eigen::Index a = 0; a < side; ++a) {
        for (Eigen::Index b = 0; b < side; ++b) {
            p += (m(a * side + b, a * side + b) - m(a * side + b, b * side + a)).real();
        }
    }
    return std::clamp(p / 2.0, 0.0, 1.0);
}

double trace_norm(const Eigen::MatrixXcd& hermitian) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hermitian, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().sum();
}

double trace_distance_advantage(const DensityMatrix& r1, const DensityMatrix& r2) {
    if (r1.dim() != r2.dim()) throw std::invalid_argument("density matrices differ in dimension");
    const double adv = 0.5 + trace_norm(r1.entries() - r2.entries()) / 4.0;
    return std::clamp(adv, 0.5, 1.0);
}

}  // namespace qtoken
