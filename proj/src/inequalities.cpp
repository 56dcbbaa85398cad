#include "qtoken/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "qtoken/adversary.hpp"
#include "qtoken/audit.hpp"
#include "qtoken/density.hpp"
#include "qtoken/sparse_state.hpp"
#include "qtoken/token_scheme.hpp"

namespace qtoken::inequalities {

void CheckSummary::record(double lhs, double rhs) {
    ++instances;
    const double gap = lhs - rhs;
    max_violation = instances == 1 ? gap : std::max(max_violation, gap);
    if (gap > kViolationTolerance) ++violations;
}

namespace {

Eigen::MatrixXcd gaussian_matrix(int rows, int cols, bool complex_entries, Rng& rng) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXcd m(rows, cols);
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) {
            const double re = normal(rng);
            const double im = complex_entries ? normal(rng) : 0.0;
            m(r, c) = {re, im};
        }
    }
    return m;
}

// Orthogonal projector onto a random subspace of dimension in [0, dim].
Eigen::MatrixXcd random_projector(int dim, bool complex_entries, Rng& rng) {
    const int sub = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(dim) + 1));
    if (sub == 0) return Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(gaussian_matrix(dim, sub, complex_entries, rng));
    const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(dim, sub);
    return q * q.adjoint();
}

struct ProjectionInstance {
    Eigen::VectorXcd v;
    Eigen::MatrixXcd p1, p2;
};

ProjectionInstance random_projection_instance(std::size_t i, int max_dim, Rng& rng) {
    const bool complex_entries = (i % 2) == 1;
    const int dim = 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(max_dim)));
    ProjectionInstance inst;
    inst.v = gaussian_matrix(dim, 1, complex_entries, rng).col(0);
    // Arbitrary (unnormalized) lengths are part of the claim.
    inst.v *= std::exp(std::normal_distribution<double>(0.0, 1.0)(rng));
    inst.p1 = random_projector(dim, complex_entries, rng);
    inst.p2 = random_projector(dim, complex_entries, rng);
    return inst;
}

RegisterLayout three_registers(int side, int reg) {
    RegisterLayout layout;
    if (side > 0) layout.add("r0", side);
    layout.add("r1", reg).add("r2", reg);
    return layout;
}

SparseState sum_states(const std::vector<SparseState>& parts) {
    std::vector<SparseState::Entry> all;
    for (const auto& p : parts) all.insert(all.end(), p.entries().begin(), p.entries().end());
    // Fixed summation order so permutation-symmetric sums are exactly symmetric.
    std::sort(all.begin(), all.end(), [](const SparseState::Entry& x, const SparseState::Entry& y) {
        if (x.index != y.index) return x.index < y.index;
        if (x.amplitude.real() != y.amplitude.real()) return x.amplitude.real() < y.amplitude.real();
        return x.amplitude.imag() < y.amplitude.imag();
    });
    std::vector<SparseState::Entry> merged;
    for (const auto& e : all) {
        if (!merged.empty() && merged.back().index == e.index) {
            merged.back().amplitude += e.amplitude;
        } else {
            merged.push_back(e);
        }
    }
    return SparseState::from_entries(parts.front().num_qubits(), std::move(merged));
}

void swap_mixed_instance(CheckSummary& s, const SparseState& chi, const RegisterLayout& layout,
                         bool has_side, int reg, bool exact) {
    std::vector<std::string> k1{"r1"}, k2{"r2"};
    if (has_side) {
        k1.insert(k1.begin(), "r0");
        k2.insert(k2.begin(), "r0");
    }
    const double lhs =
        trace_distance_advantage(reduced_density(chi, layout, k1), reduced_density(chi, layout, k2));
    const double bot = swap_probability(reduced_density(chi, layout, {"r1", "r2"}), reg);
    const double rhs = 0.5 + std::sqrt(bot);
    if (exact) {
        s.record(std::abs(lhs - rhs), 0.0);
    } else {
        s.record(lhs, rhs);
    }
}

void swap_chain_instance(CheckSummary& s, const SparseState& chi, const RegisterLayout& layout,
                         bool exact) {
    const double lhs = swap_probability(chi, layout, "r1", "r2");
    const auto branch = swap_branch(chi, layout, "r2", "r3", 0);
    const double p23 = swap_probability(chi, layout, "r2", "r3");
    const double rhs =
        p23 + (branch.post_state ? swap_probability(*branch.post_state, layout, "r1", "r2") : 0.0);
    if (exact) {
        s.record(std::abs(lhs - rhs), 0.0);
    } else {
        s.record(lhs, rhs);
    }
}

RegisterLayout four_registers(int side, int reg) {
    RegisterLayout layout = three_registers(side, reg);
    layout.add("r3", reg);
    return layout;
}

}  // namespace

CheckSummary projection_chain(std::size_t instances, Rng& rng, int max_dim) {
    CheckSummary s{.name = "projection-chain"};
    for (std::size_t i = 0; i < instances; ++i) {
        const auto inst = random_projection_instance(i, max_dim, rng);
        s.record((inst.p2 * (inst.p1 * inst.v)).norm(), (inst.p2 * inst.v).norm());
    }
    return s;
}

CheckSummary projection_chain_commuting(std::size_t instances, Rng& rng, int max_dim) {
    CheckSummary s{.name = "projection-chain-commuting"};
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < instances; ++i) {
        const bool complex_entries = (i % 2) == 1;
        const int dim = 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(max_dim)));
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(gaussian_matrix(dim, dim, complex_entries, rng));
        const Eigen::MatrixXcd u = qr.householderQ();
        Eigen::VectorXcd d1(dim), d2(dim);
        for (int j = 0; j < dim; ++j) {
            d1(j) = coin(rng) ? 1.0 : 0.0;
            d2(j) = coin(rng) ? 1.0 : 0.0;
        }
        const Eigen::MatrixXcd p1 = u * d1.asDiagonal() * u.adjoint();
        const Eigen::MatrixXcd p2 = u * d2.asDiagonal() * u.adjoint();
        Eigen::VectorXcd v = gaussian_matrix(dim, 1, complex_entries, rng).col(0);
        v *= std::exp(std::normal_distribution<double>(0.0, 1.0)(rng));
        s.record((p2 * (p1 * v)).norm(), (p2 * v).norm());
    }
    return s;
}

CheckSummary projection_chain_swap(std::size_t instances, Rng& rng, int reg_qubits) {
    CheckSummary s{.name = "projection-chain-swap"};
    const auto layout = four_registers(0, reg_qubits);
    for (std::size_t i = 0; i < instances; ++i) {
        const auto chi = random_state(layout.total_width(), rng);
        // S1 = symmetric subspace of (2,3), S2 = symmetric subspace of (1,2).
        const auto branch = swap_branch(chi, layout, "r2", "r3", 0);
        const double lhs2 = branch.post_state
                                ? branch.probability *
                                      (1.0 - swap_probability(*branch.post_state, layout, "r1", "r2"))
                                : 0.0;
        const double rhs2 = 1.0 - swap_probability(chi, layout, "r1", "r2");
        s.record(std::sqrt(std::max(lhs2, 0.0)), std::sqrt(std::max(rhs2, 0.0)));
    }
    return s;
}

CheckSummary projection_difference(std::size_t instances, Rng& rng, int max_dim) {
    CheckSummary s{.name = "projection-difference"};
    for (std::size_t i = 0; i < instances; ++i) {
        const auto inst = random_projection_instance(i, max_dim, rng);
        const Eigen::VectorXcd perp = inst.v - inst.p1 * inst.v;
        const double lhs = (inst.p2 * inst.v).squaredNorm() - (inst.p2 * (inst.p1 * inst.v)).squaredNorm();
        s.record(lhs, 2.0 * perp.norm() * inst.v.norm());
    }
    return s;
}

CheckSummary swap_mixed(std::size_t instances, Rng& rng, int side_qubits, int reg_qubits) {
    CheckSummary s{.name = "swap-mixed"};
    const auto layout = three_registers(side_qubits, reg_qubits);
    for (std::size_t i = 0; i < instances; ++i) {
        swap_mixed_instance(s, random_state(layout.total_width(), rng), layout, side_qubits > 0,
                            reg_qubits, false);
    }
    return s;
}

CheckSummary swap_chain(std::size_t instances, Rng& rng, int side_qubits, int reg_qubits) {
    CheckSummary s{.name = "swap-chain"};
    const auto layout = four_registers(side_qubits, reg_qubits);
    for (std::size_t i = 0; i < instances; ++i) {
        swap_chain_instance(s, random_state(layout.total_width(), rng), layout, false);
    }
    return s;
}

std::vector<CheckSummary> report_indistinguishability(std::size_t instances, Rng& rng,
                                                      int side_qubits, int reg_qubits) {
    CheckSummary full{.name = "report-indistinguishability"};
    CheckSummary dephased{.name = "report-dephasing"};
    const auto layout = three_registers(side_qubits, reg_qubits);
    if (side_qubits <= 0) throw std::invalid_argument("report indistinguishability needs a side register");
    for (std::size_t i = 0; i < instances; ++i) {
        const auto chi = random_state(layout.total_width(), rng);
        const auto gap = anonymity_gap(chi, layout, "r0", "r1", "r2");
        full.record(gap.advantage, gap.bound);
        dephased.record(gap.report_advantage, gap.advantage);
    }
    return {full, dephased};
}

CheckSummary pattern_chain(std::size_t instances, Rng& rng, int reg_qubits, int tokens) {
    CheckSummary s{.name = "pattern-chain"};
    RegisterLayout layout;
    layout.add("pattern", reg_qubits);
    std::vector<std::string> names;
    for (int t = 1; t <= tokens; ++t) {
        names.push_back("t" + std::to_string(t));
        layout.add(names.back(), reg_qubits);
    }
    for (std::size_t i = 0; i < instances; ++i) {
        const auto chi = random_state(layout.total_width(), rng);
        const double chain = report_chain_detection_probability(chi, layout, "pattern", names);
        const double single = report_prime_detection_probability(chi, layout, "pattern", names.front());
        s.record(single, chain);
    }
    return s;
}

std::vector<CheckSummary> identical_register_family(std::size_t instances, Rng& rng) {
    CheckSummary mixed{.name = "swap-mixed-symmetric"};
    CheckSummary chain{.name = "swap-chain-symmetric"};
    CheckSummary anon{.name = "report-indistinguishability-symmetric"};
    const int side = 2, reg = 2;
    const auto layout3 = three_registers(side, reg);
    const auto layout4 = four_registers(0, reg);
    for (std::size_t i = 0; i < instances; ++i) {
        const auto v = random_state(layout3.total_width(), rng);
        const auto chi = sum_states({v, apply_register_swap(v, layout3, "r1", "r2")});
        swap_mixed_instance(mixed, chi, layout3, true, reg, true);
        const auto gap = anonymity_gap(chi, layout3, "r0", "r1", "r2");
        anon.record(std::abs(gap.advantage - gap.bound), 0.0);

        const auto w = random_state(layout4.total_width(), rng);
        const auto s12 = apply_register_swap(w, layout4, "r1", "r2");
        const auto s23 = apply_register_swap(w, layout4, "r2", "r3");
        const auto sym = sum_states({w, s12, s23, apply_register_swap(w, layout4, "r1", "r3"),
                                     apply_register_swap(s23, layout4, "r1", "r2"),
                                     apply_register_swap(s12, layout4, "r2", "r3")});
        swap_chain_instance(chain, sym, layout4, true);
    }
    return {mixed, chain, anon};
}

std::vector<CheckSummary> loaded_family(std::size_t instances, Rng& rng, int k) {
    CheckSummary anon{.name = "report-indistinguishability-loaded"};
    CheckSummary detect{.name = "loaded-detection-exact"};
    for (std::size_t i = 0; i < instances; ++i) {
        const auto secret = SecretString::random_indexed(k, rng);
        const auto loaded = mint_loaded(secret);
        RegisterLayout layout;
        layout.add("pattern", 2 * k);
        layout = layout.concat(loaded.layout);
        const auto joint = tensor(token_state(secret), loaded.joint);
        const auto gap = anonymity_gap(joint, layout, "bank", "pattern", "token");
        anon.record(gap.advantage, gap.bound);
        const double p = report_prime_detection_probability(joint, layout, "pattern", "token");
        detect.record(std::abs(p - (1.0 - std::ldexp(1.0, -k)) / 2.0), 0.0);
    }
    return {anon, detect};
}

}  // namespace qtoken::inequalities
