#include "qtoken/audit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qtoken {

namespace {

TokenReport measure_token(const SparseState& state, const RegisterLayout& layout,
                          std::string_view token, Rng& rng, SparseState& post) {
    const Register& reg = layout.at(token);
    if (reg.width % 2 != 0) throw std::invalid_argument("token register width must be even");
    auto m = measure_register(state, layout, token, rng);
    post = std::move(m.post_state);
    return report_from_basis_index(reg.width / 2, m.value);
}

// Trace norm of the difference after dephasing the last `tail_width` qubits
// of both matrices in the computational basis.
double dephased_trace_norm(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, int tail_width) {
    const Eigen::Index tail = Eigen::Index{1} << tail_width;
    const Eigen::Index head = a.rows() / tail;
    double total = 0.0;
    Eigen::MatrixXcd block(head, head);
    for (Eigen::Index r = 0; r < tail; ++r) {
        for (Eigen::Index i = 0; i < head; ++i) {
            for (Eigen::Index j = 0; j < head; ++j) {
                block(i, j) = a(i * tail + r, j * tail + r) - b(i * tail + r, j * tail + r);
            }
        }
        total += trace_norm(block);
    }
    return total;
}

}  // namespace

const TokenReport& AuditOutcome::report() const {
    if (!report_) throw std::logic_error("audit detected cheating; no report available");
    return *report_;
}

AuditResult report_prime(const SparseState& joint, const RegisterLayout& layout,
                         std::string_view pattern, std::string_view token, Rng& rng) {
    auto swap = swap_test(joint, layout, pattern, token, rng);
    if (swap.bit == 1) return {AuditOutcome::cheat_detected(), std::move(swap.post_state)};
    SparseState post = swap.post_state;
    const TokenReport r = measure_token(swap.post_state, layout, token, rng, post);
    return {AuditOutcome::passed(r), std::move(post)};
}

ChainResult report_chain(const SparseState& joint, const RegisterLayout& layout,
                         std::string_view pattern, const std::vector<std::string>& tokens,
                         Rng& rng) {
    if (tokens.empty()) throw std::invalid_argument("report_chain needs at least one token");
    const int width = layout.at(pattern).width;
    for (const auto& t : tokens) {
        if (layout.at(t).width != width) {
            throw std::invalid_argument("token register '" + t + "' differs from pattern width");
        }
    }
    std::vector<int> bits;
    SparseState state = joint;
    for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
        auto swap = swap_test(state, layout, pattern, *it, rng);
        bits.push_back(swap.bit);
        state = std::move(swap.post_state);
        if (swap.bit == 1) {
            return {std::move(bits), AuditOutcome::cheat_detected(), std::move(state)};
        }
    }
    SparseState post = state;
    const TokenReport r = measure_token(state, layout, tokens.front(), rng, post);
    return {std::move(bits), AuditOutcome::passed(r), std::move(post)};
}

double report_prime_detection_probability(const SparseState& joint, const RegisterLayout& layout,
                                          std::string_view pattern, std::string_view token) {
    return swap_probability(joint, layout, pattern, token);
}

double report_chain_detection_probability(const SparseState& joint, const RegisterLayout& layout,
                                          std::string_view pattern,
                                          const std::vector<std::string>& tokens) {
    if (tokens.empty()) throw std::invalid_argument("report_chain needs at least one token");
    double pass = 1.0;
    SparseState state = joint;
    for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
        auto branch = swap_branch(state, layout, pattern, *it, 0);
        if (!branch.post_state) return 1.0;
        pass *= branch.probability;
        state = std::move(*branch.post_state);
    }
    return std::clamp(1.0 - pass, 0.0, 1.0);
}

AnonymityGap anonymity_gap(const SparseState& chi, const RegisterLayout& layout,
                           std::string_view side, std::string_view first,
                           std::string_view second, int dense_limit) {
    const Register& r1 = layout.at(first);
    const Register& r2 = layout.at(second);
    if (r1.width != r2.width) throw std::invalid_argument("token registers differ in width");

    const auto sigma_first = reduced_density(chi, layout, {std::string(side), r1.name}, dense_limit);
    const auto sigma_second = reduced_density(chi, layout, {std::string(side), r2.name}, dense_limit);

    AnonymityGap gap{};
    gap.advantage = trace_distance_advantage(sigma_first, sigma_second);
    gap.report_advantage =
        std::clamp(0.5 + dephased_trace_norm(sigma_first.entries(), sigma_second.entries(),
                                             r1.width) / 4.0,
                   0.5, 1.0);
    gap.swap_bot = swap_probability(chi, layout, first, second);
    gap.bound = 0.5 + std::sqrt(gap.swap_bot);
    return gap;
}

}  // namespace qtoken
