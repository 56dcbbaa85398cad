#include <gtest/gtest.h>

#include <cmath>

#include "oracle.hpp"
#include "qtoken/adversary.hpp"
#include "qtoken/audit.hpp"
#include "qtoken/stats.hpp"

using namespace qtoken;

namespace {

struct Joint {
    SparseState state;
    RegisterLayout layout;
};

Joint pattern_and(const SecretString& s, const SparseState& token) {
    RegisterLayout l;
    l.add("pattern", 2 * s.k()).add("token", 2 * s.k());
    return {tensor(token_state(s), token), l};
}

Joint pattern_and_loaded(const SecretString& s) {
    const auto m = mint_loaded(s);
    RegisterLayout l;
    l.add("pattern", 2 * s.k());
    return {tensor(token_state(s), m.joint), l.concat(m.layout)};
}

// A basis state |i, F_S(i) xor 1>: orthogonal to the honest token.
SparseState orthogonal_token(const SecretString& s) {
    const int k = s.k();
    return SparseState::basis(2 * k, (std::uint64_t{0} << k) | (s.block(1) ^ 1u));
}

}  // namespace

TEST(ReportPrime, IdenticalHonestTokensNeverDetectAndKeepPattern) {
    Rng rng(1);
    const auto s = SecretString::random_indexed(4, rng);
    const auto j = pattern_and(s, token_state(s));
    const auto pattern_before = DensityMatrix::pure(token_state(s)).entries();
    for (int i = 0; i < 200; ++i) {
        const auto res = report_prime(j.state, j.layout, "pattern", "token", rng);
        ASSERT_FALSE(res.outcome.detected());
        const auto& r = res.outcome.report();
        EXPECT_EQ(s.block(r.index), r.value);
        const auto after = reduced_density(res.post_state, j.layout, {"pattern"});
        ASSERT_NEAR((after.entries() - pattern_before).norm(), 0.0, 1e-9);
    }
    EXPECT_NEAR(report_prime_detection_probability(j.state, j.layout, "pattern", "token"), 0.0, 1e-12);
}

TEST(ReportPrime, OrthogonalTokenDetectedHalfTheTime) {
    Rng rng(2);
    const auto s = SecretString::random_indexed(4, rng);
    const auto j = pattern_and(s, orthogonal_token(s));
    EXPECT_NEAR(report_prime_detection_probability(j.state, j.layout, "pattern", "token"), 0.5, 1e-12);
    const std::uint64_t n = 20000;
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        hits += report_prime(j.state, j.layout, "pattern", "token", rng).outcome.detected();
    }
    EXPECT_TRUE(stats::within_sigmas({hits, n}, 0.5));
}

TEST(ReportPrime, LoadedTokenDetectionIs15Over32AtK4) {
    Rng rng(3);
    const auto s = SecretString::random_indexed(4, rng);
    const auto j = pattern_and_loaded(s);
    EXPECT_NEAR(report_prime_detection_probability(j.state, j.layout, "pattern", "token"), 15.0 / 32.0,
                1e-12);
    // Independent route: Tr(rho sigma) of the pattern and the token marginal.
    const auto rho = DensityMatrix::pure(token_state(s)).entries();
    const auto sigma = reduced_density(j.state, j.layout, {"token"}).entries();
    const double overlap = (rho * sigma).trace().real();
    EXPECT_NEAR(overlap, 1.0 / 16.0, 1e-12);
    EXPECT_NEAR((1.0 - overlap) / 2.0, 15.0 / 32.0, 1e-12);

    const std::uint64_t n = 20000;
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        hits += report_prime(j.state, j.layout, "pattern", "token", rng).outcome.detected();
    }
    EXPECT_TRUE(stats::within_sigmas({hits, n}, 15.0 / 32.0));
}

TEST(ReportPrime, DetectedOutcomeHasNoReport) {
    EXPECT_THROW(AuditOutcome::cheat_detected().report(), std::logic_error);
}

TEST(ReportChain, IdenticalTokensNeverDetect) {
    Rng rng(4);
    const auto s = SecretString::random_indexed(2, rng);
    const auto t = token_state(s);
    RegisterLayout l{{"p", 4}, {"t1", 4}, {"t2", 4}};
    const auto joint = tensor(tensor(t, t), t);
    for (int i = 0; i < 100; ++i) {
        const auto res = report_chain(joint, l, "p", {"t1", "t2"}, rng);
        ASSERT_FALSE(res.outcome.detected());
        EXPECT_EQ(res.swap_bits, (std::vector<int>{0, 0}));
        EXPECT_EQ(s.block(res.outcome.report().index), res.outcome.report().value);
    }
}

TEST(ReportChain, OrthogonalRegisterDetectedHalfTheTimeAtItsPosition) {
    Rng rng(5);
    const auto phi = random_state(2, rng);
    // A state orthogonal to phi.
    auto d = phi.to_dense();
    std::vector<std::complex<double>> w(d.size());
    w[0] = -std::conj(d[1]);
    w[1] = std::conj(d[0]);
    const auto psi = SparseState::from_dense(2, w);
    ASSERT_NEAR(fidelity(phi, psi), 0.0, 1e-12);

    RegisterLayout l{{"p", 2}, {"t1", 2}, {"t2", 2}};
    // t2 (tested first) matches the pattern; t1 (tested second) is orthogonal.
    const auto joint = tensor(tensor(phi, psi), phi);
    EXPECT_NEAR(report_chain_detection_probability(joint, l, "p", {"t1", "t2"}), 0.5, 1e-12);
    const std::uint64_t n = 20000;
    std::uint64_t at_second = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto res = report_chain(joint, l, "p", {"t1", "t2"}, rng);
        ASSERT_EQ(res.swap_bits.front(), 0);
        at_second += res.outcome.detected();
    }
    EXPECT_TRUE(stats::within_sigmas({at_second, n}, 0.5));
}

TEST(ReportChain, ExactChainDetectsAtLeastSingleAudit) {
    Rng rng(6);
    RegisterLayout l{{"p", 2}, {"t1", 2}, {"t2", 2}};
    for (int i = 0; i < 200; ++i) {
        const auto chi = random_state(6, rng);
        EXPECT_GE(report_chain_detection_probability(chi, l, "p", {"t1", "t2"}) + 1e-9,
                  report_prime_detection_probability(chi, l, "p", "t1"));
    }
}

TEST(ReportChain, ExactProbabilityMatchesDenseOracle) {
    Rng rng(7);
    RegisterLayout l{{"p", 2}, {"t1", 2}, {"t2", 2}};
    for (int i = 0; i < 20; ++i) {
        const auto chi = random_state(6, rng);
        // Chain tests t2 then t1; pass probability is ||P_{p,t1} P_{p,t2} chi||^2.
        auto v = chi.to_dense();
        auto sym = [&](std::vector<std::complex<double>> x, int b) {
            const auto s = oracle::swap_registers(x, 6, 0, b, 2);
            for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] + s[j]) / 2.0;
            return x;
        };
        const auto passed = sym(sym(v, 4), 2);
        const double pass = std::real(oracle::dot(passed, passed));
        EXPECT_NEAR(report_chain_detection_probability(chi, l, "p", {"t1", "t2"}), 1.0 - pass, 1e-12);
    }
}

TEST(AnonymityGap, IdenticalRegisters) {
    Rng rng(8);
    const auto beta = random_state(2, rng), phi = random_state(2, rng);
    RegisterLayout l{{"r0", 2}, {"r1", 2}, {"r2", 2}};
    const auto gap = anonymity_gap(tensor(tensor(beta, phi), phi), l, "r0", "r1", "r2");
    EXPECT_NEAR(gap.advantage, 0.5, 1e-12);
    EXPECT_NEAR(gap.swap_bot, 0.0, 1e-12);
    EXPECT_NEAR(gap.bound, 0.5, 1e-12);
}

TEST(AnonymityGap, LoadedStateRespectsBound) {
    Rng rng(9);
    const auto s = SecretString::random_indexed(2, rng);
    const auto j = pattern_and_loaded(s);
    const auto gap = anonymity_gap(j.state, j.layout, "bank", "pattern", "token");
    EXPECT_LE(gap.advantage, gap.bound + 1e-9);
    EXPECT_LE(gap.report_advantage, gap.advantage + 1e-9);
    EXPECT_NEAR(gap.swap_bot, 3.0 / 8.0, 1e-12);
    // The bank register pins the token's index, so the bank sees a clear difference.
    EXPECT_GT(gap.advantage, 0.5 + 1e-3);
}

TEST(AnonymityGap, RandomStatesRespectBound) {
    Rng rng(10);
    RegisterLayout l{{"r0", 2}, {"r1", 2}, {"r2", 2}};
    for (int i = 0; i < 100; ++i) {
        const auto gap = anonymity_gap(random_state(6, rng), l, "r0", "r1", "r2");
        EXPECT_LE(gap.advantage, gap.bound + 1e-9);
        EXPECT_LE(gap.report_advantage, gap.advantage + 1e-9);
    }
}
