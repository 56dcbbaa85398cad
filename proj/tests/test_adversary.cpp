#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "qtoken/adversary.hpp"
#include "qtoken/density.hpp"
#include "qtoken/stats.hpp"

using namespace qtoken;

namespace {

// |Y|^{-r} sum_{i<=q} C(r,i) (|Y|-1)^i with exact integer arithmetic (small inputs only).
double all_correct_reference(unsigned q, unsigned r, unsigned y) {
    long double num = 0;
    for (unsigned i = 0; i <= q; ++i) {
        long double c = 1;
        for (unsigned j = 0; j < i; ++j) c = c * (r - j) / (j + 1);
        num += c * std::pow(static_cast<long double>(y - 1), i);
    }
    return static_cast<double>(num / std::pow(static_cast<long double>(y), r));
}

}  // namespace

TEST(Bounds, ForgeryBoundValues) {
    EXPECT_DOUBLE_EQ(eval_forgery_bound(256, 1, 65536), 0.0390625);
    EXPECT_DOUBLE_EQ(eval_forgery_bound(256, 0, 65536), 5.0 * 256 / 65536);
    EXPECT_DOUBLE_EQ(eval_forgery_bound(256, 100, 65536), 1.0);
    // Constant 6 with N = N_T and q + 1 = 2^{k/4} gives eps_f = 6 * 2^{-k/4}.
    EXPECT_DOUBLE_EQ(eval_forgery_bound_6(256, 15, 65536), SchemeParams::for_k(16).eps_f);
    EXPECT_DOUBLE_EQ(eval_forgery_bound_6(256, 15, 65536), 0.375);
}

TEST(Bounds, AllCorrectBound) {
    EXPECT_DOUBLE_EQ(eval_all_correct_bound(0, 1, 1000), 1.0 / 1000.0);
    EXPECT_NEAR(eval_all_correct_bound(1, 2, 4), 7.0 / 16.0, 1e-15);
    EXPECT_THROW(eval_all_correct_bound(2, 2, 4), std::invalid_argument);
    for (unsigned q = 0; q < 4; ++q) {
        for (unsigned r = q + 1; r < q + 5; ++r) {
            for (unsigned y : {2u, 3u, 7u, 16u, 100u}) {
                EXPECT_NEAR(eval_all_correct_bound(q, r, y), all_correct_reference(q, r, y), 1e-12);
            }
        }
    }
}

TEST(Bounds, AllCorrectBoundIsNonincreasingInY) {
    for (std::uint64_t q = 0; q < 5; ++q) {
        for (std::uint64_t r = q + 1; r < q + 6; ++r) {
            double prev = 1.0;
            for (std::uint64_t y = 2; y < 5000; y = y * 3 / 2 + 1) {
                const double v = eval_all_correct_bound(q, r, y);
                EXPECT_LE(v, prev + 1e-15);
                prev = v;
            }
            // Large |Y| stays finite and small.
            EXPECT_LT(eval_all_correct_bound(q, r, std::uint64_t{1} << 40), 1e-10);
        }
    }
}

TEST(Forgery, StrategyValidation) {
    const auto p = SchemeParams::for_k(8);  // N_M = 3, N_T = 16
    EXPECT_THROW((ForgerStrategy{"x", 4, 16, GuessPolicy::UniformFreshIndex}.validate(p, p.cap_mint)),
                 std::invalid_argument);
    EXPECT_THROW((ForgerStrategy{"x", 1, 17, GuessPolicy::UniformFreshIndex}.validate(p, p.cap_mint)),
                 std::invalid_argument);
    EXPECT_THROW((ForgerStrategy{"x", 0, 16, GuessPolicy::Replay}.validate(p, p.cap_mint)),
                 std::invalid_argument);
    EXPECT_NO_THROW((ForgerStrategy{"x", 3, 16, GuessPolicy::BlockCollision}.validate(p, p.cap_mint)));
    EXPECT_EQ(guess_policy_from_string(to_string(GuessPolicy::BlockCollision)), GuessPolicy::BlockCollision);
}

TEST(Forgery, ReplayNeverWins) {
    Rng rng(1);
    const ForgerStrategy replay{"replay", 1, 16, GuessPolicy::Replay};
    for (int i = 0; i < 500; ++i) {
        const auto s = SecretString::random_indexed(8, rng);
        const auto out = run_forgery(s, replay, rng, TokenSource::Quantum);
        EXPECT_EQ(out.accepted, 1u);
        EXPECT_FALSE(out.win());
    }
}

TEST(Forgery, PlanStartsWithMeasuredPairsAndUsesFreshIndices) {
    Rng rng(2);
    const auto s = SecretString::random_indexed(8, rng);
    const ForgerStrategy st{"m", 2, 16, GuessPolicy::UniformFreshIndex};
    const auto plan = plan_forgery(s, st, rng);
    ASSERT_EQ(plan.size(), 16u);
    for (int i = 0; i < 2; ++i) EXPECT_EQ(s.block(plan[i].index), plan[i].value);
    std::vector<std::uint32_t> idx;
    for (std::size_t i = 2; i < plan.size(); ++i) idx.push_back(plan[i].index);
    std::sort(idx.begin(), idx.end());
    EXPECT_EQ(std::adjacent_find(idx.begin(), idx.end()), idx.end());
}

TEST(Forgery, UniformGuessingMatchesUnionFormulaAtK8) {
    // k = 8: N_T = 16 guesses, win iff one hits: 1 - (255/256)^16.
    Rng rng(3);
    const ForgerStrategy st{"u", 0, 16, GuessPolicy::UniformFreshIndex};
    const std::uint64_t n = 20000;
    std::uint64_t wins = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        wins += run_forgery(SecretString::random_indexed(8, rng), st, rng).win();
    }
    EXPECT_TRUE(stats::within_sigmas({wins, n}, 1.0 - std::pow(255.0 / 256.0, 16)));
}

TEST(Forgery, ToySchemeWinsAboutHalf) {
    Rng rng(4);
    const std::uint64_t n = 20000;
    std::uint64_t wins = 0;
    for (std::uint64_t i = 0; i < n; ++i) wins += run_toy_forgery(8, rng).win();
    EXPECT_TRUE(stats::within_sigmas({wins, n}, 0.5));
}

TEST(Tracking, StrategyNames) {
    for (auto kind : {TrackingBankStrategy::Kind::Honest, TrackingBankStrategy::Kind::LoadedEntangled,
                      TrackingBankStrategy::Kind::PermutationPaired}) {
        TrackingBankStrategy s{kind, {}};
        EXPECT_EQ(TrackingBankStrategy::from_name(s.name()).kind, kind);
    }
    EXPECT_THROW(TrackingBankStrategy::from_name("nope"), std::invalid_argument);
}

TEST(Loaded, TokenMarginalIsUniformMixtureOverValidPairs) {
    Rng rng(5);
    const auto s = SecretString::random_indexed(4, rng);
    const auto m = mint_loaded(s);
    const auto rho = reduced_density(m.joint, m.layout, {"token"});
    const auto ev = rho.eigenvalues();
    int nonzero = 0;
    for (int i = 0; i < ev.size(); ++i) {
        if (ev[i] > 1e-9) {
            ++nonzero;
            EXPECT_NEAR(ev[i], 1.0 / 16.0, 1e-12);
        }
    }
    EXPECT_EQ(nonzero, 16);
    for (std::uint32_t i = 1; i <= 16; ++i) {
        const std::uint64_t diag = ((i - 1u) << 4) | s.block(i);
        EXPECT_NEAR(rho.entries()(diag, diag).real(), 1.0 / 16.0, 1e-12);
    }
}

TEST(Loaded, BankTracesItsTokenAndRarelyOthers) {
    Rng rng(6);
    const auto s = SecretString::random_indexed(4, rng);
    const auto m = mint_loaded(s);
    const auto honest = token_state(s);
    std::vector<std::uint64_t> counts(16, 0);
    const std::uint64_t n = 20000;
    std::uint64_t false_flags = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto mt = measure_register(m.joint, m.layout, "token", rng);
        const auto r = report_from_basis_index(4, mt.value);
        ASSERT_EQ(s.block(r.index), r.value);
        ASSERT_TRUE(trace_loaded(mt.post_state, m.layout, r, rng));
        ++counts[r.index - 1];
        // An unrelated honest user's message against the untouched loaded state.
        false_flags += trace_loaded(m.joint, m.layout, report(honest, rng), rng);
    }
    EXPECT_GT(stats::chi_squared_uniform_pvalue(counts), 0.001);
    EXPECT_TRUE(stats::within_sigmas({false_flags, n}, 1.0 / 16.0));
}

TEST(PermutationPaired, ReportsArePairedThroughH) {
    Rng rng(7);
    const auto s = SecretString::random_indexed(4, rng);
    const auto h = random_permutation(16, rng);
    const auto m = mint_permutation_paired(s, h);
    std::vector<std::uint64_t> c1(16, 0), c2(16, 0);
    for (int i = 0; i < 20000; ++i) {
        const auto a = measure_register(m.joint, m.layout, "token1", rng);
        const auto b = measure_register(a.post_state, m.layout, "token2", rng);
        const auto r1 = report_from_basis_index(4, a.value), r2 = report_from_basis_index(4, b.value);
        ASSERT_EQ(s.block(r1.index), r1.value);
        ASSERT_EQ(s.block(r2.index), r2.value);
        ASSERT_EQ(r2.index, h[r1.index - 1] + 1);
        ++c1[r1.index - 1];
        ++c2[r2.index - 1];
        const std::vector<TokenReport> hist{r1, r2};
        const auto pairs = trace_permutation_pairs(s, h, hist);
        ASSERT_FALSE(pairs.empty());
        EXPECT_EQ(pairs.front(), (std::pair<std::size_t, std::size_t>{0, 1}));
    }
    EXPECT_GT(stats::chi_squared_uniform_pvalue(c1), 0.001);
    EXPECT_GT(stats::chi_squared_uniform_pvalue(c2), 0.001);
}

TEST(PermutationPaired, IdentityPairsShareIndex) {
    Rng rng(8);
    const auto s = SecretString::random_indexed(4, rng);
    std::vector<std::uint32_t> id(16);
    std::iota(id.begin(), id.end(), 0u);
    const auto m = mint_permutation_paired(s, id);
    for (int i = 0; i < 100; ++i) {
        const auto a = measure_register(m.joint, m.layout, "token1", rng);
        const auto b = measure_register(a.post_state, m.layout, "token2", rng);
        EXPECT_EQ(a.value, b.value);
    }
}

TEST(PermutationPaired, SwapExchangesRoles) {
    Rng rng(9);
    const auto s = SecretString::random_indexed(4, rng);
    const auto h = random_permutation(16, rng);
    std::vector<std::uint32_t> inv(16);
    for (std::uint32_t i = 0; i < 16; ++i) inv[h[i]] = i;
    const auto m = mint_permutation_paired(s, h);
    const auto swapped = apply_register_swap(m.joint, m.layout, "token1", "token2");
    const auto expected = mint_permutation_paired(s, inv).joint;
    ASSERT_EQ(swapped.nonzeros(), expected.nonzeros());
    for (std::size_t i = 0; i < swapped.nonzeros(); ++i) {
        EXPECT_EQ(swapped.entries()[i].index, expected.entries()[i].index);
        EXPECT_NEAR(std::abs(swapped.entries()[i].amplitude - expected.entries()[i].amplitude), 0.0, 1e-15);
    }
}

TEST(PermutationPaired, RejectsNonBijection) {
    Rng rng(10);
    const auto s = SecretString::random_indexed(4, rng);
    std::vector<std::uint32_t> h(16, 0);
    EXPECT_THROW(mint_permutation_paired(s, h), std::invalid_argument);
    EXPECT_THROW(mint_permutation_paired(s, std::vector<std::uint32_t>(15)), std::invalid_argument);
}

TEST(PermutationPaired, FalsePairRateAmongUnrelatedHonestMessagesAtK8) {
    // N_T = 16 unrelated honest messages: each ordered pair is falsely linked
    // iff the second index equals h(first), probability 2^{-8}.
    Rng rng(11);
    const auto s = SecretString::random_indexed(8, rng);
    const auto h = random_permutation(256, rng);
    const int histories = 2000;
    std::uint64_t false_pairs = 0, ordered_pairs = 0;
    for (int t = 0; t < histories; ++t) {
        std::vector<TokenReport> hist;
        for (int i = 0; i < 16; ++i) hist.push_back(report_emulated(s, rng));
        false_pairs += trace_permutation_pairs(s, h, hist).size();
        ordered_pairs += 16 * 15;
    }
    EXPECT_TRUE(stats::within_sigmas({false_pairs, ordered_pairs}, 1.0 / 256.0));
}
