#include <gtest/gtest.h>

#include <cmath>

#include "qtoken/stats.hpp"
#include "qtoken/token_scheme.hpp"

using namespace qtoken;

namespace {

SecretString secret_with_block3(std::uint32_t v) {
    std::vector<std::uint32_t> blocks(16, 0);
    blocks[2] = v;  // F_S(3)
    return SecretString(4, blocks);
}

}  // namespace

TEST(Params, QuantumSchemeAtK16) {
    const auto p = SchemeParams::for_k(16);
    EXPECT_EQ(p.n, 32);
    EXPECT_EQ(p.m, 16u * 65536u);
    EXPECT_EQ(p.cap_mint, 15u);
    EXPECT_EQ(p.cap_test, 256u);
    EXPECT_EQ(p.t, 32);
    EXPECT_DOUBLE_EQ(p.eps_l, 1.0 / 256.0);
    EXPECT_DOUBLE_EQ(p.eps_f, 0.375);
    EXPECT_EQ(p.index_space(), 65536u);
}

TEST(Params, ClassicalSchemeAtK8) {
    const auto p = ClassicalParams::for_k(8);
    EXPECT_EQ(p.cap_mint, 4u);
    EXPECT_EQ(p.m, 32u);
    EXPECT_EQ(p.cap_test, 16u);
    EXPECT_EQ(p.t, 8);
    EXPECT_DOUBLE_EQ(p.eps_l, 1.0 / 16.0);
    EXPECT_DOUBLE_EQ(p.eps_f, 0.25);
}

TEST(Params, RejectsKNotDivisibleByFour) {
    EXPECT_THROW(SchemeParams::for_k(6), std::invalid_argument);
    EXPECT_THROW(SchemeParams::for_k(0), std::invalid_argument);
    EXPECT_THROW(ClassicalParams::for_k(2), std::invalid_argument);
}

TEST(Secret, BitsHexAndBlocksAgree) {
    Rng rng(1);
    const auto s = SecretString::random_indexed(4, rng, "a");
    EXPECT_EQ(SecretString::from_bits(4, s.bits()), s);
    EXPECT_EQ(SecretString::from_hex(4, 16, s.to_hex()), s);
    EXPECT_EQ(s.length_bits(), 64u);
    // Block I holds bits k(I-1)+1 .. kI, most significant first.
    const auto bits = s.bits();
    std::uint32_t b2 = 0;
    for (int i = 4; i < 8; ++i) b2 = (b2 << 1) | (bits[i] ? 1u : 0u);
    EXPECT_EQ(s.block(2), b2);
    EXPECT_THROW(s.block(0), std::out_of_range);
    EXPECT_THROW(s.block(17), std::out_of_range);
    EXPECT_THROW(SecretString(4, {16}), std::invalid_argument);
}

TEST(Secret, RandomBlocksAreUniform) {
    Rng rng(2);
    std::vector<std::uint64_t> counts(16, 0);
    for (int t = 0; t < 200; ++t) {
        const auto s = SecretString::random_indexed(4, rng);
        for (auto b : s.blocks()) ++counts[b];
    }
    EXPECT_GT(stats::chi_squared_uniform_pvalue(counts), 0.001);
}

TEST(TokenReport, WireForm) {
    const TokenReport r{3, 0b1010};
    EXPECT_EQ(r.to_bits(4), (2u << 4) | 0b1010u);
    EXPECT_EQ(r.to_hex(4), "2a");
    EXPECT_EQ(TokenReport::from_hex(4, "2a"), r);
    EXPECT_EQ(TokenReport::from_bits(4, r.to_bits(4)), r);
}

TEST(Token, AmplitudesAndSupport) {
    Rng rng(3);
    const auto s = SecretString::random_indexed(4, rng);
    const auto tok = token_state(s);
    EXPECT_EQ(tok.num_qubits(), 8);
    ASSERT_EQ(tok.nonzeros(), 16u);
    for (const auto& e : tok.entries()) {
        EXPECT_NEAR(e.amplitude.real(), 0.25, 1e-15);
        const auto i = e.index >> 4;
        EXPECT_EQ(e.index & 0xf, s.block(i + 1));
    }
}

TEST(Token, ProductOfTwoTokensAtK2) {
    Rng rng(4);
    const auto s = SecretString::random_indexed(2, rng);
    const auto pair = tensor(token_state(s), token_state(s));
    ASSERT_EQ(pair.nonzeros(), 16u);
    for (const auto& e : pair.entries()) EXPECT_NEAR(e.amplitude.real(), 0.25, 1e-15);
}

TEST(Token, MintedTokensOfOneSeriesAreIdentical) {
    Rng rng(5);
    const auto s = SecretString::random_indexed(4, rng);
    EXPECT_FALSE(mint(s, 1).exceeds_cap);  // cap is 2^{k/4} - 1 = 1 at k = 4
    const auto minted = mint(s, 3);
    ASSERT_EQ(minted.tokens.size(), 3u);
    EXPECT_TRUE(minted.exceeds_cap);
    EXPECT_NEAR(std::abs(inner_product(minted.tokens[0], minted.tokens[2])), 1.0, 1e-12);
    Rng rng8(55);
    EXPECT_FALSE(mint(SecretString::random_indexed(8, rng8), 3).exceeds_cap);
    EXPECT_THROW(mint(s, 0), std::invalid_argument);
}

TEST(Token, OverlapOfSecretsDifferingInOneBlock) {
    Rng rng(6);
    for (int k : {2, 4, 6}) {
        const auto s = SecretString::random_indexed(k, rng);
        std::vector<std::uint32_t> blocks(s.blocks().begin(), s.blocks().end());
        blocks[1] ^= 1u;
        const SecretString s2(k, blocks);
        EXPECT_NEAR(inner_product(token_state(s), token_state(s2)).real(), 1.0 - std::ldexp(1.0, -k),
                    1e-12);
    }
}

TEST(Token, AllZeroSecretReportsZeroValue) {
    Rng rng(7);
    const SecretString zero(4, std::vector<std::uint32_t>(16, 0));
    const auto tok = token_state(zero);
    for (int i = 0; i < 200; ++i) EXPECT_EQ(report(tok, rng).value, 0u);
}

TEST(Report, BasisTokenIsDeterministic) {
    Rng rng(8);
    const auto tok = SparseState::basis(8, (5u << 4) | 9u);
    const auto r = report(tok, rng);
    EXPECT_EQ(r.index, 6u);
    EXPECT_EQ(r.value, 9u);
    EXPECT_EQ(report_from_basis_index(4, (5u << 4) | 9u), r);
}

TEST(Report, HonestReportsAreValidAndUniform) {
    Rng rng(9);
    const auto s = SecretString::random_indexed(4, rng);
    const auto tok = token_state(s);
    std::vector<std::uint64_t> counts(16, 0);
    const int n = 100000;
    int valid = 0;
    for (int i = 0; i < n; ++i) {
        const auto r = report(tok, rng);
        valid += s.block(r.index) == r.value;
        ++counts[r.index - 1];
    }
    EXPECT_EQ(valid, n);
    EXPECT_GT(stats::chi_squared_uniform_pvalue(counts), 0.001);
}

TEST(Report, EmulatedMatchesQuantumDistribution) {
    Rng rng(10);
    const auto s = SecretString::random_indexed(4, rng);
    const auto tok = token_state(s);
    std::vector<std::uint64_t> q(16, 0), e(16, 0);
    for (int i = 0; i < 100000; ++i) {
        ++q[report(tok, rng).index - 1];
        const auto r = report_emulated(s, rng);
        ASSERT_EQ(s.block(r.index), r.value);
        ++e[r.index - 1];
    }
    EXPECT_GT(stats::chi_squared_homogeneity_pvalue(q, e), 0.001);
}

TEST(Report, EmulatedIsSeededAndValidAtK16) {
    Rng seed_rng(11);
    const auto s = SecretString::random_indexed(16, seed_rng);
    Rng a(99), b(99);
    const auto ra = report_emulated(s, a);
    EXPECT_EQ(ra, report_emulated(s, b));
    EXPECT_TRUE(test(s, VerificationHistory{}, ra));
}

TEST(Test, Examples) {
    const auto s = secret_with_block3(0b1010);
    VerificationHistory h;
    EXPECT_TRUE(test(s, h, {3, 0b1010}));
    EXPECT_FALSE(test(s, h, {3, 0b1011}));
    h.append({3, 0b1010});
    EXPECT_FALSE(test(s, h, {3, 0b1010}));
    EXPECT_FALSE(test(s, h, {17, 0}));
    EXPECT_FALSE(test(s, h, {0, 0}));
}

TEST(Classical, MintReportAndTest) {
    // k = 4: two blocks 0000 1111.
    const SecretString s(4, {0b0000, 0b1111});
    const auto tokens = mint_classical(s);
    ASSERT_EQ(tokens.size(), ClassicalParams::for_k(4).cap_mint);
    EXPECT_EQ(tokens[0], 0b0000u);
    EXPECT_EQ(tokens[1], 0b1111u);
    std::vector<std::uint32_t> h;
    EXPECT_TRUE(test_classical(s, h, tokens[0]));
    h.push_back(tokens[0]);
    EXPECT_FALSE(test_classical(s, h, tokens[0]));
    EXPECT_FALSE(test_classical(s, h, 0b0101));
    EXPECT_THROW(mint_classical(SecretString(4, {1, 2, 3})), std::invalid_argument);
}

TEST(BTest, Examples) {
    Rng rng(12);
    const auto s = SecretString::random_indexed(8, rng);
    std::vector<TokenReport> fresh;
    for (std::uint32_t i = 1; i <= 10; ++i) fresh.push_back({i, s.block(i)});
    EXPECT_EQ(btest(s, fresh), std::vector<bool>(10, true));

    const std::vector<TokenReport> twice{{5, s.block(5)}, {5, s.block(5)}};
    EXPECT_EQ(btest(s, twice), (std::vector<bool>{true, false}));

    std::vector<TokenReport> bad;
    for (std::uint32_t i = 1; i <= 5; ++i) bad.push_back({i, s.block(i) ^ 1u});
    EXPECT_EQ(hamming_weight(btest(s, bad)), 0u);

    std::vector<TokenReport> too_many(17, {1, s.block(1)});
    EXPECT_THROW(btest(s, too_many), std::length_error);
}
