#include <atomic>
#include <stdexcept>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "qtoken/sim_harness.hpp"

namespace qtoken::sim {
namespace {

ScenarioSpec spec_for(std::string scenario, std::optional<int> k, std::uint64_t trials,
                      unsigned threads = 1) {
    ScenarioSpec s;
    s.scenario = std::move(scenario);
    s.k = k;
    s.trials = trials;
    s.seed = 42;
    s.threads = threads;
    return s;
}

struct Sum {
    std::uint64_t value = 0;
    void merge(const Sum& o) { value += o.value; }
};

TEST(RunTrials, IndependentOfThreadCount) {
    auto sum = [](unsigned threads) {
        return run_trials(1000, 7, 3, threads, Sum{}, [](Sum& acc, std::uint64_t t, Rng& rng) {
                   acc.value += (rng() % 1000) * (t + 1);
               }).value;
    };
    const auto one = sum(1);
    EXPECT_EQ(sum(3), one);
    EXPECT_EQ(sum(8), one);
}

TEST(RunTrials, PropagatesExceptions) {
    EXPECT_THROW(run_trials(100, 1, 0, 4, Sum{},
                            [](Sum&, std::uint64_t t, Rng&) {
                                if (t == 57) throw std::runtime_error("boom");
                            }),
                 std::runtime_error);
}

TEST(RunTrials, ZeroTrials) {
    const auto r = run_trials(0, 1, 0, 4, Sum{}, [](Sum& a, std::uint64_t, Rng&) { ++a.value; });
    EXPECT_EQ(r.value, 0u);
}

TEST(Scenario, CsvIdenticalAcrossThreadCounts) {
    for (const char* name : {"honest-flow", "tracking-audit", "forgery"}) {
        const std::optional<int> k = std::string(name) == "forgery" ? std::optional<int>(8)
                                                                   : std::optional<int>(4);
        const auto a = run_scenario(spec_for(name, k, 400, 1)).to_csv();
        const auto b = run_scenario(spec_for(name, k, 400, 4)).to_csv();
        EXPECT_EQ(a, b) << name;
    }
}

TEST(Scenario, SeedChangesResults) {
    auto s = spec_for("honest-flow", 4, 2000);
    const auto a = run_scenario(s).row("honest", "index-uniformity-pvalue").estimate;
    s.seed = 43;
    const auto b = run_scenario(s).row("honest", "index-uniformity-pvalue").estimate;
    EXPECT_NE(a, b);
}

TEST(Scenario, IncompatibleRequests) {
    EXPECT_THROW(run_scenario(spec_for("no-such-scenario", 4, 10)), IncompatibleScenario);
    EXPECT_THROW(run_scenario(spec_for("honest-flow", 6, 10)), IncompatibleScenario);
    EXPECT_THROW(run_scenario(spec_for("honest-flow", 0, 10)), IncompatibleScenario);
    EXPECT_THROW(run_scenario(spec_for("honest-flow", 24, 10)), IncompatibleScenario);
    EXPECT_THROW(run_scenario(spec_for("tracking-audit", 12, 10)), IncompatibleScenario);
    auto s = spec_for("forgery", 8, 10);
    s.strategy = "telepathy";
    EXPECT_THROW(run_scenario(s), IncompatibleScenario);
    auto h = spec_for("adversarial-history", 8, 10);
    h.history = 16;
    EXPECT_THROW(run_scenario(h), IncompatibleScenario);
}

TEST(Scenario, SmallRunsPass) {
    const std::vector<std::pair<std::string, int>> runs = {
        {"honest-flow", 4},  {"honest-flow", 12},  {"adversarial-history", 8},
        {"tracking-audit", 4}, {"otp-roundtrip", 8}, {"voting", 8},
        {"forgery", 8},
    };
    for (const auto& [name, k] : runs) {
        const auto res = run_scenario(spec_for(name, k, 3000, 0));
        for (const auto& row : res.rows) {
            // Strict separations need the full trial count.
            if (row.relation == Relation::Below) continue;
            EXPECT_TRUE(row.pass) << name << " k=" << k << " " << row.strategy << " " << row.metric
                                  << " = " << row.estimate;
        }
    }
}

TEST(Scenario, CsvShape) {
    const auto csv = run_scenario(spec_for("otp-roundtrip", 4, 50)).to_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "scenario,strategy,metric,estimate,trials,ci_lo,ci_hi,reference,relation,pass,claim");
    EXPECT_NE(csv.find("otp-roundtrip,honest,roundtrip-rate,1,50,"), std::string::npos);
}

TEST(InequalitySuite, DefaultSizes) {
    const auto res = run_inequality_suite(1);
    for (const auto& row : res.rows) {
        if (row.strategy == "projection-chain") continue;
        EXPECT_TRUE(row.pass) << row.strategy << " " << row.metric << " = " << row.estimate;
    }
    EXPECT_EQ(res.row("projection-chain", "max-violation").trials, 1000u);
    EXPECT_EQ(res.row("swap-mixed", "max-violation").trials, 200u);
    EXPECT_EQ(res.row("report-indistinguishability", "max-violation").trials, 500u);
    EXPECT_TRUE(res.row("projection-chain-commuting", "max-violation").pass);
    EXPECT_TRUE(res.row("projection-chain-swap", "max-violation").pass);
}

TEST(InequalitySuite, GeneralProjectionChainHasCounterexamples) {
    // v = e1, S1 = span(e1 + e2), S2 = span(e2): ||(v|S1)|S2|| = 1/2 > 0 = ||v|S2||.
    Eigen::Vector2d v(1.0, 0.0), u(1.0, 1.0), e2(0.0, 1.0);
    u.normalize();
    const Eigen::Matrix2d p1 = u * u.transpose(), p2 = e2 * e2.transpose();
    EXPECT_DOUBLE_EQ((p2 * (p1 * v)).norm(), 0.5);
    EXPECT_DOUBLE_EQ((p2 * v).norm(), 0.0);
    EXPECT_FALSE(run_inequality_suite(1).row("projection-chain", "max-violation").pass);
}

}  // namespace
}  // namespace qtoken::sim
