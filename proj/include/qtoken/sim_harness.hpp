#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <exception>
#include <mutex>
#include <vector>

#include "qtoken/inequalities.hpp"
#include "qtoken/rng.hpp"
#include "qtoken/stats.hpp"

namespace qtoken::sim {

/// Largest k simulated with explicit token states; beyond it reports are emulated.
inline constexpr int kQuantumMaxK = 8;
inline constexpr int kEmulatedMaxK = 20;

struct ScenarioSpec {
    /// honest-flow, adversarial-history, forgery, tracking-audit,
    /// otp-roundtrip, voting or inequality-suite.
    std::string scenario;
    /// Scenario default when unset.
    std::optional<int> k;
    std::uint64_t trials = 10000;
    std::uint64_t seed = 1;
    /// Comma-separated strategy names; empty selects the scenario's default set.
    std::string strategy;
    /// adversarial-history: number of valid pairs in the history (default N_T - 1).
    std::optional<std::uint64_t> history;
    /// Written by run_scenario when non-empty.
    std::filesystem::path out;
    /// Worker threads; 0 means hardware concurrency. Results do not depend on it.
    unsigned threads = 0;
};

class IncompatibleScenario : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Relation {
    Equal,    ///< the interval contains the reference
    AtMost,   ///< the interval reaches down to the reference or below
    AtLeast,  ///< the interval reaches up to the reference or above
    Below,    ///< the whole interval is strictly below the reference
};

std::string to_string(Relation r);

struct MetricRow {
    std::string scenario;
    std::string strategy;
    std::string metric;
    double estimate = 0.0;
    std::uint64_t trials = 0;
    stats::Interval interval{};
    double reference = 0.0;
    Relation relation = Relation::Equal;
    bool pass = false;
    /// The claim this metric checks.
    std::string claim;
};

struct ExperimentResult {
    std::vector<MetricRow> rows;

    bool all_pass() const;
    const MetricRow& row(const std::string& strategy, const std::string& metric) const;
    std::string to_csv() const;
    void write_csv(const std::filesystem::path& path) const;
};

/// Row for a sampled proportion; the interval is 3-sigma normal or Wilson.
MetricRow proportion_row(std::string metric, const stats::Proportion& p, double reference,
                         Relation relation, std::string claim);
/// Row for an exactly computed quantity (zero-width interval).
MetricRow exact_row(std::string metric, double value, std::uint64_t instances, double reference,
                    Relation relation, std::string claim);

/// Runs the scenario against an in-process bank. Throws IncompatibleScenario
/// for an unknown scenario/strategy or an unsupported k.
ExperimentResult run_scenario(const ScenarioSpec& spec);

struct InequalitySizes {
    std::size_t projection = 1000;
    std::size_t swap_chain = 1000;
    std::size_t swap_mixed = 200;
    std::size_t report_indistinguishability = 500;
    std::size_t pattern_chain = 1000;
    /// Random states on which report_chain and report_prime are each sampled once.
    std::size_t pattern_chain_sampled = 10000;
    std::size_t families = 50;
};

ExperimentResult run_inequality_suite(std::uint64_t seed, const InequalitySizes& sizes = {});

/// Runs fn(acc, trial_index, rng) for every trial with rng = trial_rng(seed, trial, stream),
/// splitting the trials into contiguous blocks across threads and merging the
/// per-block accumulators in block order. `init` is an empty accumulator copied
/// into every block.
template <class Acc, class Fn>
Acc run_trials(std::uint64_t trials, std::uint64_t seed, std::uint64_t stream, unsigned threads,
               Acc init, Fn fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(trials, 1)));
    std::vector<Acc> partial(threads, init);
    auto work = [&](unsigned w) {
        const std::uint64_t lo = trials * w / threads;
        const std::uint64_t hi = trials * (w + 1) / threads;
        for (std::uint64_t t = lo; t < hi; ++t) {
            Rng rng = trial_rng(seed, t, stream);
            fn(partial[w], t, rng);
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex failure_mu;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                try {
                    work(w);
                } catch (...) {
                    std::lock_guard lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }
    Acc total = std::move(partial.front());
    for (std::size_t i = 1; i < partial.size(); ++i) total.merge(partial[i]);
    return total;
}

}  // namespace qtoken::sim
