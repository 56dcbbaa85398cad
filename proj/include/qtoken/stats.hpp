#pragma once

#include <cstdint>
#include <span>

namespace qtoken::stats {

/// Trial count from which normal 3-sigma intervals are used instead of Wilson.
inline constexpr std::uint64_t kNormalIntervalMinTrials = 10'000;
inline constexpr double kSigmas = 3.0;

struct Interval {
    double lo;
    double hi;
    bool contains(double x) const { return lo <= x && x <= hi; }
};

struct Proportion {
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;

    double estimate() const;
    /// Binomial standard error at the estimate.
    double std_error() const;
    /// 3-sigma normal interval for >= 10^4 trials, z=3 Wilson interval below that.
    Interval interval() const;
};

/// Standard error of a binomial proportion with known success probability p.
double binomial_sigma(double p, std::uint64_t trials);

/// |estimate - p| <= 3 * binomial_sigma(p, trials).
bool within_sigmas(const Proportion& observed, double p, double sigmas = kSigmas);

/// Pearson goodness-of-fit p-value of `counts` against the uniform
/// distribution over counts.size() cells.
double chi_squared_uniform_pvalue(std::span<const std::uint64_t> counts);

/// Pearson test of homogeneity for two histograms over the same cells.
double chi_squared_homogeneity_pvalue(std::span<const std::uint64_t> a,
                                      std::span<const std::uint64_t> b);

}  // namespace qtoken::stats
