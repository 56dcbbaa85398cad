#include "qtoken/stats.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace qtoken::stats {

namespace {

double upper_tail(double statistic, double dof) {
    if (dof < 1) return 1.0;
    boost::math::chi_squared_distribution<double> dist(dof);
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

}  // namespace

double Proportion::estimate() const {
    return trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials);
}

double Proportion::std_error() const { return binomial_sigma(estimate(), trials); }

Interval Proportion::interval() const {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = estimate();
    if (trials >= kNormalIntervalMinTrials) {
        const double half = kSigmas * std::sqrt(p * (1.0 - p) / n);
        return {std::max(0.0, p - half), std::min(1.0, p + half)};
    }
    const double z2 = kSigmas * kSigmas;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = kSigmas * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    // The exact endpoints at 0 and n successes are 0 and 1 respectively.
    const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
    const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

double binomial_sigma(double p, std::uint64_t trials) {
    if (trials == 0) return 1.0;
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

bool within_sigmas(const Proportion& observed, double p, double sigmas) {
    return std::abs(observed.estimate() - p) <= sigmas * binomial_sigma(p, observed.trials);
}

double chi_squared_uniform_pvalue(std::span<const std::uint64_t> counts) {
    if (counts.size() < 2) throw std::invalid_argument("need at least two cells");
    double total = 0.0;
    for (auto c : counts) total += static_cast<double>(c);
    if (total == 0.0) throw std::invalid_argument("no observations");
    const double expected = total / static_cast<double>(counts.size());
    double stat = 0.0;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    return upper_tail(stat, static_cast<double>(counts.size() - 1));
}

double chi_squared_homogeneity_pvalue(std::span<const std::uint64_t> a,
                                      std::span<const std::uint64_t> b) {
    if (a.size() != b.size()) throw std::invalid_argument("histograms differ in size");
    double na = 0.0, nb = 0.0;
    for (auto c : a) na += static_cast<double>(c);
    for (auto c : b) nb += static_cast<double>(c);
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("empty histogram");
    const double n = na + nb;
    double stat = 0.0;
    int used = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double col = static_cast<double>(a[i] + b[i]);
        if (col == 0.0) continue;
        ++used;
        const double ea = na * col / n;
        const double eb = nb * col / n;
        stat += std::pow(static_cast<double>(a[i]) - ea, 2) / ea;
        stat += std::pow(static_cast<double>(b[i]) - eb, 2) / eb;
    }
    return upper_tail(stat, static_cast<double>(used - 1));
}

}  // namespace qtoken::stats
