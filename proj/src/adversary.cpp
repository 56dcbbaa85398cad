#include "qtoken/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace qtoken {

namespace {

// Draws an index in [1, space] that is not in `used` and records it.
std::uint32_t fresh_index(std::uint64_t space, std::unordered_set<std::uint32_t>& used, Rng& rng) {
    if (used.size() >= space) throw std::invalid_argument("no unused index left for a guess");
    for (;;) {
        const auto i = static_cast<std::uint32_t>(uniform_below(rng, space)) + 1;
        if (used.insert(i).second) return i;
    }
}

}  // namespace

std::string to_string(GuessPolicy p) {
    switch (p) {
        case GuessPolicy::UniformFreshIndex: return "uniform-fresh-index";
        case GuessPolicy::Replay: return "replay";
        case GuessPolicy::BlockCollision: return "block-collision";
    }
    return "unknown";
}

GuessPolicy guess_policy_from_string(std::string_view name) {
    if (name == "uniform-fresh-index" || name == "uniform") return GuessPolicy::UniformFreshIndex;
    if (name == "replay") return GuessPolicy::Replay;
    if (name == "block-collision") return GuessPolicy::BlockCollision;
    throw std::invalid_argument("unknown guess policy '" + std::string(name) + "'");
}

void ForgerStrategy::validate(const SchemeParams& params, std::size_t tokens_available) const {
    if (q > tokens_available) {
        throw std::invalid_argument("strategy measures " + std::to_string(q) + " tokens but only " +
                                    std::to_string(tokens_available) + " are available");
    }
    if (guess_budget > params.cap_test) {
        throw std::invalid_argument("guess budget exceeds the verification budget");
    }
    if (guess_budget < q) throw std::invalid_argument("guess budget smaller than q");
    if (policy == GuessPolicy::Replay && q == 0) {
        throw std::invalid_argument("replay needs at least one measured token");
    }
}

std::vector<TokenReport> plan_forgery(const SecretString& secret, const ForgerStrategy& strategy,
                                      Rng& rng, TokenSource source) {
    const auto params = SchemeParams::for_k(secret.k());
    strategy.validate(params, params.cap_mint);

    std::vector<TokenReport> measured;
    measured.reserve(strategy.q);
    if (source == TokenSource::Quantum && strategy.q > 0) {
        const auto minted = mint(secret, strategy.q);
        for (const auto& token : minted.tokens) measured.push_back(report(token, rng));
    } else {
        for (std::size_t i = 0; i < strategy.q; ++i) measured.push_back(report_emulated(secret, rng));
    }

    std::vector<TokenReport> submissions = measured;
    std::unordered_set<std::uint32_t> used;
    for (const auto& r : measured) used.insert(r.index);
    const std::uint32_t value_mask = (1u << secret.k()) - 1;

    while (submissions.size() < strategy.guess_budget) {
        switch (strategy.policy) {
            case GuessPolicy::Replay:
                submissions.push_back(measured[submissions.size() % measured.size()]);
                break;
            case GuessPolicy::UniformFreshIndex: {
                const auto i = fresh_index(params.index_space(), used, rng);
                submissions.push_back({i, static_cast<std::uint32_t>(rng()) & value_mask});
                break;
            }
            case GuessPolicy::BlockCollision: {
                const auto i = fresh_index(params.index_space(), used, rng);
                const std::uint32_t v =
                    measured.empty() ? static_cast<std::uint32_t>(rng()) & value_mask
                                     : measured[uniform_below(rng, measured.size())].value;
                submissions.push_back({i, v});
                break;
            }
        }
    }

    return submissions;
}

ForgeryOutcome run_forgery(const SecretString& secret, const ForgerStrategy& strategy, Rng& rng,
                           TokenSource source) {
    const auto submissions = plan_forgery(secret, strategy, rng, source);
    ForgeryOutcome out;
    out.measured = strategy.q;
    out.submitted = submissions.size();
    out.accepted = hamming_weight(btest(secret, submissions));
    return out;
}

double eval_forgery_bound(std::uint64_t n, std::uint64_t q, std::uint64_t y_size) {
    if (y_size == 0) throw std::invalid_argument("|Y| must be at least 1");
    const double v = 5.0 * static_cast<double>(n) * static_cast<double>(q + 1) /
                     static_cast<double>(y_size);
    return std::min(1.0, v);
}

double eval_forgery_bound_6(std::uint64_t n, std::uint64_t q, std::uint64_t y_size) {
    if (y_size == 0) throw std::invalid_argument("|Y| must be at least 1");
    const double v = 6.0 * static_cast<double>(n) * static_cast<double>(q + 1) /
                     static_cast<double>(y_size);
    return std::min(1.0, v);
}

double eval_all_correct_bound(std::uint64_t q, std::uint64_t r, std::uint64_t y_size) {
    if (r <= q) throw std::invalid_argument("need r > q");
    if (y_size == 0) throw std::invalid_argument("|Y| must be at least 1");
    if (y_size == 1) return 1.0;
    const long double y = static_cast<long double>(y_size);
    const long double rr = static_cast<long double>(r);
    const long double log_y = std::log(y);
    const long double log_y1 = std::log(y - 1.0L);
    long double sum = 0.0L;
    for (std::uint64_t i = 0; i <= q; ++i) {
        const long double ii = static_cast<long double>(i);
        const long double log_term = std::lgamma(rr + 1.0L) - std::lgamma(ii + 1.0L) -
                                     std::lgamma(rr - ii + 1.0L) + ii * log_y1 - rr * log_y;
        sum += std::exp(log_term);
    }
    return static_cast<double>(std::min(sum, 1.0L));
}

ForgeryOutcome run_toy_forgery(int index_bits, Rng& rng) {
    if (index_bits < 1 || index_bits > 24) throw std::invalid_argument("index_bits out of range");
    const std::uint64_t space = std::uint64_t{1} << index_bits;
    // One secret bit per index; only the bit at each queried index matters.
    std::unordered_map<std::uint32_t, std::uint32_t> secret;
    auto bit_at = [&](std::uint32_t i) {
        auto [it, inserted] = secret.try_emplace(i, 0u);
        if (inserted) it->second = static_cast<std::uint32_t>(rng() & 1u);
        return it->second;
    };
    const auto measured = static_cast<std::uint32_t>(uniform_below(rng, space));
    std::uint32_t guess;
    do {
        guess = static_cast<std::uint32_t>(uniform_below(rng, space));
    } while (guess == measured);
    const auto guess_bit = static_cast<std::uint32_t>(rng() & 1u);

    ForgeryOutcome out;
    out.measured = 1;
    out.submitted = 2;
    out.accepted = 1 + (bit_at(guess) == guess_bit ? 1 : 0);
    (void)bit_at(measured);
    return out;
}

// ---------------------------------------------------------------------------
// Tracking banks

std::string TrackingBankStrategy::name() const {
    switch (kind) {
        case Kind::Honest: return "honest";
        case Kind::LoadedEntangled: return "loaded_entangled";
        case Kind::PermutationPaired: return "permutation_paired";
    }
    return "unknown";
}

TrackingBankStrategy TrackingBankStrategy::from_name(std::string_view name) {
    if (name == "honest") return {Kind::Honest, {}};
    if (name == "loaded_entangled" || name == "loaded-entangled" || name == "loaded") return {Kind::LoadedEntangled, {}};
    if (name == "permutation_paired" || name == "permutation-paired" || name == "paired") return {Kind::PermutationPaired, {}};
    throw std::invalid_argument("unknown tracking bank strategy '" + std::string(name) + "'");
}

AdversarialMint mint_loaded(const SecretString& secret) {
    if (!secret.indexed()) throw std::invalid_argument("loaded mint needs an indexed secret");
    const int k = secret.k();
    const double amp = 1.0 / std::sqrt(std::ldexp(1.0, k));
    std::vector<SparseState::Entry> entries;
    entries.reserve(secret.num_blocks());
    for (std::uint64_t i = 0; i < secret.num_blocks(); ++i) {
        const std::uint64_t token = (i << k) | secret.blocks()[i];
        entries.push_back({(i << (2 * k)) | token, Amplitude{amp, 0.0}});
    }
    RegisterLayout layout{{"bank", k}, {"token", 2 * k}};
    return {SparseState::from_entries(3 * k, std::move(entries)), std::move(layout)};
}

AdversarialMint mint_permutation_paired(const SecretString& secret,
                                        std::span<const std::uint32_t> h) {
    if (!secret.indexed()) throw std::invalid_argument("paired mint needs an indexed secret");
    const std::uint64_t space = secret.num_blocks();
    if (h.size() != space) throw std::invalid_argument("permutation has the wrong size");
    std::vector<bool> seen(space, false);
    for (auto v : h) {
        if (v >= space || seen[v]) throw std::invalid_argument("h is not a bijection");
        seen[v] = true;
    }
    const int k = secret.k();
    const double amp = 1.0 / std::sqrt(std::ldexp(1.0, k));
    std::vector<SparseState::Entry> entries;
    entries.reserve(space);
    for (std::uint64_t i = 0; i < space; ++i) {
        const std::uint64_t first = (i << k) | secret.blocks()[i];
        const std::uint64_t j = h[i];
        const std::uint64_t second = (j << k) | secret.blocks()[j];
        entries.push_back({(first << (2 * k)) | second, Amplitude{amp, 0.0}});
    }
    RegisterLayout layout{{"token1", 2 * k}, {"token2", 2 * k}};
    return {SparseState::from_entries(4 * k, std::move(entries)), std::move(layout)};
}

std::vector<std::uint32_t> random_permutation(std::uint32_t size, Rng& rng) {
    std::vector<std::uint32_t> p(size);
    for (std::uint32_t i = 0; i < size; ++i) p[i] = i;
    for (std::uint32_t i = size; i > 1; --i) {
        std::swap(p[i - 1], p[uniform_below(rng, i)]);
    }
    return p;
}

bool trace_loaded(const SparseState& retained, const RegisterLayout& layout,
                  const TokenReport& message, Rng& rng) {
    const auto m = measure_register(retained, layout, "bank", rng);
    return m.value + 1 == message.index;
}

std::vector<std::pair<std::size_t, std::size_t>> trace_permutation_pairs(
    const SecretString& secret, std::span<const std::uint32_t> h,
    std::span<const TokenReport> history) {
    std::unordered_multimap<std::uint32_t, std::size_t> by_index;
    for (std::size_t pos = 0; pos < history.size(); ++pos) {
        const auto& r = history[pos];
        if (r.index >= 1 && r.index <= secret.num_blocks() && secret.block(r.index) == r.value) {
            by_index.emplace(r.index, pos);
        }
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < history.size(); ++a) {
        const auto& r = history[a];
        if (!by_index.contains(r.index)) continue;
        if (secret.block(r.index) != r.value) continue;
        const std::uint32_t partner = h[r.index - 1] + 1;
        auto [lo, hi] = by_index.equal_range(partner);
        for (auto it = lo; it != hi; ++it) {
            if (it->second != a) pairs.emplace_back(a, it->second);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

}  // namespace qtoken
