#include "scenarios.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "qtoken/adversary.hpp"
#include "qtoken/audit.hpp"
#include "qtoken/bank_service.hpp"
#include "qtoken/hex.hpp"
#include "qtoken/token_scheme.hpp"

namespace qtoken::sim::detail {
namespace {

constexpr const char* kSeries = "s";

TokenReport honest_report(const SecretString& secret, Rng& rng) {
    if (secret.k() <= kQuantumMaxK) return report(token_state(secret), rng);
    return report_emulated(secret, rng);
}

// Index histograms are only tested when every cell expects >= 5 hits.
bool histogram_testable(int k, std::uint64_t trials) {
    return k <= 16 && trials >= 5 * (std::uint64_t{1} << k);
}

struct Histogram {
    std::vector<std::uint64_t> cells;
    void add(std::size_t cell) {
        if (cell < cells.size()) ++cells[cell];
    }
    void merge(const Histogram& o) {
        for (std::size_t i = 0; i < cells.size(); ++i) cells[i] += o.cells[i];
    }
};

Histogram index_histogram(int k, std::uint64_t trials) {
    return Histogram{std::vector<std::uint64_t>(histogram_testable(k, trials) ? (std::size_t{1} << k) : 0)};
}

void add_uniformity_row(ExperimentResult& res, const std::string& scenario,
                        const std::string& strategy, const std::string& metric,
                        const Histogram& h, std::uint64_t trials, std::string claim) {
    if (h.cells.empty()) return;
    auto row = exact_row(metric, stats::chi_squared_uniform_pvalue(h.cells), trials, 0.001,
                         Relation::AtLeast, std::move(claim));
    row.scenario = scenario;
    row.strategy = strategy;
    res.rows.push_back(std::move(row));
}

void push(ExperimentResult& res, const std::string& scenario, const std::string& strategy,
          MetricRow row) {
    row.scenario = scenario;
    row.strategy = strategy;
    res.rows.push_back(std::move(row));
}

stats::Proportion prop(std::uint64_t s, std::uint64_t n) { return {s, n}; }

std::uint32_t fresh_index(std::uint64_t space, std::unordered_set<std::uint32_t>& used, Rng& rng) {
    for (;;) {
        const auto i = static_cast<std::uint32_t>(1 + uniform_below(rng, space));
        if (used.insert(i).second) return i;
    }
}

}  // namespace

std::vector<std::string> split_strategies(const std::string& list) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// ---------------------------------------------------------------------------

ExperimentResult honest_flow(const ScenarioSpec& spec, int k) {
    struct Acc {
        std::uint64_t accepted = 0, valid = 0;
        Histogram idx;
        void merge(const Acc& o) {
            accepted += o.accepted;
            valid += o.valid;
            idx.merge(o.idx);
        }
    };
    for (const auto& s : split_strategies(spec.strategy)) {
        if (s != "honest") throw IncompatibleScenario("honest-flow has no strategy '" + s + "'");
    }
    const Acc acc = run_trials(spec.trials, spec.seed, 0, spec.threads,
                               Acc{0, 0, index_histogram(k, spec.trials)},
                               [k](Acc& a, std::uint64_t, Rng& rng) {
        bank::Bank bank;
        auto secret = SecretString::random_indexed(k, rng, kSeries);
        const auto r = honest_report(secret, rng);
        if (secret.block(r.index) == r.value) ++a.valid;
        bank.create_series(std::move(secret));
        if (bank.handle_verify(kSeries, r).ok()) ++a.accepted;
        a.idx.add(r.index - 1);
    });
    ExperimentResult res;
    const std::string sc = "honest-flow";
    push(res, sc, "honest",
         proportion_row("acceptance-rate", prop(acc.accepted, spec.trials), 1.0, Relation::Equal,
                        "an honest token verifies with certainty against an empty history"));
    push(res, sc, "honest",
         proportion_row("report-valid-rate", prop(acc.valid, spec.trials), 1.0, Relation::Equal,
                        "every report of an honest token is a valid pair (I, F_S(I))"));
    add_uniformity_row(res, sc, "honest", "index-uniformity-pvalue", acc.idx, spec.trials,
                       "reported indices are uniform over [1, 2^k]");
    return res;
}

// ---------------------------------------------------------------------------

ExperimentResult adversarial_history(const ScenarioSpec& spec, int k) {
    const auto params = SchemeParams::for_k(k);
    const std::uint64_t j = spec.history.value_or(params.cap_test - 1);
    if (j + 1 > params.cap_test || j >= params.index_space()) {
        throw IncompatibleScenario("a history of " + std::to_string(j) +
                                   " pairs leaves no room for the honest token at k=" +
                                   std::to_string(k));
    }
    for (const auto& s : split_strategies(spec.strategy)) {
        if (s != "distinct-valid") {
            throw IncompatibleScenario("adversarial-history has no strategy '" + s + "'");
        }
    }
    struct Acc {
        std::uint64_t rejected = 0, history_ok = 0;
        void merge(const Acc& o) {
            rejected += o.rejected;
            history_ok += o.history_ok;
        }
    };
    const Acc acc = run_trials(spec.trials, spec.seed, 0, spec.threads, Acc{},
                               [&](Acc& a, std::uint64_t, Rng& rng) {
        auto secret = SecretString::random_indexed(k, rng, kSeries);
        // The adversary knows S and spends j distinct valid pairs before the honest user.
        std::unordered_set<std::uint32_t> used;
        std::vector<TokenReport> spent;
        for (std::uint64_t h = 0; h < j; ++h) {
            const auto i = fresh_index(params.index_space(), used, rng);
            spent.push_back({i, secret.block(i)});
        }
        const auto honest = honest_report(secret, rng);
        bank::Bank bank;
        bank.create_series(std::move(secret));
        std::uint64_t ok = 0;
        for (const auto& r : spent) ok += bank.handle_verify(kSeries, r).ok() ? 1 : 0;
        if (ok == j) ++a.history_ok;
        if (!bank.handle_verify(kSeries, honest).ok()) ++a.rejected;
    });

    ExperimentResult res;
    const std::string sc = "adversarial-history";
    const std::string st = "distinct-valid-" + std::to_string(j);
    const auto rejected = prop(acc.rejected, spec.trials);
    const double expected = static_cast<double>(j) / static_cast<double>(params.index_space());
    push(res, sc, st,
         proportion_row("rejection-rate", rejected, expected, Relation::Equal,
                        "an honest token collides with a history of j distinct pairs w.p. j/2^k"));
    push(res, sc, st,
         proportion_row("rejection-rate", rejected, params.eps_l, Relation::Below,
                        "honest rejection probability is below eps_l = 2^{-k/2}"));
    push(res, sc, st,
         proportion_row("history-accepted-rate", prop(acc.history_ok, spec.trials), 1.0,
                        Relation::Equal, "distinct valid pairs are all accepted"));
    return res;
}

// ---------------------------------------------------------------------------

namespace {

ForgerStrategy forger_from_name(const std::string& name, const SchemeParams& params) {
    ForgerStrategy s;
    s.name = name;
    s.guess_budget = params.cap_test;
    auto suffix_q = [&](const std::string& prefix) -> std::optional<std::size_t> {
        if (name.rfind(prefix, 0) != 0) return std::nullopt;
        try {
            std::size_t used = 0;
            const auto q = std::stoull(name.substr(prefix.size()), &used);
            if (used != name.size() - prefix.size()) return std::nullopt;
            return static_cast<std::size_t>(q);
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };
    if (name == "uniform-guess") {
        s.policy = GuessPolicy::UniformFreshIndex;
    } else if (name == "replay") {
        s.policy = GuessPolicy::Replay;
        s.q = 1;
    } else if (auto q = suffix_q("measure-and-guess-")) {
        s.policy = GuessPolicy::UniformFreshIndex;
        s.q = *q;
    } else if (auto q2 = suffix_q("block-collision-")) {
        s.policy = GuessPolicy::BlockCollision;
        s.q = *q2;
    } else if (auto q3 = suffix_q("replay-")) {
        s.policy = GuessPolicy::Replay;
        s.q = *q3;
    } else {
        throw IncompatibleScenario("unknown forger strategy '" + name + "'");
    }
    try {
        s.validate(params, params.cap_mint);
    } catch (const std::invalid_argument& e) {
        throw IncompatibleScenario(name + ": " + e.what());
    }
    return s;
}

}  // namespace

ExperimentResult forgery(const ScenarioSpec& spec, int k) {
    const auto params = SchemeParams::for_k(k);
    auto names = split_strategies(spec.strategy);
    if (names.empty()) names = {"uniform-guess", "measure-and-guess-1", "measure-and-guess-2", "replay"};
    std::vector<ForgerStrategy> strategies;
    for (const auto& n : names) strategies.push_back(forger_from_name(n, params));

    const TokenSource source = k <= kQuantumMaxK ? TokenSource::Quantum : TokenSource::Emulated;
    struct Acc {
        std::vector<std::uint64_t> wins, agree;
        void merge(const Acc& o) {
            for (std::size_t i = 0; i < wins.size(); ++i) {
                wins[i] += o.wins[i];
                agree[i] += o.agree[i];
            }
        }
    };
    const std::size_t ns = strategies.size();
    // One secret per trial is shared by all strategies; each strategy draws its
    // measurements and guesses from its own stream, so every strategy sees a
    // uniform S independent of its own randomness.
    const Acc acc = run_trials(spec.trials, spec.seed, 0, spec.threads,
                               Acc{std::vector<std::uint64_t>(ns), std::vector<std::uint64_t>(ns)},
                               [&](Acc& a, std::uint64_t t, Rng& rng) {
        const auto secret = SecretString::random_indexed(k, rng, kSeries);
        for (std::size_t si = 0; si < ns; ++si) {
            const auto& strat = strategies[si];
            Rng srng = trial_rng(spec.seed, t, 1 + si);
            const auto subs = plan_forgery(secret, strat, srng, source);
            const auto expected = hamming_weight(btest(secret, subs));
            bank::Bank bank;
            bank.create_series(secret);
            std::size_t accepted = 0;
            for (const auto& r : subs) accepted += bank.handle_verify(kSeries, r).ok() ? 1 : 0;
            if (accepted > strat.q) ++a.wins[si];
            if (accepted == expected) ++a.agree[si];
        }
    });
    ExperimentResult res;
    const std::string sc = "forgery";
    const std::uint64_t y = params.index_space();
    for (std::size_t si = 0; si < ns; ++si) {
        const auto& strat = strategies[si];
        const auto wins = prop(acc.wins[si], spec.trials);
        push(res, sc, strat.name,
             proportion_row("win-rate", wins, eval_forgery_bound(params.cap_test, strat.q, y),
                            Relation::AtMost,
                            "more than q accepted pairs from q tokens w.p. <= 5 N (q+1) / |Y|"));
        push(res, sc, strat.name,
             proportion_row("win-rate", wins, eval_forgery_bound_6(params.cap_test, strat.q, y),
                            Relation::AtMost,
                            "more than q accepted pairs from q tokens w.p. <= 6 N (q+1) / |Y|"));
        if (strat.policy == GuessPolicy::Replay) {
            push(res, sc, strat.name,
                 proportion_row("win-rate", wins, 0.0, Relation::Equal,
                                "resubmitting measured pairs never passes the history check"));
        } else if (strat.q == 0) {
            const double exact = -std::expm1(static_cast<double>(strat.guess_budget) *
                                             std::log1p(-1.0 / static_cast<double>(y)));
            push(res, sc, strat.name,
                 proportion_row("win-rate", wins, exact, Relation::Equal,
                                "N uniform guesses at fresh indices: 1 - (1 - 2^{-k})^N"));
        }
        push(res, sc, strat.name,
             proportion_row("bank-matches-btest", prop(acc.agree[si], spec.trials), 1.0,
                            Relation::Equal, "the bank's decisions equal the batch test"));
    }
    return res;
}

// ---------------------------------------------------------------------------

ExperimentResult tracking_audit(const ScenarioSpec& spec, int k) {
    auto names = split_strategies(spec.strategy);
    if (names.empty()) names = {"honest", "loaded_entangled", "permutation_paired"};
    std::vector<TrackingBankStrategy::Kind> kinds;
    for (const auto& n : names) {
        try {
            kinds.push_back(TrackingBankStrategy::from_name(n).kind);
        } catch (const std::invalid_argument&) {
            throw IncompatibleScenario("unknown tracking-bank strategy '" + n + "'");
        }
    }
    const double half_mixed = (1.0 - std::ldexp(1.0, -k)) / 2.0;
    const std::uint64_t space = std::uint64_t{1} << k;

    struct Acc {
        std::uint64_t detected = 0, passed = 0, traced = 0, valid = 0, reports = 0;
        Histogram first, second;
        void merge(const Acc& o) {
            detected += o.detected;
            passed += o.passed;
            traced += o.traced;
            valid += o.valid;
            reports += o.reports;
            first.merge(o.first);
            second.merge(o.second);
        }
    };

    ExperimentResult res;
    const std::string sc = "tracking-audit";
    for (std::size_t si = 0; si < kinds.size(); ++si) {
        const auto kind = kinds[si];
        const std::string st = names[si];
        const Acc init{0, 0, 0, 0, 0, index_histogram(k, spec.trials), index_histogram(k, spec.trials)};
        double exact = 0.0;
        const Acc acc = run_trials(spec.trials, spec.seed, si, spec.threads, init,
                                   [&](Acc& a, std::uint64_t t, Rng& rng) {
            const auto secret = SecretString::random_indexed(k, rng);
            RegisterLayout layout;
            layout.add("pattern", 2 * k);
            SparseState joint = token_state(secret);
            std::vector<std::uint32_t> h;
            std::string token = "token";
            if (kind == TrackingBankStrategy::Kind::Honest) {
                layout.add("token", 2 * k);
                joint = tensor(joint, token_state(secret));
            } else if (kind == TrackingBankStrategy::Kind::LoadedEntangled) {
                const auto m = mint_loaded(secret);
                layout = layout.concat(m.layout);
                joint = tensor(joint, m.joint);
            } else {
                h = random_permutation(static_cast<std::uint32_t>(space), rng);
                const auto m = mint_permutation_paired(secret, h);
                layout = layout.concat(m.layout);
                joint = tensor(joint, m.joint);
                token = "token1";
            }
            if (t == 0) exact = report_prime_detection_probability(joint, layout, "pattern", token);

            // User side: audit the token against the pattern before spending it.
            const auto audit = report_prime(joint, layout, "pattern", token, rng);
            if (audit.outcome.detected()) {
                ++a.detected;
            } else {
                ++a.passed;
            }

            // Message statistics without an audit: what the bank sees when users just spend.
            if (kind == TrackingBankStrategy::Kind::PermutationPaired) {
                auto m1 = measure_register(joint, layout, "token1", rng);
                auto m2 = measure_register(m1.post_state, layout, "token2", rng);
                const auto r1 = report_from_basis_index(k, m1.value);
                const auto r2 = report_from_basis_index(k, m2.value);
                a.reports += 2;
                a.valid += (secret.block(r1.index) == r1.value) + (secret.block(r2.index) == r2.value);
                a.first.add(r1.index - 1);
                a.second.add(r2.index - 1);
                const std::vector<TokenReport> hist{r1, r2};
                if (!trace_permutation_pairs(secret, h, hist).empty()) ++a.traced;
            } else {
                auto m = measure_register(joint, layout, "token", rng);
                const auto r = report_from_basis_index(k, m.value);
                ++a.reports;
                a.valid += secret.block(r.index) == r.value;
                a.first.add(r.index - 1);
                if (kind == TrackingBankStrategy::Kind::LoadedEntangled &&
                    trace_loaded(m.post_state, layout, r, rng)) {
                    ++a.traced;
                }
            }
        });
        const double expected = kind == TrackingBankStrategy::Kind::Honest ? 0.0 : half_mixed;
        push(res, sc, st,
             proportion_row("detection-rate", prop(acc.detected, spec.trials), expected,
                            Relation::Equal,
                            kind == TrackingBankStrategy::Kind::Honest
                                ? "identical honest tokens always pass the swap test"
                                : "a token maximally mixed over 2^k valid pairs fails the swap "
                                  "test w.p. (1 - 2^{-k}) / 2"));
        push(res, sc, st,
             exact_row("detection-probability-exact", exact, 1, expected, Relation::Equal,
                       "exact swap overlap of the pattern with the minted token"));
        push(res, sc, st,
             proportion_row("message-valid-rate", prop(acc.valid, acc.reports), 1.0, Relation::Equal,
                            "every spent message is a valid pair"));
        add_uniformity_row(res, sc, st, "message-index-uniformity-pvalue", acc.first, spec.trials,
                           "message indices are uniform, as for honest tokens");
        if (kind == TrackingBankStrategy::Kind::PermutationPaired) {
            add_uniformity_row(res, sc, st, "second-message-index-uniformity-pvalue", acc.second,
                               spec.trials, "message indices are uniform, as for honest tokens");
        }
        if (kind != TrackingBankStrategy::Kind::Honest) {
            push(res, sc, st,
                 proportion_row("traced-rate", prop(acc.traced, spec.trials), 1.0, Relation::Equal,
                                "without an audit the bank links every spent message"));
        }
    }
    return res;
}

// ---------------------------------------------------------------------------

ExperimentResult otp_roundtrip(const ScenarioSpec& spec, int k) {
    for (const auto& s : split_strategies(spec.strategy)) {
        if (s != "honest") throw IncompatibleScenario("otp-roundtrip has no strategy '" + s + "'");
    }
    struct Acc {
        std::uint64_t roundtrip = 0, reuse_rejected = 0;
        void merge(const Acc& o) {
            roundtrip += o.roundtrip;
            reuse_rejected += o.reuse_rejected;
        }
    };
    const std::uint32_t mask = k >= 32 ? ~0u : (1u << k) - 1;
    const Acc acc = run_trials(spec.trials, spec.seed, 0, spec.threads, Acc{},
                               [&](Acc& a, std::uint64_t, Rng& rng) {
        auto secret = SecretString::random_indexed(k, rng, kSeries);
        const auto pad = honest_report(secret, rng);
        const auto message = static_cast<std::uint32_t>(rng()) & mask;
        const auto cipher = bank::otp_encode(pad.value, message);
        bank::Bank bank;
        bank.create_series(std::move(secret));
        const auto d = bank.handle_decode(kSeries, pad.index, cipher);
        if (d.ok() && hex_to_uint(d.payload, k) == message) ++a.roundtrip;
        const auto again = bank.handle_decode(kSeries, pad.index, cipher);
        if (again.status == bank::Status::Reject) ++a.reuse_rejected;
    });
    ExperimentResult res;
    const std::string sc = "otp-roundtrip";
    push(res, sc, "honest",
         proportion_row("roundtrip-rate", prop(acc.roundtrip, spec.trials), 1.0, Relation::Equal,
                        "decrypting R xor M with F_S(I) returns M"));
    push(res, sc, "honest",
         proportion_row("pad-reuse-rejected-rate", prop(acc.reuse_rejected, spec.trials), 1.0,
                        Relation::Equal, "a pad is accepted once"));
    return res;
}

// ---------------------------------------------------------------------------

ExperimentResult voting(const ScenarioSpec& spec, int k) {
    for (const auto& s : split_strategies(spec.strategy)) {
        if (s != "honest") throw IncompatibleScenario("voting has no strategy '" + s + "'");
    }
    const auto params = SchemeParams::for_k(k);
    // Each voter votes once and then tries to vote again with the same pad.
    const std::uint64_t voters = params.cap_test / 2;
    struct Acc {
        std::uint64_t counted = 0, double_rejected = 0, tally_ok = 0;
        void merge(const Acc& o) {
            counted += o.counted;
            double_rejected += o.double_rejected;
            tally_ok += o.tally_ok;
        }
    };
    const Acc acc = run_trials(spec.trials, spec.seed, 0, spec.threads, Acc{},
                               [&](Acc& a, std::uint64_t, Rng& rng) {
        auto secret = SecretString::random_indexed(k, rng, kSeries);
        std::vector<TokenReport> pads;
        std::vector<std::uint32_t> choices;
        for (std::uint64_t v = 0; v < voters; ++v) {
            pads.push_back(honest_report(secret, rng));
            choices.push_back(static_cast<std::uint32_t>(rng() & 1u));
        }
        bank::Bank bank;
        bank.create_series(std::move(secret));
        std::map<std::uint32_t, std::uint64_t> expected;
        for (std::uint64_t v = 0; v < voters; ++v) {
            const auto c = bank::otp_encode(pads[v].value, choices[v]);
            if (bank.handle_vote(kSeries, pads[v].index, c).ok()) {
                ++a.counted;
                ++expected[choices[v]];
            }
        }
        for (std::uint64_t v = 0; v < voters; ++v) {
            const auto c = bank::otp_encode(pads[v].value, choices[v] ^ 1u);
            const auto d = bank.handle_vote(kSeries, pads[v].index, c);
            if (d.status == bank::Status::Reject && d.reason == bank::reason::kDoubleVote) {
                ++a.double_rejected;
            }
        }
        if (bank.tally(kSeries) == expected) ++a.tally_ok;
    });
    // Voter v's pad is fresh iff its index avoids the v earlier voters' indices.
    const double miss = 1.0 - std::ldexp(1.0, -k);
    double expected_counted = 0.0;
    for (std::uint64_t v = 0; v < voters; ++v) expected_counted += std::pow(miss, static_cast<double>(v));
    expected_counted /= static_cast<double>(voters);

    ExperimentResult res;
    const std::string sc = "voting";
    const auto counted = prop(acc.counted, spec.trials * voters);
    push(res, sc, "honest",
         proportion_row("vote-counted-rate", counted, expected_counted, Relation::Equal,
                        "an honest vote is lost only when its index repeats an earlier voter's"));
    push(res, sc, "honest",
         proportion_row("vote-counted-rate", counted, 1.0 - params.eps_l, Relation::AtLeast,
                        "an honest vote is counted w.p. >= 1 - eps_l"));
    push(res, sc, "honest",
         proportion_row("double-vote-rejected-rate", prop(acc.double_rejected, spec.trials * voters),
                        1.0, Relation::Equal, "a second vote with a used pad is rejected"));
    push(res, sc, "honest",
         proportion_row("tally-consistent-rate", prop(acc.tally_ok, spec.trials), 1.0,
                        Relation::Equal, "the tally counts exactly the accepted votes"));
    return res;
}

}  // namespace qtoken::sim::detail
