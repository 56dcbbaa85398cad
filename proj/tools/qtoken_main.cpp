#include <csignal>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qtoken/adversary.hpp"
#include "qtoken/bank_service.hpp"
#include "qtoken/server.hpp"
#include "qtoken/sim_harness.hpp"
#include "qtoken/token_scheme.hpp"

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

int cmd_run(const qtoken::sim::ScenarioSpec& spec) {
    const auto res = qtoken::sim::run_scenario(spec);
    if (spec.out.empty()) std::cout << res.to_csv();
    for (const auto& r : res.rows) {
        if (!r.pass) {
            std::cerr << "FAIL " << r.strategy << " " << r.metric << ": " << num(r.estimate) << " vs "
                      << num(r.reference) << "\n";
        }
    }
    return res.all_pass() ? 0 : 1;
}

int cmd_bounds(int k) {
    const auto p = qtoken::SchemeParams::for_k(k);
    const std::uint64_t y = p.index_space();
    std::cout << "quantity,q,r,value\n";
    std::cout << "k,,," << k << "\n";
    std::cout << "N_M,,," << p.cap_mint << "\n";
    std::cout << "N_T,,," << p.cap_test << "\n";
    std::cout << "eps_l,,," << num(p.eps_l) << "\n";
    std::cout << "eps_f_const5,,," << num(5.0 * std::ldexp(1.0, -k / 4)) << "\n";
    std::cout << "eps_f_const6,,," << num(p.eps_f) << "\n";
    for (std::uint64_t q = 0; q <= p.cap_mint; ++q) {
        std::cout << "forgery_bound_const5," << q << ",," << num(qtoken::eval_forgery_bound(p.cap_test, q, y)) << "\n";
        std::cout << "forgery_bound_const6," << q << ",," << num(qtoken::eval_forgery_bound_6(p.cap_test, q, y)) << "\n";
    }
    for (std::uint64_t q = 0; q <= p.cap_mint; ++q) {
        for (std::uint64_t r = q + 1; r <= q + 4; ++r) {
            std::cout << "all_correct_bound," << q << "," << r << ","
                      << num(qtoken::eval_all_correct_bound(q, r, y)) << "\n";
        }
    }
    return 0;
}

struct ServeOptions {
    std::string log;
    std::string socket;
    std::vector<std::string> series;  // id:k
    std::uint64_t seed = 0;
    bool seeded = false;
    bool no_fsync = false;
};

int cmd_serve(const ServeOptions& o) {
    // Block termination signals in every thread; the main thread waits for them.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    auto bank = qtoken::bank::Bank::open(
        o.log, o.no_fsync ? qtoken::bank::SyncMode::Flush : qtoken::bank::SyncMode::Fsync);
    qtoken::Rng rng(o.seeded ? o.seed : std::random_device{}());
    for (const auto& s : o.series) {
        const auto colon = s.rfind(':');
        if (colon == std::string::npos) throw std::invalid_argument("--series expects <id>:<k>");
        const std::string id = s.substr(0, colon);
        const int k = std::stoi(s.substr(colon + 1));
        if (bank->has_series(id)) continue;
        bank->create_series(qtoken::SecretString::random_indexed(k, rng, id));
    }
    qtoken::bank::LineServer server(*bank, o.socket);
    server.start();
    std::cout << "listening " << server.address() << std::endl;
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anonymous quantum token simulator and verification service"};
    app.require_subcommand(1);

    qtoken::sim::ScenarioSpec spec;
    int run_k = 0;
    std::uint64_t history = 0;
    std::string out;
    auto* run = app.add_subcommand("run", "Run a Monte Carlo scenario and emit CSV");
    run->add_option("scenario", spec.scenario,
                    "honest-flow, adversarial-history, forgery, tracking-audit, otp-roundtrip, "
                    "voting or inequality-suite")
        ->required();
    auto* k_opt = run->add_option("--k", run_k, "Security parameter (multiple of 4)");
    run->add_option("--trials", spec.trials, "Number of trials")->check(CLI::PositiveNumber);
    run->add_option("--seed", spec.seed, "Master seed");
    run->add_option("--strategy", spec.strategy, "Comma-separated strategy names");
    auto* hist_opt = run->add_option("--history", history, "adversarial-history: pairs spent first");
    run->add_option("--out", out, "CSV output path (stdout when omitted)");
    run->add_option("--threads", spec.threads, "Worker threads (0 = all cores)");

    int bounds_k = 16;
    auto* bounds = app.add_subcommand("bounds", "Print scheme parameters and forgery bounds as CSV");
    bounds->add_option("--k", bounds_k, "Security parameter (multiple of 4)")->required();

    ServeOptions so;
    auto* serve = app.add_subcommand("serve", "Run the verification service");
    serve->add_option("--log", so.log, "Append-only log path")->required();
    serve->add_option("--socket", so.socket, "unix:<path>, /<path> or <host>:<port>")->required();
    serve->add_option("--series", so.series, "Create series <id>:<k> if missing (repeatable)");
    auto* seed_opt = serve->add_option("--seed", so.seed, "Seed for new series secrets");
    serve->add_flag("--no-fsync", so.no_fsync, "Flush the log without fsync");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            if (*k_opt) spec.k = run_k;
            if (*hist_opt) spec.history = history;
            spec.out = out;
            return cmd_run(spec);
        }
        if (*bounds) return cmd_bounds(bounds_k);
        if (*serve) {
            so.seeded = static_cast<bool>(*seed_opt);
            return cmd_serve(so);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
