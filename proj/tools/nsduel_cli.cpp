// nsduel: simulations and offline measures for non-stationary dueling bandits.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "nsduel/env_io.hpp"
#include "nsduel/harness.hpp"
#include "nsduel/measures.hpp"

using namespace nsduel;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;
constexpr int kSelfcheckFailed = 3;

struct RunFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::vector<std::size_t> horizons;
    std::optional<std::size_t> reps;
    std::string preset;
    bool trace = false;
    std::string out;
    bool svg = false;
    std::optional<std::size_t> threads;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--config", f.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--horizon", f.horizons, "Horizon; repeat for several")->check(CLI::PositiveNumber);
    cmd->add_option("--reps", f.reps, "Replications per horizon")->check(CLI::PositiveNumber);
    cmd->add_option("--preset", f.preset, "Eviction constant preset")->check(CLI::IsMember({"theory", "empirical"}));
    cmd->add_flag("--trace", f.trace, "Write per-round traces and eviction logs");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_flag("--svg", f.svg, "Write a regret plot");
    cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
}

harness::ExperimentConfig resolve(const RunFlags& f) {
    auto cfg = f.config.empty() ? harness::ExperimentConfig{} : harness::load_config(f.config);
    if (f.seed) cfg.seed = *f.seed;
    if (!f.horizons.empty()) cfg.horizons = f.horizons;
    if (f.reps) cfg.replications = *f.reps;
    if (!f.preset.empty()) {
        cfg.preset = f.preset == "theory" ? harness::Preset::kTheory : harness::Preset::kEmpirical;
        cfg.c_evict.reset();
    }
    if (f.trace) cfg.trace = true;
    if (!f.out.empty()) cfg.out = f.out;
    if (f.svg) cfg.svg = true;
    if (f.threads) cfg.threads = *f.threads;
    if (cfg.svg && cfg.out.empty()) throw harness::ConfigError("svg: requires an output directory (--out)");
    if (cfg.trace && cfg.out.empty()) throw harness::ConfigError("trace: requires an output directory (--out)");
    return cfg;
}

void print_summary(const harness::ExperimentResult& r) {
    for (const auto& h : r.horizons) {
        std::size_t restarts = 0;
        for (const auto& v : h.restart_rounds) restarts += v.size();
        std::printf("T=%zu  borda %.3f +- %.3f", h.horizon, h.borda.mean, h.borda.stddev);
        if (h.condorcet) std::printf("  condorcet %.3f +- %.3f", h.condorcet->mean, h.condorcet->stddev);
        std::printf("  restarts %zu\n", restarts);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulations and offline measures for non-stationary dueling bandits"};
    app.require_subcommand(1);

    RunFlags run_flags, sweep_flags;
    auto* run = app.add_subcommand("run", "Run replications of an experiment");
    add_run_flags(run, run_flags);
    auto* sweep = app.add_subcommand("sweep", "Run several horizons and fit the log-log regret slope");
    add_run_flags(sweep, sweep_flags);

    auto* measure = app.add_subcommand("measure", "Offline non-stationarity measures of an environment file");
    std::string env_file, skw_spec, measure_out;
    bool m_sbs = false, m_suw = false, m_approx = false, m_tv = false, m_switches = false, m_oracle = false,
         m_flags = false;
    std::size_t max_horizon = measures::Limits{}.max_horizon;
    measure->add_option("env", env_file, "Environment file")->required()->check(CLI::ExistingFile);
    measure->add_flag("--sbs", m_sbs, "Significant Borda winner switches");
    measure->add_option("--skw", skw_spec, "Significant switches for a known weight (uniform | point:<a> | w0,w1,...)");
    measure->add_flag("--suw", m_suw, "Significant switches under the worst weight");
    measure->add_flag("--approx", m_approx, "Approximate winner changes (needs GIC)");
    measure->add_flag("--tv", m_tv, "Total variation and change count");
    measure->add_flag("--switches", m_switches, "Condorcet/Borda winner switch counts");
    measure->add_flag("--flags", m_flags, "Per-segment CW/GIC/SST/STI flags");
    measure->add_flag("--oracle", m_oracle, "Use the brute-force reference implementations");
    measure->add_option("--max-horizon", max_horizon, "Refuse quadratic measures beyond this horizon");
    measure->add_option("--out", measure_out, "Write the report here instead of stdout");

    auto* env = app.add_subcommand("env", "Write a generated environment file");
    std::string generator, env_out;
    std::size_t env_horizon = 1000;
    json params = json::object();
    std::size_t k = 5, winner = 0, second = 1, a = 0, a_prime = 1;
    double gap = 0.2, flip = 0.5, eps = 0.01;
    env->add_option("generator", generator, "dominant | flip | borda-hardness | conflict | gic-pair | gic-k-hardness")
        ->required();
    env->add_option("--horizon", env_horizon, "Horizon")->check(CLI::PositiveNumber);
    env->add_option("--k", k, "Number of arms");
    env->add_option("--gap", gap, "Borda gap of the dominant arm");
    env->add_option("--winner", winner, "Winning arm (0-based)");
    env->add_option("--second-winner", second, "Winning arm after the flip");
    env->add_option("--flip-fraction", flip, "Flip position as a fraction of the horizon");
    env->add_option("--epsilon", eps, "Hardness gap");
    env->add_option("--a", a, "First arm of the perturbed pair");
    env->add_option("--a-prime", a_prime, "Second arm of the perturbed pair");
    env->add_option("--out", env_out, "Output file (stdout if omitted)");

    auto* selfcheck = app.add_subcommand("selfcheck", "Quick end-to-end consistency checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) {
            const auto cfg = resolve(run_flags);
            const auto result = harness::run_and_write(cfg);
            print_summary(result);
            return kOk;
        }
        if (*sweep) {
            const auto cfg = resolve(sweep_flags);
            const auto result = harness::run_sweep(cfg);
            print_summary(result.experiment);
            std::printf("slope %.4f +- %.4f\n", result.fit.slope, result.fit.stderr_slope);
            return kOk;
        }
        if (*measure) {
            const auto seq = io::read_env(env_file);
            measures::MeasureRequest req;
            req.sbs = m_sbs;
            if (!skw_spec.empty()) req.skw = Weight::parse(skw_spec, seq.k());
            req.suw = m_suw;
            req.approx = m_approx;
            req.tv = m_tv;
            req.switches = m_switches;
            req.flags = m_flags;
            if (!(req.sbs || req.skw || req.suw || req.approx || req.tv || req.switches || req.flags)) {
                req = measures::MeasureRequest::all(seq.k());
            }
            req.oracle = m_oracle;
            req.limits.max_horizon = max_horizon;
            const std::string text = measures::compute(seq, req).to_json().dump(1) + "\n";
            if (measure_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream(measure_out) << text;
            }
            return kOk;
        }
        if (*env) {
            json j{{"generator", generator}, {"k", k},           {"gap", gap},         {"winner", winner},
                   {"second_winner", second}, {"flip_fraction", flip}, {"epsilon", eps}, {"a", a},
                   {"a_prime", a_prime}};
            if (generator == "file" || generator == "inline") {
                throw harness::ConfigError("generator: '" + generator + "' cannot be used here");
            }
            const auto cfg = harness::parse_config(json{{"environment", j}});
            const auto seq = cfg.environment.build(env_horizon);
            if (env_out.empty()) {
                std::cout << io::env_to_json(seq).dump(1) << "\n";
            } else {
                io::write_env(env_out, seq);
            }
            return kOk;
        }
        if (*selfcheck) {
            bool ok = true;
            for (const auto& c : harness::selfcheck()) {
                std::printf("[%s] %s%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.empty() ? "" : ": ",
                            c.detail.c_str());
                ok = ok && c.passed;
            }
            return ok ? kOk : kSelfcheckFailed;
        }
    } catch (const harness::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const io::FormatError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kOk;
}
