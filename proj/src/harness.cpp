#include "nsduel/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "nsduel/env_io.hpp"

namespace nsduel::harness {

using nlohmann::json;

namespace {

const json* find(const json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() || it->is_null() ? nullptr : &*it;
}

std::size_t read_count(const json& j, const char* key, const std::string& path, std::size_t fallback,
                       bool allow_zero = false) {
    const json* v = find(j, key);
    if (!v) return fallback;
    if (!v->is_number_integer() || v->get<long long>() < (allow_zero ? 0 : 1)) {
        throw ConfigError(path + key + ": expected " + (allow_zero ? "a non-negative" : "a positive") +
                          " integer");
    }
    return v->get<std::size_t>();
}

double read_number(const json& j, const char* key, const std::string& path, double fallback) {
    const json* v = find(j, key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(path + key + ": expected a number");
    return v->get<double>();
}

std::string read_string(const json& j, const char* key, const std::string& path, const std::string& fallback) {
    const json* v = find(j, key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(path + key + ": expected a string");
    return v->get<std::string>();
}

bool read_bool(const json& j, const char* key, const std::string& path, bool fallback) {
    const json* v = find(j, key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(path + key + ": expected true or false");
    return v->get<bool>();
}

EnvironmentConfig parse_environment(const json& j) {
    const std::string p = "environment.";
    if (!j.is_object()) throw ConfigError("environment: expected an object");
    EnvironmentConfig env;
    if (!find(j, "generator") && find(j, "segments")) {
        env.generator = "inline";
    } else {
        env.generator = read_string(j, "generator", p, env.generator);
    }
    env.k = read_count(j, "k", p, env.k);
    env.gap = read_number(j, "gap", p, env.gap);
    env.winner = read_count(j, "winner", p, 0, true);
    env.second_winner = read_count(j, "second_winner", p, 1, true);
    env.flip_fraction = read_number(j, "flip_fraction", p, env.flip_fraction);
    env.epsilon = read_number(j, "epsilon", p, env.epsilon);
    env.a = read_count(j, "a", p, 0, true);
    env.a_prime = read_count(j, "a_prime", p, env.k > 1 ? env.k - 1 : 0, true);

    const auto& g = env.generator;
    if (g == "dominant" || g == "flip") {
        if (!(env.gap > 0.0 && env.gap <= 0.5)) throw ConfigError(p + "gap: must lie in (0, 0.5]");
        if (env.winner >= env.k) throw ConfigError(p + "winner: must be below k");
        if (g == "flip") {
            if (env.second_winner >= env.k || env.second_winner == env.winner) {
                throw ConfigError(p + "second_winner: must be below k and differ from winner");
            }
            if (!(env.flip_fraction > 0.0 && env.flip_fraction < 1.0)) {
                throw ConfigError(p + "flip_fraction: must lie in (0, 1)");
            }
        }
    } else if (g == "borda-hardness" || g == "gic-k-hardness") {
        if (env.k % 2 != 0 || env.k < 2) throw ConfigError(p + "k: must be even");
        if (!(env.epsilon > 0.0 && env.epsilon < 0.05)) throw ConfigError(p + "epsilon: must lie in (0, 0.05)");
        if (g == "gic-k-hardness" && (env.a >= env.k || env.a_prime >= env.k || env.a == env.a_prime)) {
            throw ConfigError(p + "a: a and a_prime must be distinct arms below k");
        }
    } else if (g == "conflict") {
        env.k = 3;
    } else if (g == "gic-pair") {
        env.k = 3;
        if (!(env.epsilon > 0.0 && env.epsilon < 0.5)) throw ConfigError(p + "epsilon: must lie in (0, 0.5)");
    } else if (g == "file") {
        const std::string path = read_string(j, "path", p, "");
        if (path.empty()) throw ConfigError(p + "path: required for the file generator");
        env.path = path;
        try {
            env.sequence = io::read_env(env.path);
        } catch (const std::exception& e) {
            throw ConfigError(p + "path: " + e.what());
        }
        env.k = env.sequence->k();
    } else if (g == "inline") {
        try {
            env.sequence = io::env_from_json(j);
        } catch (const std::exception& e) {
            throw ConfigError(p + e.what());
        }
        env.k = env.sequence->k();
    } else {
        throw ConfigError(p + "generator: unknown generator '" + g + "'");
    }
    return env;
}

}  // namespace

PreferenceSequence EnvironmentConfig::build(std::size_t horizon) const {
    const auto& g = generator;
    if (g == "dominant") return envs::gen_stationary(envs::dominant_arm(k, gap, winner), horizon);
    if (g == "flip") {
        std::size_t first = static_cast<std::size_t>(std::llround(flip_fraction * static_cast<double>(horizon)));
        first = std::clamp<std::size_t>(first, 1, horizon > 1 ? horizon - 1 : 1);
        if (horizon < 2) return envs::gen_stationary(envs::dominant_arm(k, gap, winner), horizon);
        return envs::gen_piecewise({{first, envs::dominant_arm(k, gap, winner)},
                                    {horizon - first, envs::dominant_arm(k, gap, second_winner)}});
    }
    if (g == "borda-hardness") return envs::gen_stationary(envs::borda_hardness(k, epsilon, winner), horizon);
    if (g == "gic-k-hardness") {
        return envs::gen_stationary(envs::gic_k_hardness(k, epsilon, a, a_prime), horizon);
    }
    if (g == "conflict") return envs::gen_stationary(envs::conflict_3x3(), horizon);
    if (g == "gic-pair") {
        auto [m1, m2] = envs::gic_pair(epsilon);
        if (horizon < 2) return envs::gen_stationary(m1, horizon);
        const std::size_t first = horizon / 2;
        return envs::gen_piecewise({{first, m1}, {horizon - first, m2}});
    }
    if (sequence) {
        if (horizon > sequence->horizon()) {
            throw ConfigError("horizons: " + std::to_string(horizon) + " exceeds the environment horizon " +
                              std::to_string(sequence->horizon()));
        }
        return horizon == sequence->horizon() ? *sequence : sequence->truncated(horizon);
    }
    throw ConfigError("environment.generator: cannot build '" + g + "'");
}

json EnvironmentConfig::to_json() const {
    json j{{"generator", generator}, {"k", k}};
    if (generator == "dominant" || generator == "flip") {
        j["gap"] = gap;
        j["winner"] = winner;
        if (generator == "flip") {
            j["second_winner"] = second_winner;
            j["flip_fraction"] = flip_fraction;
        }
    } else if (generator == "borda-hardness" || generator == "gic-k-hardness" || generator == "gic-pair") {
        j["epsilon"] = epsilon;
        if (generator == "borda-hardness") j["winner"] = winner;
        if (generator == "gic-k-hardness") {
            j["a"] = a;
            j["a_prime"] = a_prime;
        }
    } else if (generator == "file") {
        j["path"] = path.string();
    } else if (generator == "inline" && sequence) {
        j = io::env_to_json(*sequence);
        j["generator"] = "inline";
    }
    return j;
}

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::kMetaFixed: return "metabosse-fixed";
        case Algorithm::kMetaUnknown: return "metabosse-unknown";
        case Algorithm::kBosse: return "bosse";
        case Algorithm::kUniform: return "uniform";
        case Algorithm::kOracleRestart: return "oracle-restart";
    }
    return "unknown";
}

double preset_constant(Preset p) { return p == Preset::kTheory ? bosse::kTheoryC : bosse::kEmpiricalC; }
std::string to_string(Preset p) { return p == Preset::kTheory ? "theory" : "empirical"; }

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    static const std::vector<std::string> known{"environment", "algorithm", "horizons", "replications", "seed",
                                                "preset",      "c_evict",   "out",      "trace",        "svg",
                                                "measures",    "threads"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(key + ": unknown field");
        }
    }
    ExperimentConfig cfg;
    if (const json* env = find(j, "environment")) cfg.environment = parse_environment(*env);

    if (const json* alg = find(j, "algorithm")) {
        std::string name;
        std::string spec = "fixed";
        if (alg->is_string()) {
            name = alg->get<std::string>();
        } else if (alg->is_object()) {
            name = read_string(*alg, "name", "algorithm.", "metabosse");
            spec = read_string(*alg, "spec", "algorithm.", spec);
            cfg.weight = read_string(*alg, "weight", "algorithm.", cfg.weight);
        } else {
            throw ConfigError("algorithm: expected a string or an object");
        }
        if (spec != "fixed" && spec != "unknown") throw ConfigError("algorithm.spec: expected 'fixed' or 'unknown'");
        cfg.unknown_spec = spec == "unknown";
        if (name == "metabosse") {
            cfg.algorithm = cfg.unknown_spec ? Algorithm::kMetaUnknown : Algorithm::kMetaFixed;
        } else if (name == "bosse") {
            cfg.algorithm = Algorithm::kBosse;
        } else if (name == "uniform") {
            cfg.algorithm = Algorithm::kUniform;
        } else if (name == "oracle-restart") {
            cfg.algorithm = Algorithm::kOracleRestart;
        } else {
            throw ConfigError("algorithm.name: unknown algorithm '" + name + "'");
        }
    }
    try {
        (void)Weight::parse(cfg.weight, cfg.environment.k);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("algorithm.weight: ") + e.what());
    }

    if (const json* h = find(j, "horizons")) {
        if (h->is_number_integer()) {
            cfg.horizons = {h->get<std::size_t>()};
        } else if (h->is_array() && !h->empty()) {
            cfg.horizons.clear();
            for (std::size_t n = 0; n < h->size(); ++n) {
                const auto& v = (*h)[n];
                if (!v.is_number_integer() || v.get<long long>() < 1) {
                    throw ConfigError("horizons[" + std::to_string(n) + "]: expected a positive integer");
                }
                cfg.horizons.push_back(v.get<std::size_t>());
            }
        } else {
            throw ConfigError("horizons: expected a positive integer or a non-empty array");
        }
        for (std::size_t n = 0; n < cfg.horizons.size(); ++n) {
            if (cfg.horizons[n] == 0) throw ConfigError("horizons[" + std::to_string(n) + "]: must be positive");
        }
    }
    cfg.replications = read_count(j, "replications", "", cfg.replications);
    if (const json* s = find(j, "seed")) {
        if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0)) {
            throw ConfigError("seed: expected a non-negative integer");
        }
        cfg.seed = s->get<std::uint64_t>();
    }
    const std::string preset = read_string(j, "preset", "", "theory");
    if (preset == "theory") {
        cfg.preset = Preset::kTheory;
    } else if (preset == "empirical") {
        cfg.preset = Preset::kEmpirical;
    } else {
        throw ConfigError("preset: expected 'theory' or 'empirical'");
    }
    if (const json* c = find(j, "c_evict")) {
        if (!c->is_number() || !(c->get<double>() > 0.0)) throw ConfigError("c_evict: expected a positive number");
        cfg.c_evict = c->get<double>();
    }
    cfg.out = read_string(j, "out", "", "");
    cfg.trace = read_bool(j, "trace", "", cfg.trace);
    cfg.svg = read_bool(j, "svg", "", cfg.svg);
    cfg.measures = read_bool(j, "measures", "", cfg.measures);
    cfg.threads = read_count(j, "threads", "", cfg.threads, true);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(j);
}

json ExperimentConfig::to_json() const {
    json alg{{"name", algorithm == Algorithm::kMetaFixed || algorithm == Algorithm::kMetaUnknown
                          ? std::string("metabosse")
                          : to_string(algorithm)},
             {"spec", unknown_spec ? "unknown" : "fixed"},
             {"weight", weight}};
    json j{{"environment", environment.to_json()},
           {"algorithm", alg},
           {"horizons", horizons},
           {"replications", replications},
           {"seed", seed},
           {"preset", to_string(preset)},
           {"c_evict", eviction_constant()},
           {"trace", trace},
           {"svg", svg},
           {"measures", measures}};
    return j;
}

std::optional<bosse::Specification> make_spec(const ExperimentConfig& cfg, std::size_t k) {
    if (cfg.algorithm == Algorithm::kUniform) return std::nullopt;
    const double c = cfg.eviction_constant();
    if (cfg.unknown_spec) return bosse::Specification::unknown_weight(k, c);
    return bosse::Specification::fixed_weight(Weight::parse(cfg.weight, k), c);
}

Replication run_replication(const ExperimentConfig& cfg, const PreferenceSequence& env, std::size_t index) {
    Replication rep{index, rng::derive_seed(cfg.seed, index), RegretLedger{}, {}, {}, {}};
    const auto streams = rng::Streams::from_seed(rep.seed);
    const std::size_t k = env.k();
    std::vector<Weight> tracked;
    if (!cfg.unknown_spec && cfg.weight != "uniform") tracked.push_back(Weight::parse(cfg.weight, k));

    const auto spec = make_spec(cfg, k);
    if (!spec) {
        rep.ledger = metabosse::run_uniform(env, streams, tracked);
        return rep;
    }
    metabosse::RunOptions opts;
    opts.replays = cfg.algorithm == Algorithm::kMetaFixed || cfg.algorithm == Algorithm::kMetaUnknown;
    if (cfg.algorithm == Algorithm::kOracleRestart) opts.forced_restarts = env.change_points();
    opts.trace = cfg.trace;
    opts.tracked = tracked;
    auto result = metabosse::run(env, *spec, streams, opts);
    rep.ledger = std::move(result.ledger);
    rep.episodes = std::move(result.episodes);
    rep.trace = std::move(result.trace);
    rep.evictions = std::move(result.evictions);
    return rep;
}

Stat mean_stddev(const std::vector<double>& xs) {
    Stat s;
    if (xs.empty()) return s;
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

namespace {

std::vector<std::size_t> checkpoints_for(std::size_t horizon) {
    constexpr std::size_t kPoints = 50;
    std::vector<std::size_t> cps;
    for (std::size_t n = 1; n <= kPoints; ++n) {
        const std::size_t t = std::max<std::size_t>(1, horizon * n / kPoints);
        if (cps.empty() || cps.back() != t) cps.push_back(t);
    }
    return cps;
}

std::optional<json> environment_measures(const PreferenceSequence& env) {
    measures::MeasureRequest req;
    req.sbs = true;
    req.tv = true;
    req.switches = true;
    req.flags = true;
    req.approx = true;
    try {
        return measures::compute(env, req).to_json();
    } catch (const measures::LimitExceeded& e) {
        req.sbs = false;
        json j = measures::compute(env, req).to_json();
        j["sbs_skipped"] = e.what();
        return j;
    }
}

template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < n; i = next++) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
                next = n;
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ReplicationSink& sink) {
    const auto started = std::chrono::steady_clock::now();
    ExperimentResult result;
    for (std::size_t horizon : cfg.horizons) {
        const auto env = cfg.environment.build(horizon);
        std::vector<std::optional<Replication>> reps(cfg.replications);
        parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) { reps[r] = run_replication(cfg, env, r); });

        HorizonSummary hs;
        hs.horizon = horizon;
        hs.checkpoints = checkpoints_for(horizon);
        std::vector<double> condorcet;
        std::vector<std::vector<double>> at_cp(hs.checkpoints.size());
        for (const auto& rep : reps) {
            if (sink) sink(horizon, *rep);
            const auto& ledger = rep->ledger;
            hs.final_borda.push_back(ledger.final_borda());
            condorcet.push_back(ledger.final_condorcet());
            hs.condorcet_undefined_rounds = std::max(hs.condorcet_undefined_rounds, ledger.condorcet_undefined_rounds());
            std::vector<std::size_t> restarts;
            for (const auto& e : rep->episodes) {
                if (e.cause == metabosse::RestartCause::kExhausted) restarts.push_back(e.t_end);
            }
            hs.restart_rounds.push_back(std::move(restarts));
            for (std::size_t c = 0; c < hs.checkpoints.size(); ++c) {
                at_cp[c].push_back(ledger.rows()[hs.checkpoints[c] - 1].cum_borda);
            }
        }
        hs.borda = mean_stddev(hs.final_borda);
        if (hs.condorcet_undefined_rounds == 0) hs.condorcet = mean_stddev(condorcet);
        for (const auto& v : at_cp) hs.curve.push_back(mean_stddev(v));
        if (cfg.measures) hs.measures = environment_measures(env);
        result.horizons.push_back(std::move(hs));
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

json ExperimentResult::summary_json(const ExperimentConfig& cfg) const {
    json hs = json::array();
    for (const auto& h : horizons) {
        json curve_mean = json::array();
        json curve_sd = json::array();
        for (const auto& s : h.curve) {
            curve_mean.push_back(s.mean);
            curve_sd.push_back(s.stddev);
        }
        json entry{{"horizon", h.horizon},
                   {"borda", {{"mean", h.borda.mean}, {"stddev", h.borda.stddev}}},
                   {"condorcet_undefined_rounds", h.condorcet_undefined_rounds},
                   {"final_borda", h.final_borda},
                   {"restart_rounds", h.restart_rounds},
                   {"checkpoints", h.checkpoints},
                   {"curve_mean", curve_mean},
                   {"curve_stddev", curve_sd}};
        entry["condorcet"] = h.condorcet ? json{{"mean", h.condorcet->mean}, {"stddev", h.condorcet->stddev}}
                                         : json(nullptr);
        if (h.measures) entry["measures"] = *h.measures;
        hs.push_back(std::move(entry));
    }
    return {{"config", cfg.to_json()}, {"horizons", hs}};
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string suffix(std::size_t horizon, std::size_t rep) {
    return "_T" + std::to_string(horizon) + "_rep" + std::to_string(rep);
}

void write_replication(const std::filesystem::path& dir, std::size_t horizon, const Replication& rep) {
    std::ostringstream csv;
    rep.ledger.write_csv(csv);
    write_text(dir / ("ledger" + suffix(horizon, rep.index) + ".csv"), csv.str());
    if (!rep.episodes.empty()) {
        write_text(dir / ("episodes" + suffix(horizon, rep.index) + ".json"),
                   metabosse::episodes_to_json(rep.episodes).dump(1) + "\n");
    }
    if (!rep.trace.empty()) {
        std::string lines;
        for (const auto& row : rep.trace) lines += metabosse::trace_row_json(row).dump() + "\n";
        write_text(dir / ("trace" + suffix(horizon, rep.index) + ".jsonl"), lines);
        std::string ev;
        for (const auto& r : rep.evictions) ev += metabosse::eviction_json(r).dump() + "\n";
        write_text(dir / ("evictions" + suffix(horizon, rep.index) + ".jsonl"), ev);
    }
}

}  // namespace

ExperimentResult run_and_write(const ExperimentConfig& cfg) {
    if (cfg.out.empty()) return run_experiment(cfg);
    std::filesystem::create_directories(cfg.out);
    write_text(cfg.out / "config.json", cfg.to_json().dump(1) + "\n");
    auto result = run_experiment(cfg, [&](std::size_t horizon, const Replication& rep) {
        write_replication(cfg.out, horizon, rep);
    });
    write_text(cfg.out / "summary.json", result.summary_json(cfg).dump(1) + "\n");
    write_text(cfg.out / "timing.json", json{{"wall_seconds", result.wall_seconds}}.dump(1) + "\n");
    if (cfg.svg) {
        std::vector<Curve> curves;
        for (const auto& h : result.horizons) {
            Curve c{"T = " + std::to_string(h.horizon), {}, h.curve};
            for (std::size_t t : h.checkpoints) c.x.push_back(static_cast<double>(t));
            curves.push_back(std::move(c));
        }
        write_text(cfg.out / "regret.svg", regret_svg(curves, to_string(cfg.algorithm) + ": cumulative Borda regret"));
    }
    return result;
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) throw std::invalid_argument("slope fit needs at least 3 points");
    const std::size_t n = x.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0)) throw std::invalid_argument("slope fit: horizons must be positive");
        if (!(y[i] > 0.0)) throw std::domain_error("slope fit: degenerate (zero) regret");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("slope fit: horizons must differ");
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - fit.intercept - fit.slope * lx[i];
        rss += r * r;
    }
    fit.stderr_slope = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    return fit;
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
    if (cfg.horizons.size() < 3) throw ConfigError("horizons: a sweep needs at least 3 horizons");
    SweepResult out{run_and_write(cfg), {}};
    std::vector<double> x, y;
    for (const auto& h : out.experiment.horizons) {
        x.push_back(static_cast<double>(h.horizon));
        y.push_back(h.borda.mean);
    }
    out.fit = fit_loglog(x, y);
    if (!cfg.out.empty()) {
        write_text(cfg.out / "sweep.json",
                   json{{"slope", out.fit.slope}, {"stderr", out.fit.stderr_slope}, {"intercept", out.fit.intercept},
                        {"horizons", x}, {"mean_final_borda", y}}
                           .dump(1) +
                       "\n");
    }
    return out;
}

}  // namespace nsduel::harness
