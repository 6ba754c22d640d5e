#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nsduel/harness.hpp"

using namespace nsduel;
using namespace nsduel::harness;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nsduel_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string config_error(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string ledger_csv(const Replication& rep) {
    std::ostringstream os;
    rep.ledger.write_csv(os);
    return os.str();
}

}  // namespace

TEST(FitLoglog, ExactPowerLaw) {
    const std::vector<double> x{2000, 4000, 8000, 16000};
    std::vector<double> y, lin;
    for (double t : x) {
        y.push_back(std::pow(t, 2.0 / 3.0));
        lin.push_back(0.15 * t);
    }
    const auto f = fit_loglog(x, y);
    EXPECT_NEAR(f.slope, 2.0 / 3.0, 1e-9);
    EXPECT_NEAR(f.intercept, 0.0, 1e-9);
    EXPECT_NEAR(f.stderr_slope, 0.0, 1e-9);
    EXPECT_NEAR(fit_loglog(x, lin).slope, 1.0, 1e-9);
    EXPECT_NEAR(fit_loglog(x, lin).intercept, std::log(0.15), 1e-9);
}

TEST(FitLoglog, MatchesNormalEquations) {
    const std::vector<double> x{10, 30, 50, 200, 1000};
    const std::vector<double> y{3, 11, 14, 40, 120};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = 5;
    for (std::size_t i = 0; i < 5; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    EXPECT_NEAR(fit_loglog(x, y).slope, slope, 1e-12);
}

TEST(FitLoglog, DegenerateInputsThrow) {
    EXPECT_THROW(fit_loglog({1, 2, 3}, {1, 0, 2}), std::domain_error);
    EXPECT_THROW(fit_loglog({1, 2}, {1, 2}), std::invalid_argument);
    EXPECT_THROW(fit_loglog({1, 2, 3}, {1, 2}), std::invalid_argument);
}

TEST(MeanStddev, SampleDeviation) {
    const auto s = mean_stddev({1, 2, 3, 4});
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_NEAR(s.stddev, std::sqrt(5.0 / 3.0), 1e-15);
    EXPECT_DOUBLE_EQ(mean_stddev({7}).stddev, 0.0);
}

TEST(Config, Defaults) {
    const auto cfg = parse_config(json::object());
    EXPECT_EQ(cfg.preset, Preset::kTheory);
    EXPECT_NEAR(cfg.eviction_constant(), 10.0 * (std::exp(1.0) - 1.0), 1e-12);
    EXPECT_EQ(cfg.algorithm, Algorithm::kMetaFixed);
    EXPECT_EQ(cfg.horizons, (std::vector<std::size_t>{2000}));
}

TEST(Config, ParsesFullDocument) {
    const auto cfg = parse_config(json::parse(R"({
        "environment": {"generator": "flip", "k": 3, "gap": 0.4, "winner": 0, "second_winner": 2},
        "algorithm": {"name": "metabosse", "spec": "unknown"},
        "horizons": [100, 200, 400], "replications": 3, "seed": 9,
        "preset": "empirical", "trace": true, "svg": true, "threads": 2})"));
    EXPECT_EQ(cfg.algorithm, Algorithm::kMetaUnknown);
    EXPECT_EQ(cfg.environment.generator, "flip");
    EXPECT_EQ(cfg.environment.second_winner, 2u);
    EXPECT_EQ(cfg.horizons.size(), 3u);
    EXPECT_DOUBLE_EQ(cfg.eviction_constant(), 1.0);
    // Round trip through the serialized form.
    const auto again = parse_config(cfg.to_json());
    EXPECT_EQ(again.to_json(), cfg.to_json());
}

TEST(Config, ErrorsNameTheOffendingPath) {
    EXPECT_NE(config_error(json{{"horizons", json::array({100, -5})}}).find("horizons[1]"), std::string::npos);
    EXPECT_NE(config_error(json{{"environment", {{"gap", 0.9}}}}).find("environment.gap"), std::string::npos);
    EXPECT_NE(config_error(json{{"environment", {{"generator", "nope"}}}}).find("environment.generator"),
              std::string::npos);
    EXPECT_NE(config_error(json{{"algorithm", {{"name", "exp3"}}}}).find("algorithm.name"), std::string::npos);
    EXPECT_NE(config_error(json{{"algorithm", {{"spec", "both"}}}}).find("algorithm.spec"), std::string::npos);
    EXPECT_NE(config_error(json{{"algorithm", {{"weight", "point:9"}}}}).find("algorithm.weight"),
              std::string::npos);
    EXPECT_NE(config_error(json{{"replications", 0}}).find("replications"), std::string::npos);
    EXPECT_NE(config_error(json{{"preset", "fast"}}).find("preset"), std::string::npos);
    EXPECT_NE(config_error(json{{"colour", 1}}).find("colour: unknown field"), std::string::npos);
    EXPECT_NE(config_error(json{{"environment", {{"generator", "file"}, {"path", "/no/such.json"}}}})
                  .find("environment.path"),
              std::string::npos);
    EXPECT_THROW(load_config("/no/such/config.json"), ConfigError);
}

TEST(Config, InlineEnvironment) {
    const auto cfg = parse_config(json::parse(R"({"environment": {"k": 2, "horizon": 50, "segments": [
        {"len": 30, "matrix": [0.5, 0.8, 0.2, 0.5]},
        {"len": 20, "matrix": [0.5, 0.3, 0.7, 0.5]}]}, "horizons": 40})"));
    EXPECT_EQ(cfg.environment.generator, "inline");
    const auto env = cfg.environment.build(40);
    EXPECT_EQ(env.horizon(), 40u);
    EXPECT_EQ(env.change_points(), (std::vector<std::size_t>{31}));
    EXPECT_THROW(cfg.environment.build(60), ConfigError);
}

TEST(Replication, IdenticalSeedsGiveIdenticalCsv) {
    ExperimentConfig cfg;
    cfg.environment.k = 4;
    cfg.seed = 11;
    cfg.c_evict = 0.05;
    const auto env = cfg.environment.build(3000);
    EXPECT_EQ(ledger_csv(run_replication(cfg, env, 2)), ledger_csv(run_replication(cfg, env, 2)));
    EXPECT_NE(ledger_csv(run_replication(cfg, env, 2)), ledger_csv(run_replication(cfg, env, 3)));
}

TEST(Replication, GoldenLedgerOnPinnedSeed) {
    ExperimentConfig cfg;
    cfg.environment.k = 3;
    cfg.seed = 7;
    cfg.preset = Preset::kEmpirical;
    const auto env = cfg.environment.build(200);
    const std::string got = ledger_csv(run_replication(cfg, env, 0));
    const fs::path golden = fs::path(NSDUEL_TEST_DATA) / "golden_ledger_k3_T200_seed7.csv";
    if (std::getenv("NSDUEL_UPDATE_GOLDEN")) {
        std::ofstream(golden, std::ios::binary) << got;
    }
    ASSERT_TRUE(fs::exists(golden));
    EXPECT_EQ(got, slurp(golden));
}

TEST(Baselines, UniformSlopeIsLinear) {
    // Uniform play on a stationary gap-0.2 environment has constant expected
    // per-round regret, so the log-log slope is 1.
    ExperimentConfig cfg;
    cfg.algorithm = Algorithm::kUniform;
    cfg.horizons = {2000, 4000, 8000, 16000};
    cfg.replications = 20;
    cfg.measures = false;
    const auto sweep = run_sweep(cfg);
    EXPECT_GE(sweep.fit.slope, 0.95);
    EXPECT_LE(sweep.fit.slope, 1.05);
    for (const auto& h : sweep.experiment.horizons) {
        EXPECT_NEAR(h.borda.mean / static_cast<double>(h.horizon), 0.2 * 4.0 / 5.0, 0.01);
    }
}

TEST(Baselines, OracleRestartEqualsBosseOnStationaryEnv) {
    ExperimentConfig cfg;
    cfg.c_evict = 0.05;
    cfg.trace = true;
    const auto env = cfg.environment.build(2000);
    cfg.algorithm = Algorithm::kOracleRestart;
    const auto oracle = run_replication(cfg, env, 0);
    cfg.algorithm = Algorithm::kBosse;
    const auto plain = run_replication(cfg, env, 0);
    EXPECT_EQ(ledger_csv(oracle), ledger_csv(plain));
    EXPECT_EQ(metabosse::episodes_to_json(oracle.episodes), metabosse::episodes_to_json(plain.episodes));
}

TEST(Baselines, OracleRestartUsesOneInstancePerSegment) {
    ExperimentConfig cfg;
    cfg.environment.generator = "flip";
    cfg.environment.k = 3;
    cfg.environment.gap = 0.4;
    cfg.algorithm = Algorithm::kOracleRestart;
    cfg.trace = true;
    const auto env = cfg.environment.build(1000);
    const auto rep = run_replication(cfg, env, 0);
    ASSERT_EQ(rep.episodes.size(), 2u);
    EXPECT_EQ(rep.episodes[1].t_ell, 501u);
    std::set<std::size_t> starts;
    for (const auto& row : rep.trace) starts.insert(row.active_tstart);
    EXPECT_EQ(starts, (std::set<std::size_t>{1, 501}));
}

TEST(Baselines, OracleRestartNoWorseThanBosseOnFlip) {
    ExperimentConfig cfg;
    cfg.environment.generator = "flip";
    cfg.environment.k = 3;
    cfg.environment.gap = 0.4;
    cfg.preset = Preset::kEmpirical;
    cfg.horizons = {4000};
    cfg.replications = 30;
    cfg.measures = false;
    cfg.algorithm = Algorithm::kOracleRestart;
    const double oracle = run_experiment(cfg).horizons[0].borda.mean;
    cfg.algorithm = Algorithm::kBosse;
    const double plain = run_experiment(cfg).horizons[0].borda.mean;
    EXPECT_LE(oracle, plain + 1e-9);
}

TEST(Experiment, SummaryInvariants) {
    ExperimentConfig cfg;
    cfg.environment.k = 3;
    cfg.horizons = {300, 600};
    cfg.replications = 4;
    cfg.c_evict = 0.05;
    const auto res = run_experiment(cfg);
    ASSERT_EQ(res.horizons.size(), 2u);
    for (const auto& h : res.horizons) {
        EXPECT_GE(h.borda.stddev, 0.0);
        EXPECT_EQ(h.final_borda.size(), 4u);
        EXPECT_EQ(h.restart_rounds.size(), 4u);
        ASSERT_EQ(h.curve.size(), h.checkpoints.size());
        for (std::size_t n = 1; n < h.curve.size(); ++n) EXPECT_GE(h.curve[n].mean, h.curve[n - 1].mean);
        EXPECT_EQ(h.checkpoints.back(), h.horizon);
        EXPECT_TRUE(h.condorcet.has_value());
        EXPECT_TRUE(h.measures.has_value());
    }
    const auto j = res.summary_json(cfg);
    EXPECT_TRUE(j.contains("horizons"));
}

TEST(Experiment, ThreadCountDoesNotChangeOutputs) {
    ExperimentConfig cfg;
    cfg.environment.k = 4;
    cfg.horizons = {500};
    cfg.replications = 6;
    cfg.c_evict = 0.05;
    cfg.trace = true;
    cfg.svg = true;
    std::vector<std::string> files;
    for (std::size_t threads : {1u, 4u}) {
        cfg.threads = threads;
        cfg.out = scratch("threads" + std::to_string(threads));
        run_and_write(cfg);
        std::string all;
        for (const auto& e : fs::directory_iterator(cfg.out)) {
            if (e.path().filename() == "timing.json" || e.path().filename() == "config.json") continue;
            files.push_back(e.path().filename().string());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) all += f + "\n" + slurp(cfg.out / f);
        files.clear();
        static std::string first;
        if (threads == 1) {
            first = all;
        } else {
            EXPECT_EQ(all, first);
        }
    }
    EXPECT_TRUE(fs::exists(cfg.out / "regret.svg"));
    EXPECT_TRUE(fs::exists(cfg.out / "ledger_T500_rep5.csv"));
    EXPECT_TRUE(fs::exists(cfg.out / "trace_T500_rep0.jsonl"));
}

TEST(Svg, WellFormedDocument) {
    Curve c{"meta", {1, 2, 3}, {{1, 0.1}, {2, 0.2}, {3, 0.3}}};
    const auto svg = regret_svg({c, Curve{"uniform", {1, 2, 3}, {{2, 0}, {4, 0}, {6, 0}}}}, "regret");
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_NE(svg.find("meta"), std::string::npos);
    EXPECT_NE(svg.find("uniform"), std::string::npos);
    EXPECT_EQ(svg.find("nan"), std::string::npos);
}

TEST(Sweep, NeedsThreeHorizons) {
    ExperimentConfig cfg;
    cfg.horizons = {100, 200};
    EXPECT_THROW(run_sweep(cfg), ConfigError);
}

TEST(SelfCheck, AllPass) {
    for (const auto& c : selfcheck()) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

namespace {

int cli(const std::string& args) {
    const std::string cmd = std::string(NSDUEL_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ExitCodes) {
    const fs::path dir = scratch("cli");
    fs::create_directories(dir);
    EXPECT_EQ(cli("selfcheck"), 0);
    EXPECT_EQ(cli("env dominant --k 3 --horizon 50 --out " + (dir / "env.json").string()), 0);
    EXPECT_EQ(cli("measure " + (dir / "env.json").string()), 0);
    EXPECT_EQ(cli("run --horizon 100 --reps 2 --out " + (dir / "run").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "run" / "summary.json"));
    EXPECT_EQ(cli("sweep --horizon 100 --horizon 200 --horizon 400 --out " + (dir / "sweep").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "sweep" / "sweep.json"));

    std::ofstream(dir / "bad.json") << R"({"horizons": [0]})";
    EXPECT_EQ(cli("run --config " + (dir / "bad.json").string()), 1);
    std::ofstream(dir / "broken.json") << "{ not json";
    EXPECT_EQ(cli("run --config " + (dir / "broken.json").string()), 1);
    EXPECT_EQ(cli("run --bogus-flag"), 1);
    EXPECT_EQ(cli("measure " + (dir / "broken.json").string()), 1);
    // A file horizon shorter than the requested run is a configuration error.
    std::ofstream(dir / "short.json") << json{{"environment", {{"generator", "file"}, {"path", (dir / "env.json").string()}}},
                                             {"horizons", 80}};
    EXPECT_EQ(cli("run --config " + (dir / "short.json").string()), 1);
    // Unwritable output location is a runtime error.
    EXPECT_EQ(cli("run --horizon 50 --out /proc/nsduel_no_write"), 2);
}
