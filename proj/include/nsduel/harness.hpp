#pragma once

// Experiment orchestration: configuration, seeded replications, baselines,
// summaries, slope fits and file output.

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsduel/bosse.hpp"
#include "nsduel/ledger.hpp"
#include "nsduel/measures.hpp"
#include "nsduel/metabosse.hpp"
#include "nsduel/preference.hpp"

namespace nsduel::harness {

/// Invalid configuration; the message names the offending JSON path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EnvironmentConfig {
    /// dominant | flip | borda-hardness | conflict | gic-pair | gic-k-hardness | file | inline
    std::string generator = "dominant";
    std::size_t k = 5;
    double gap = 0.2;
    Arm winner = 0;
    /// flip: arm that wins after the flip, and the flip position as a fraction of T.
    Arm second_winner = 1;
    double flip_fraction = 0.5;
    double epsilon = 0.01;
    Arm a = 0;
    Arm a_prime = 0;
    std::filesystem::path path;
    std::optional<PreferenceSequence> sequence;  // file / inline

    /// Builds the environment for horizon T (file and inline sequences are truncated).
    PreferenceSequence build(std::size_t horizon) const;
    nlohmann::json to_json() const;
};

enum class Algorithm { kMetaFixed, kMetaUnknown, kBosse, kUniform, kOracleRestart };
std::string to_string(Algorithm a);

enum class Preset { kTheory, kEmpirical };
double preset_constant(Preset p);
std::string to_string(Preset p);

struct ExperimentConfig {
    EnvironmentConfig environment;
    Algorithm algorithm = Algorithm::kMetaFixed;
    /// Reference weight of the fixed-weight specification (also used by bosse and oracle-restart).
    std::string weight = "uniform";
    /// bosse and oracle-restart: "fixed" or "unknown" specification.
    bool unknown_spec = false;
    std::vector<std::size_t> horizons{2000};
    std::size_t replications = 1;
    std::uint64_t seed = 1;
    Preset preset = Preset::kTheory;
    std::optional<double> c_evict;  // overrides the preset
    std::filesystem::path out;
    bool trace = false;
    bool svg = false;
    bool measures = true;
    /// 0 = hardware concurrency.
    std::size_t threads = 0;

    double eviction_constant() const { return c_evict.value_or(preset_constant(preset)); }
    nlohmann::json to_json() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Specification for the configured algorithm, or nullopt for the uniform baseline.
std::optional<bosse::Specification> make_spec(const ExperimentConfig& cfg, std::size_t k);

struct Replication {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    RegretLedger ledger;
    std::vector<metabosse::EpisodeRecord> episodes;
    std::vector<metabosse::TraceRow> trace;
    std::vector<bosse::EvictionRecord> evictions;
};

/// One replication at one horizon; seed = derive_seed(master, index).
Replication run_replication(const ExperimentConfig& cfg, const PreferenceSequence& env, std::size_t index);

struct Stat {
    double mean = 0.0;
    double stddev = 0.0;
};
Stat mean_stddev(const std::vector<double>& xs);

struct HorizonSummary {
    std::size_t horizon = 0;
    Stat borda;
    std::optional<Stat> condorcet;  // unset when some round has no Condorcet winner
    std::size_t condorcet_undefined_rounds = 0;
    std::vector<double> final_borda;
    std::vector<std::vector<std::size_t>> restart_rounds;  // per replication
    std::vector<std::size_t> checkpoints;
    std::vector<Stat> curve;  // cumulative Borda regret at the checkpoints
    std::optional<nlohmann::json> measures;
};

struct ExperimentResult {
    std::vector<HorizonSummary> horizons;
    double wall_seconds = 0.0;
    nlohmann::json summary_json(const ExperimentConfig& cfg) const;
};

/// Sink for finished replications (called from the reducing thread in index order).
using ReplicationSink = std::function<void(std::size_t horizon, const Replication&)>;

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ReplicationSink& sink = {});

/// Runs the experiment and writes ledgers, episodes, traces, summary and plots to cfg.out.
ExperimentResult run_and_write(const ExperimentConfig& cfg);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
};
/// Least-squares slope of log(y) on log(x). Needs >= 3 points and positive y.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Experiment over >= 3 horizons with a slope fit of the mean final Borda regret.
struct SweepResult {
    ExperimentResult experiment;
    SlopeFit fit;
};
SweepResult run_sweep(const ExperimentConfig& cfg);

// Plot output.
struct Curve {
    std::string label;
    std::vector<double> x;
    std::vector<Stat> y;
};
std::string regret_svg(const std::vector<Curve>& curves, const std::string& title);

// Self-check used by the CLI: a handful of quick end-to-end assertions.
struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};
std::vector<CheckResult> selfcheck();

}  // namespace nsduel::harness
