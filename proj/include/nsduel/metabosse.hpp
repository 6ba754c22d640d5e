#pragma once

// Episode management around the base learner: a stack of base instances where
// scheduled replays interrupt the incumbent, and a restart whenever the global
// arm set empties.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsduel/bosse.hpp"
#include "nsduel/ledger.hpp"
#include "nsduel/replay.hpp"

namespace nsduel::metabosse {

enum class RestartCause { kExhausted, kHorizon, kForced };
std::string to_string(RestartCause cause);

struct ReplayRecord {
    std::size_t s = 0;
    std::size_t m = 0;
    /// Last round the instance was on the stack.
    std::size_t end = 0;
};

struct EpisodeRecord {
    std::size_t t_ell = 1;
    std::size_t t_end = 0;
    RestartCause cause = RestartCause::kHorizon;
    std::vector<ReplayRecord> replays;
    std::size_t evictions = 0;
};

struct TraceRow {
    std::size_t t = 0;
    std::size_t episode = 0;
    std::size_t stack_depth = 0;
    std::size_t active_tstart = 0;
    double eta = 1.0;
    Arm i = 0;
    Arm j = 0;
    int o = 0;
};

struct RunOptions {
    /// Scheduled replays; off gives plain BOSSE with restarts.
    bool replays = true;
    /// Rounds at which a new episode is forced (the oracle-restart baseline).
    std::vector<std::size_t> forced_restarts;
    bool trace = false;
    /// Weights whose regret the ledger tracks in addition to Borda and Condorcet.
    std::vector<Weight> tracked;
};

struct RunResult {
    RegretLedger ledger;
    std::vector<EpisodeRecord> episodes;
    std::vector<TraceRow> trace;
    std::vector<bosse::EvictionRecord> evictions;

    /// Rounds at which a restart fired (last round of each exhausted episode).
    std::vector<std::size_t> restart_rounds() const;
};

/// Pops instances with t_start + m0 < t, then pushes BOSSE(t, m) for the largest
/// scheduled m at round t. Returns the spawned m, or 0.
std::size_t stack_arbiter(std::vector<bosse::BaseState>& stack, std::size_t t, const ReplaySchedule* schedule,
                          std::size_t k, std::vector<std::size_t>* popped_starts = nullptr);

/// True iff A_global is empty.
inline bool restart_check(const bosse::EpisodeContext& ctx) { return ctx.a_global_size() == 0; }

RunResult run(const PreferenceSequence& env, const bosse::Specification& spec, const rng::Streams& streams,
              const RunOptions& options = {});

/// Uniform-random baseline: both arms uniform over [K] every round.
RegretLedger run_uniform(const PreferenceSequence& env, const rng::Streams& streams,
                         const std::vector<Weight>& tracked = {});

nlohmann::json episodes_to_json(const std::vector<EpisodeRecord>& episodes);
nlohmann::json trace_row_json(const TraceRow& row);
nlohmann::json eviction_json(const bosse::EvictionRecord& rec);

}  // namespace nsduel::metabosse
