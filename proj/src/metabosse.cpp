#include "nsduel/metabosse.hpp"

#include <algorithm>
#include <set>

namespace nsduel::metabosse {

std::string to_string(RestartCause cause) {
    switch (cause) {
        case RestartCause::kExhausted: return "exhausted-arms";
        case RestartCause::kHorizon: return "horizon";
        case RestartCause::kForced: return "forced";
    }
    return "unknown";
}

std::vector<std::size_t> RunResult::restart_rounds() const {
    std::vector<std::size_t> out;
    for (const auto& e : episodes) {
        if (e.cause == RestartCause::kExhausted) out.push_back(e.t_end);
    }
    return out;
}

std::size_t stack_arbiter(std::vector<bosse::BaseState>& stack, std::size_t t, const ReplaySchedule* schedule,
                          std::size_t k, std::vector<std::size_t>* popped_starts) {
    while (stack.size() > 1 && bosse::is_expired(stack.back(), t)) {
        if (popped_starts) popped_starts->push_back(stack.back().t_start);
        stack.pop_back();
    }
    if (!schedule) return 0;
    const std::size_t m = schedule->max_replay(t);
    if (m > 0) stack.emplace_back(k, t, m);
    return m;
}

namespace {

struct Episode {
    EpisodeRecord record;
    ReplaySchedule schedule;
    // Index into record.replays for every stack frame above the starter.
    std::vector<std::size_t> frame_replay;
};

}  // namespace

RunResult run(const PreferenceSequence& env, const bosse::Specification& spec, const rng::Streams& streams,
              const RunOptions& options) {
    if (env.k() != spec.k()) throw std::invalid_argument("environment and specification differ in arm count");
    const std::size_t K = env.k();
    const std::size_t T = env.horizon();
    RunResult result{RegretLedger(options.tracked), {}, {}, {}};
    bosse::EpisodeContext ctx(K, T, spec.weights().size());
    const std::set<std::size_t> forced(options.forced_restarts.begin(), options.forced_restarts.end());

    std::vector<bosse::BaseState> stack;
    std::optional<Episode> ep;
    auto open_episode = [&](std::size_t t_ell) {
        ctx.reset(t_ell);
        const std::size_t index = result.episodes.size();
        ep.emplace(Episode{EpisodeRecord{t_ell, 0, RestartCause::kHorizon, {}, 0},
                           ReplaySchedule(streams.replay, index, t_ell, T), {}});
        stack.clear();
        stack.emplace_back(K, t_ell, T + 1 - t_ell);
    };
    auto close_episode = [&](std::size_t t_end, RestartCause cause) {
        ep->record.t_end = t_end;
        ep->record.cause = cause;
        // Replays still on the stack are truncated here.
        for (std::size_t idx : ep->frame_replay) ep->record.replays[idx].end = t_end;
        result.episodes.push_back(std::move(ep->record));
        ep.reset();
        stack.clear();
    };

    open_episode(1);
    std::vector<std::size_t> popped;
    for (std::size_t t = 1; t <= T; ++t) {
        if (!ep) {
            open_episode(t);
        } else if (t > ep->record.t_ell && forced.count(t)) {
            close_episode(t - 1, RestartCause::kForced);
            open_episode(t);
        }

        popped.clear();
        const std::size_t m = stack_arbiter(stack, t, options.replays ? &ep->schedule : nullptr, K, &popped);
        for (std::size_t n = 0; n < popped.size(); ++n) {
            ep->record.replays[ep->frame_replay.back()].end = t - 1;
            ep->frame_replay.pop_back();
        }
        if (m > 0) {
            ep->frame_replay.push_back(ep->record.replays.size());
            ep->record.replays.push_back(ReplayRecord{t, m, 0});
        }

        bosse::BaseState& top = stack.back();
        const std::size_t play_size = top.active_count;
        const std::size_t depth = stack.size();
        const std::size_t episode = result.episodes.size();
        const auto out = bosse::step(top, ctx, spec, t, env, streams);

        result.ledger.record(env, out.duel, RoundMeta{episode, depth, play_size});
        ep->record.evictions += out.evictions.local.size() + out.evictions.global.size();
        if (options.trace) {
            result.trace.push_back(
                TraceRow{t, episode, depth, top.t_start, out.eta, out.duel.i, out.duel.j, out.duel.o});
            for (const auto& r : out.evictions.local) result.evictions.push_back(r);
            for (const auto& r : out.evictions.global) result.evictions.push_back(r);
        }
        if (out.restart) close_episode(t, RestartCause::kExhausted);
    }
    if (ep) close_episode(T, RestartCause::kHorizon);
    return result;
}

RegretLedger run_uniform(const PreferenceSequence& env, const rng::Streams& streams,
                         const std::vector<Weight>& tracked) {
    const std::size_t K = env.k();
    const std::vector<double> q(K, 1.0 / static_cast<double>(K));
    RegretLedger ledger(tracked);
    for (std::size_t t = 1; t <= env.horizon(); ++t) {
        const Arm i = bosse::sample_arm(q, streams.action, t, 0);
        const Arm j = bosse::sample_arm(q, streams.action, t, 1);
        ledger.record(env, sample_duel(env, t, i, j, streams.environment), RoundMeta{0, 1, K});
    }
    return ledger;
}

nlohmann::json episodes_to_json(const std::vector<EpisodeRecord>& episodes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : episodes) {
        nlohmann::json replays = nlohmann::json::array();
        for (const auto& r : e.replays) replays.push_back({{"s", r.s}, {"m", r.m}, {"end", r.end}});
        arr.push_back({{"t_ell", e.t_ell},
                       {"t_end", e.t_end},
                       {"restart_cause", to_string(e.cause)},
                       {"evictions", e.evictions},
                       {"replays", replays}});
    }
    return arr;
}

nlohmann::json trace_row_json(const TraceRow& row) {
    return {{"t", row.t},     {"episode", row.episode}, {"stack_depth", row.stack_depth},
            {"active_tstart", row.active_tstart}, {"eta", row.eta}, {"i", row.i},
            {"j", row.j}, {"o", row.o}};
}

nlohmann::json eviction_json(const bosse::EvictionRecord& rec) {
    return {{"round", rec.round},
            {"arm", rec.arm},
            {"s1", rec.s1},
            {"s2", rec.s2},
            {"weight_id", rec.weight_id},
            {"lhs", rec.lhs},
            {"threshold", rec.threshold},
            {"scope", rec.scope == bosse::Scope::kLocal ? "local" : "global"}};
}

}  // namespace nsduel::metabosse
