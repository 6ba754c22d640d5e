#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "nsduel/metabosse.hpp"
#include "test_util.hpp"

using namespace nsduel;
using namespace nsduel::bosse;
using metabosse::RestartCause;

TEST(ReplaySchedule, DyadicGrid) {
    EXPECT_EQ(dyadic_grid(100), (std::vector<std::size_t>{2, 4, 8, 16, 32, 64, 128}));
    EXPECT_EQ(dyadic_grid(128), (std::vector<std::size_t>{2, 4, 8, 16, 32, 64, 128}));
    EXPECT_EQ(dyadic_grid(129).back(), 256u);
    EXPECT_EQ(dyadic_grid(1), (std::vector<std::size_t>{2}));
    EXPECT_EQ(dyadic_grid(2), (std::vector<std::size_t>{2}));
}

TEST(ReplaySchedule, ProbabilityFormulaAndClamp) {
    const ReplaySchedule sched(rng::Streams::from_seed(1).replay, 0, 10, 1000);
    EXPECT_NEAR(sched.probability(37, 8), 1.0 / 18.0, 1e-15);
    EXPECT_NEAR(sched.probability(11, 2), 1.0 / std::cbrt(2.0), 1e-15);
    EXPECT_DOUBLE_EQ(sched.probability(10, 2), 0.0);
    EXPECT_DOUBLE_EQ(sched.probability(5, 2), 0.0);
    EXPECT_FALSE(sched.bit(10, 2));
}

TEST(ReplaySchedule, BitsAreImmutableAndFrequenciesMatch) {
    // Empirical frequency of B_{s,m} over many episodes against the clamp formula.
    const auto stream = rng::Streams::from_seed(77).replay;
    const std::size_t s = 40, m = 8, t_ell = 13;
    const double p = 1.0 / (2.0 * std::cbrt(27.0 * 27.0));
    std::size_t hits = 0;
    const std::size_t n = 200000;
    for (std::size_t e = 0; e < n; ++e) {
        const ReplaySchedule sched(stream, e, t_ell, 1000);
        const bool b = sched.bit(s, m);
        EXPECT_EQ(b, sched.bit(s, m));
        hits += b ? 1 : 0;
    }
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
    EXPECT_NEAR(static_cast<double>(hits) / static_cast<double>(n), p, 5 * se);
}

TEST(ReplaySchedule, MaxReplayIsLargestSetBit) {
    const ReplaySchedule sched(rng::Streams::from_seed(3).replay, 2, 1, 5000);
    for (std::size_t s = 2; s <= 5000; ++s) {
        std::size_t want = 0;
        for (std::size_t m : sched.grid()) {
            if (sched.bit(s, m)) want = m;
        }
        ASSERT_EQ(sched.max_replay(s), want) << s;
    }
}

namespace {

// Finds a round s (> t_ell) whose set bits are exactly `bits`.
std::optional<std::pair<ReplaySchedule, std::size_t>> find_bits(const std::vector<std::size_t>& bits) {
    const auto stream = rng::Streams::from_seed(5).replay;
    for (std::size_t e = 0; e < 2000; ++e) {
        ReplaySchedule sched(stream, e, 1, 256);
        for (std::size_t s = 2; s <= 256; ++s) {
            std::vector<std::size_t> set;
            for (std::size_t m : sched.grid()) {
                if (sched.bit(s, m)) set.push_back(m);
            }
            if (set == bits) return std::make_pair(sched, s);
        }
    }
    return std::nullopt;
}

}  // namespace

TEST(StackArbiter, NoBitsLeavesIncumbent) {
    const auto found = find_bits({});
    ASSERT_TRUE(found);
    std::vector<BaseState> stack{BaseState(3, 1, 256)};
    EXPECT_EQ(metabosse::stack_arbiter(stack, found->second, &found->first, 3), 0u);
    ASSERT_EQ(stack.size(), 1u);
    EXPECT_EQ(stack.back().t_start, 1u);
}

TEST(StackArbiter, LargestSetBitSpawns) {
    const auto found = find_bits({4, 16});
    ASSERT_TRUE(found);
    std::vector<BaseState> stack{BaseState(3, 1, 256)};
    stack.back().evict(2);
    const std::size_t s = found->second;
    EXPECT_EQ(metabosse::stack_arbiter(stack, s, &found->first, 3), 16u);
    ASSERT_EQ(stack.size(), 2u);
    EXPECT_EQ(stack.back().t_start, s);
    EXPECT_EQ(stack.back().m0, 16u);
    EXPECT_EQ(stack.back().active_count, 3u);  // fresh A = [K]
    EXPECT_EQ(stack.front().active_count, 2u);  // the parent keeps its own A
}

TEST(StackArbiter, PopsExpiredButNeverTheStarter) {
    std::vector<BaseState> stack{BaseState(2, 1, 3), BaseState(2, 2, 4), BaseState(2, 3, 2)};
    std::vector<std::size_t> popped;
    metabosse::stack_arbiter(stack, 5, nullptr, 2, &popped);
    EXPECT_EQ(stack.size(), 3u);  // top plays rounds 3..5
    metabosse::stack_arbiter(stack, 6, nullptr, 2, &popped);
    EXPECT_EQ(stack.size(), 2u);  // middle plays 2..6
    metabosse::stack_arbiter(stack, 7, nullptr, 2, &popped);
    EXPECT_EQ(stack.size(), 1u);
    metabosse::stack_arbiter(stack, 100, nullptr, 2, &popped);
    EXPECT_EQ(stack.size(), 1u);
    EXPECT_EQ(popped, (std::vector<std::size_t>{3, 2}));
}

TEST(RestartCheck, EmptyGlobalSetOnly) {
    EpisodeContext ctx(3, 10, 1);
    ctx.reset(1);
    ctx.evict_global(0);
    ctx.evict_global(1);
    EXPECT_FALSE(metabosse::restart_check(ctx));
    ctx.evict_global(2);
    EXPECT_TRUE(metabosse::restart_check(ctx));
}

namespace {

metabosse::RunResult traced(const PreferenceSequence& env, const Specification& spec, std::uint64_t seed,
                            metabosse::RunOptions opts = {}) {
    opts.trace = true;
    return metabosse::run(env, spec, rng::Streams::from_seed(seed), opts);
}

void expect_partition(const metabosse::RunResult& r, std::size_t T) {
    ASSERT_FALSE(r.episodes.empty());
    std::size_t next = 1, total = 0;
    for (const auto& e : r.episodes) {
        EXPECT_EQ(e.t_ell, next);
        EXPECT_GE(e.t_end, e.t_ell);
        total += e.t_end - e.t_ell + 1;
        next = e.t_end + 1;
        for (const auto& rep : e.replays) {
            EXPECT_GT(rep.s, e.t_ell);
            EXPECT_LE(rep.end, e.t_end);
            EXPECT_GE(rep.end, std::min(rep.s + rep.m, e.t_end));
        }
    }
    EXPECT_EQ(total, T);
    // A restart on round T itself closes the last episode as exhausted.
    if (r.episodes.back().cause != RestartCause::kHorizon) {
        EXPECT_EQ(r.episodes.back().cause, RestartCause::kExhausted);
    }
    EXPECT_EQ(r.ledger.rounds(), T);
}

}  // namespace

TEST(Run, EpisodesPartitionHorizonAndRatesFollowTheTop) {
    std::mt19937_64 gen(9);
    std::size_t restarts = 0, deep_rounds = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t k = 2 + seed % 3;
        const auto env = fixtures::random_piecewise(gen, k, 1500, 3, true);
        const auto spec = seed % 2 ? Specification::unknown_weight(k, 0.02)
                                   : Specification::fixed_weight(Weight::uniform(k), 0.05);
        const auto r = traced(env, spec, seed);
        expect_partition(r, env.horizon());
        ASSERT_EQ(r.trace.size(), env.horizon());
        for (const auto& row : r.trace) {
            const auto& ep = r.episodes[row.episode];
            EXPECT_GE(row.stack_depth, 1u);
            EXPECT_DOUBLE_EQ(row.eta, spec.gamma(row.t - row.active_tstart));
            EXPECT_GE(row.eta, spec.gamma(row.t - ep.t_ell));  // never below the starter's rate
            deep_rounds += row.stack_depth >= 3 ? 1 : 0;
        }
        std::size_t exhausted = 0;
        for (std::size_t e = 0; e < r.episodes.size(); ++e) {
            const auto& ep = r.episodes[e];
            if (e + 1 == r.episodes.size() && ep.cause == RestartCause::kHorizon) break;
            EXPECT_EQ(ep.cause, RestartCause::kExhausted);
            ++exhausted;
            // The episode closes on the round its last global arm left.
            std::size_t last_global = 0;
            for (const auto& ev : r.evictions) {
                if (ev.scope == Scope::kGlobal && ev.round >= ep.t_ell && ev.round <= ep.t_end) {
                    last_global = std::max(last_global, ev.round);
                }
            }
            EXPECT_EQ(last_global, ep.t_end);
            ++restarts;
        }
        EXPECT_EQ(r.restart_rounds().size(), exhausted);
    }
    EXPECT_GT(restarts, 0u) << "the small constants should force restarts";
    EXPECT_GT(deep_rounds, 0u) << "nested replays should occur";
}

TEST(Run, NestedReplayUsesGrandchildRate) {
    const auto env = envs::gen_stationary(envs::dominant_arm(3, 0.2, 0), 3000);
    const auto spec = Specification::fixed_weight(Weight::uniform(3), kTheoryC);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto r = traced(env, spec, seed);
        for (std::size_t n = 1; n < r.trace.size(); ++n) {
            const auto& row = r.trace[n];
            if (row.stack_depth >= 3 && r.trace[n - 1].stack_depth < row.stack_depth) {
                // A spawn at t: the newest instance plays with elapsed time 0.
                EXPECT_EQ(row.active_tstart, row.t);
                EXPECT_DOUBLE_EQ(row.eta, 1.0);
                return;
            }
        }
    }
    FAIL() << "no nested replay found";
}

TEST(Run, ForcedRestartsOpenEpisodes) {
    const auto env = envs::gen_stationary(envs::dominant_arm(3, 0.2, 0), 600);
    const auto spec = Specification::fixed_weight(Weight::uniform(3), kTheoryC);
    metabosse::RunOptions opts;
    opts.replays = false;
    opts.forced_restarts = {201, 401};
    const auto r = traced(env, spec, 1, opts);
    ASSERT_EQ(r.episodes.size(), 3u);
    EXPECT_EQ(r.episodes[0].t_end, 200u);
    EXPECT_EQ(r.episodes[0].cause, RestartCause::kForced);
    EXPECT_EQ(r.episodes[1].t_ell, 201u);
    EXPECT_EQ(r.episodes[2].t_ell, 401u);
    expect_partition(r, 600);
    for (const auto& row : r.trace) EXPECT_EQ(row.stack_depth, 1u);
}

TEST(Run, ByteIdenticalTraces) {
    const auto env = envs::gen_stationary(envs::dominant_arm(4, 0.2, 1), 2000);
    const auto spec = Specification::unknown_weight(4, 0.05);
    auto dump = [&] {
        const auto r = traced(env, spec, 123);
        std::string s;
        for (const auto& row : r.trace) s += metabosse::trace_row_json(row).dump() + "\n";
        for (const auto& ev : r.evictions) s += metabosse::eviction_json(ev).dump() + "\n";
        s += metabosse::episodes_to_json(r.episodes).dump();
        std::ostringstream csv;
        r.ledger.write_csv(csv);
        return s + csv.str();
    };
    EXPECT_EQ(dump(), dump());
}

TEST(Run, TracingDoesNotChangeTrajectories) {
    const auto env = envs::gen_stationary(envs::dominant_arm(3, 0.3, 2), 1500);
    const auto spec = Specification::fixed_weight(Weight::uniform(3), 0.05);
    const auto streams = rng::Streams::from_seed(8);
    metabosse::RunOptions on;
    on.trace = true;
    std::ostringstream a, b;
    metabosse::run(env, spec, streams, on).ledger.write_csv(a);
    metabosse::run(env, spec, streams).ledger.write_csv(b);
    EXPECT_EQ(a.str(), b.str());
}

TEST(Run, StationaryTheoryPresetRarelyRestarts) {
    const auto env = envs::gen_stationary(envs::dominant_arm(5, 0.2, 0), 3000);
    const auto spec = Specification::fixed_weight(Weight::uniform(5), kTheoryC);
    std::size_t clean = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto r = metabosse::run(env, spec, rng::Streams::from_seed(seed));
        clean += r.restart_rounds().empty() ? 1 : 0;
    }
    EXPECT_GE(clean, 48u);  // ≥ 95% of 50
}

TEST(Run, UniformBaselineMatchesArmCount) {
    const auto env = envs::gen_stationary(envs::dominant_arm(4, 0.2, 0), 4000);
    const auto ledger = metabosse::run_uniform(env, rng::Streams::from_seed(2));
    // Expected per-round Borda regret of uniform play: (3/4)·0.2 per arm draw, averaged over both arms.
    EXPECT_NEAR(ledger.final_borda() / 4000.0, 0.75 * 0.2, 0.01);
}

TEST(Run, MismatchedArmCountThrows) {
    const auto env = envs::gen_stationary(envs::dominant_arm(3, 0.2, 0), 10);
    EXPECT_THROW(metabosse::run(env, Specification::unknown_weight(4, 1.0), rng::Streams::from_seed(1)),
                 std::invalid_argument);
}
