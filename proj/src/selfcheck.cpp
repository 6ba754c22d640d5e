#include <cmath>
#include <random>
#include <sstream>

#include "nsduel/harness.hpp"
#include "nsduel/replay.hpp"

namespace nsduel::harness {

namespace {

CheckResult check(std::string name, bool ok, std::string detail = {}) {
    return CheckResult{std::move(name), ok, std::move(detail)};
}

CheckResult conflict_facts() {
    const auto m = envs::conflict_3x3();
    const auto cw = condorcet_winner(m);
    const Weight cw_mass = Weight::point_mass(3, 0);
    const bool ok = cw && *cw == 0 && borda_winner(m) == 1 &&
                    std::abs(weighted_gap(m, 1, cw_mass) - 0.1) < 1e-12 &&
                    std::abs(weighted_gap(m, 2, cw_mass) - 0.1) < 1e-12 &&
                    std::abs(borda_score(m, 1) - borda_score(m, 0) - 1.0 / 15.0) < 1e-12;
    return check("conflict matrix winners and gaps", ok);
}

CheckResult estimator_enumeration() {
    std::mt19937_64 gen(12345);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t k = 2 + trial % 4;
        const auto m = PreferenceMatrix::from_upper(k, [&](Arm, Arm) { return u(gen); });
        std::vector<double> q(k), w(k);
        double qs = 0.0, ws = 0.0;
        for (Arm a = 0; a < k; ++a) {
            q[a] = 0.05 + u(gen);
            qs += q[a];
            w[a] = u(gen);
            ws += w[a];
        }
        for (Arm a = 0; a < k; ++a) {
            q[a] /= qs;
            w[a] /= ws;
        }
        const Weight weight(w);
        for (Arm a = 0; a < k; ++a) {
            double expect = 0.0;
            for (Arm i = 0; i < k; ++i) {
                for (Arm j = 0; j < k; ++j) {
                    for (int o = 0; o <= 1; ++o) {
                        const double po = o ? m(i, j) : 1.0 - m(i, j);
                        expect += q[i] * q[j] * po * bosse::estimate_wbs(DuelOutcome{1, i, j, o}, q, a, weight);
                    }
                }
            }
            worst = std::max(worst, std::abs(expect - weighted_borda_score(m, a, weight)));
        }
    }
    return check("estimator expectation equals the weighted score", worst <= 1e-12,
                 "max deviation " + std::to_string(worst));
}

CheckResult measure_oracles() {
    std::mt19937_64 gen(777);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t k = 2 + trial % 3;
        std::vector<std::pair<std::size_t, PreferenceMatrix>> segs;
        for (int s = 0; s < 3; ++s) {
            segs.emplace_back(10 + gen() % 30, PreferenceMatrix::from_upper(k, [&](Arm, Arm) { return u(gen); }));
        }
        const auto seq = PreferenceSequence::piecewise(std::move(segs));
        if (measures::significant_borda_shifts(seq) != measures::oracle::significant_borda_shifts(seq) ||
            measures::suw(seq) != measures::oracle::suw(seq) ||
            std::abs(measures::total_variation(seq) - measures::oracle::total_variation(seq)) > 1e-9) {
            return check("optimized measures match brute force", false, "trial " + std::to_string(trial));
        }
    }
    return check("optimized measures match brute force", true);
}

CheckResult replay_probability() {
    const ReplaySchedule sched(rng::Stream(1, "replay"), 0, 1, 100);
    const bool ok = std::abs(sched.probability(28, 8) - 1.0 / 18.0) < 1e-12 && sched.grid().size() == 7 &&
                    sched.grid().back() == 128;
    return check("replay probability and dyadic grid", ok);
}

CheckResult determinism() {
    ExperimentConfig cfg;
    cfg.environment.k = 3;
    cfg.environment.gap = 0.3;
    cfg.horizons = {300};
    cfg.replications = 3;
    cfg.seed = 99;
    cfg.measures = false;
    auto csv = [&](std::size_t threads) {
        cfg.threads = threads;
        std::string all;
        run_experiment(cfg, [&](std::size_t, const Replication& rep) {
            std::ostringstream s;
            rep.ledger.write_csv(s);
            all += s.str();
        });
        return all;
    };
    const std::string a = csv(1);
    const std::string b = csv(3);
    return check("identical seeds give identical ledgers", a == b && !a.empty());
}

}  // namespace

std::vector<CheckResult> selfcheck() {
    return {conflict_facts(), estimator_enumeration(), measure_oracles(), replay_probability(), determinism()};
}

}  // namespace nsduel::harness
