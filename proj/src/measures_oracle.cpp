#include <algorithm>
#include <cmath>

#include "nsduel/measures.hpp"

namespace nsduel::measures::oracle {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

void check_limit(const PreferenceSequence& seq, const Limits& limits) {
    if (seq.horizon() > limits.max_horizon) {
        throw LimitExceeded("oracle: horizon " + std::to_string(seq.horizon()) + " exceeds limit " +
                            std::to_string(limits.max_horizon));
    }
}

// table[t][a][c]: gap of arm a under series c at round t (t is 1-based, index 0 unused).
using GapTable = std::vector<std::vector<std::vector<double>>>;

// Recursion "τ_{i+1} = smallest t such that every arm has a significant interval
// inside [τ_i, t]", evaluated as the latest of the per-arm earliest interval ends.
PhaseList phases_from_table(const GapTable& table, std::size_t K, std::size_t series, double coef) {
    const std::size_t T = table.size() - 1;
    PhaseList phases{1};
    std::size_t start = 1;
    while (true) {
        std::size_t next = 0;
        for (Arm a = 0; a < K && next != kNone; ++a) {
            std::size_t earliest = kNone;
            for (std::size_t c = 0; c < series; ++c) {
                for (std::size_t s1 = start; s1 < T; ++s1) {
                    double running = table[s1][a][c];
                    for (std::size_t s2 = s1 + 1; s2 <= T && s2 < earliest; ++s2) {
                        running += table[s2][a][c];
                        const double len = static_cast<double>(s2 - s1);
                        if (running >= coef * std::pow(len, 2.0 / 3.0)) {
                            earliest = s2;
                            break;
                        }
                    }
                }
            }
            next = earliest == kNone ? kNone : std::max(next, earliest);
        }
        if (next == kNone) break;
        phases.push_back(next);
        start = next;
    }
    return phases;
}

double gap_form_score(const PreferenceMatrix& m, Arm a, std::span<const double> w) {
    double s = 0.0;
    for (Arm b = 0; b < m.k(); ++b) s += (m(a, b) - 0.5) * w[b];
    return s;
}

}  // namespace

PhaseList significant_borda_shifts(const PreferenceSequence& seq, const Limits& limits) {
    check_limit(seq, limits);
    const std::size_t K = seq.k();
    GapTable table(seq.horizon() + 1, std::vector<std::vector<double>>(K, std::vector<double>(1)));
    for (std::size_t t = 1; t <= seq.horizon(); ++t) {
        const auto& m = seq.at(t);
        std::vector<double> b(K);
        for (Arm a = 0; a < K; ++a) {
            double s = 0.0;
            for (Arm x = 0; x < K; ++x) s += m(a, x);
            b[a] = s / static_cast<double>(K);
        }
        const double best = *std::max_element(b.begin(), b.end());
        for (Arm a = 0; a < K; ++a) table[t][a][0] = best - b[a];
    }
    return phases_from_table(table, K, 1, std::pow(static_cast<double>(K), 1.0 / 3.0));
}

PhaseList skw(const PreferenceSequence& seq, const Weight& w, const Limits& limits) {
    check_limit(seq, limits);
    const std::size_t K = seq.k();
    GapTable table(seq.horizon() + 1, std::vector<std::vector<double>>(K, std::vector<double>(1)));
    for (std::size_t t = 1; t <= seq.horizon(); ++t) {
        const auto& m = seq.at(t);
        std::vector<double> b(K);
        for (Arm a = 0; a < K; ++a) b[a] = gap_form_score(m, a, w.values());
        const double best = *std::max_element(b.begin(), b.end());
        for (Arm a = 0; a < K; ++a) table[t][a][0] = best - b[a];
    }
    return phases_from_table(table, K, 1, std::pow(static_cast<double>(K), 1.0 / 3.0));
}

PhaseList suw(const PreferenceSequence& seq, const Limits& limits) {
    check_limit(seq, limits);
    const std::size_t K = seq.k();
    GapTable table(seq.horizon() + 1, std::vector<std::vector<double>>(K, std::vector<double>(K)));
    for (std::size_t t = 1; t <= seq.horizon(); ++t) {
        const auto& m = seq.at(t);
        for (Arm c = 0; c < K; ++c) {
            // Under the point mass on c, b(a) = p(a, c) - 1/2.
            double best = -1.0;
            for (Arm x = 0; x < K; ++x) best = std::max(best, m(x, c));
            for (Arm a = 0; a < K; ++a) table[t][a][c] = best - m(a, c);
        }
    }
    return phases_from_table(table, K, K, std::pow(static_cast<double>(K), 2.0 / 3.0));
}

ApproxPhases approx_winner_changes(const PreferenceSequence& seq) {
    const std::size_t K = seq.k();
    const std::size_t T = seq.horizon();
    const double k2 = static_cast<double>(K * K);
    std::vector<Arm> star(T + 1);
    for (std::size_t t = 1; t <= T; ++t) {
        const auto w = check_gic(seq.at(t));
        if (w.empty()) throw GicViolation(t, "GIC fails at round " + std::to_string(t));
        star[t] = w.front();
    }
    auto holds = [&](Arm x, std::size_t zeta, std::size_t t) {
        for (std::size_t s = zeta + 1; s <= t; ++s) {
            const auto& m = seq.at(s);
            const double tol = std::cbrt(k2 / static_cast<double>(s - zeta));
            for (Arm a = 0; a < K; ++a) {
                if (!(std::abs(m(star[s], a) - m(x, a)) <= tol)) return false;
            }
        }
        return true;
    };
    auto first_valid = [&](std::size_t zeta, std::size_t t) -> std::size_t {
        for (Arm x = 0; x < K; ++x) {
            if (holds(x, zeta, t)) return x;
        }
        return kNone;
    };

    ApproxPhases out;
    std::size_t zeta = 1;
    out.starts.push_back(zeta);
    for (std::size_t t = zeta + 1; t <= T; ++t) {
        if (first_valid(zeta, t) == kNone) {
            out.winners.push_back(first_valid(zeta, t - 1));
            zeta = t;
            out.starts.push_back(zeta);
        }
    }
    out.winners.push_back(first_valid(zeta, T));
    return out;
}

double total_variation(const PreferenceSequence& seq) {
    const std::size_t K = seq.k();
    double v = 0.0;
    for (std::size_t t = 2; t <= seq.horizon(); ++t) {
        const auto& cur = seq.at(t);
        const auto& prev = seq.at(t - 1);
        double jump = 0.0;
        for (Arm c = 0; c < K; ++c) {
            const Weight w = Weight::point_mass(K, c);
            for (Arm a = 0; a < K; ++a) {
                jump = std::max(jump, std::abs(gap_form_score(cur, a, w.values()) -
                                               gap_form_score(prev, a, w.values())));
            }
        }
        v += jump;
    }
    return v;
}

SwitchCounts winner_switch_counts(const PreferenceSequence& seq) {
    const std::size_t K = seq.k();
    auto cw_at = [&](std::size_t t) -> std::size_t {
        const auto& m = seq.at(t);
        for (Arm a = 0; a < K; ++a) {
            bool ok = true;
            for (Arm b = 0; b < K; ++b) ok = ok && m(a, b) >= 0.5 - kTieTolerance;
            if (ok) return a;
        }
        return kNone;
    };
    auto bw_at = [&](std::size_t t) -> Arm {
        const auto& m = seq.at(t);
        std::vector<double> b(K, 0.0);
        for (Arm a = 0; a < K; ++a) {
            for (Arm x = 0; x < K; ++x) b[a] += m(a, x);
            b[a] /= static_cast<double>(K);
        }
        const double best = *std::max_element(b.begin(), b.end());
        for (Arm a = 0; a < K; ++a) {
            if (b[a] >= best - kTieTolerance) return a;
        }
        return 0;
    };
    SwitchCounts out;
    for (std::size_t t = 2; t <= seq.horizon(); ++t) {
        if (cw_at(t) != cw_at(t - 1)) ++out.condorcet;
        if (bw_at(t) != bw_at(t - 1)) ++out.borda;
    }
    return out;
}

std::size_t gic_winner_phases(const PreferenceSequence& seq) {
    std::size_t phases = 1;
    Arm prev = 0;
    for (std::size_t t = 1; t <= seq.horizon(); ++t) {
        const auto w = check_gic(seq.at(t));
        if (w.empty()) throw GicViolation(t, "GIC fails at round " + std::to_string(t));
        if (t > 1 && w.front() != prev) ++phases;
        prev = w.front();
    }
    return phases;
}

}  // namespace nsduel::measures::oracle
