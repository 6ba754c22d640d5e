#include "nsduel/measures.hpp"

#include <algorithm>
#include <cmath>

namespace nsduel::measures {

namespace {

void check_limit(const PreferenceSequence& seq, const Limits& limits, const char* what) {
    if (seq.horizon() > limits.max_horizon) {
        throw LimitExceeded(std::string(what) + ": horizon " + std::to_string(seq.horizon()) +
                            " exceeds the configured limit " + std::to_string(limits.max_horizon));
    }
}

// Per-segment gap tables: gaps[seg][a * series + c] is δ for arm a under series c.
// An arm has significant regret on [s1, s2] when some series sums to at least
// coef·(s2 - s1)^{2/3} over the interval.
PhaseList significant_phases(const PreferenceSequence& seq, std::size_t series,
                             const std::vector<std::vector<double>>& gaps, double coef) {
    const std::size_t T = seq.horizon();
    const std::size_t K = seq.k();
    const std::size_t rows = K * series;

    // prefix[r * (T + 1) + t] = Σ_{s <= t} gap of row r.
    std::vector<double> prefix(rows * (T + 1), 0.0);
    for (const auto& seg : seq.segments()) {
        const auto& g = gaps[seq.segment_index(seg.start)];
        for (std::size_t r = 0; r < rows; ++r) {
            double* p = prefix.data() + r * (T + 1);
            for (std::size_t t = seg.start; t < seg.start + seg.length; ++t) p[t] = p[t - 1] + g[r];
        }
    }
    std::vector<double> threshold(T + 1);
    for (std::size_t n = 0; n <= T; ++n) threshold[n] = coef * std::pow(static_cast<double>(n), 2.0 / 3.0);

    PhaseList phases{1};
    std::size_t start = 1;
    std::vector<char> flagged(K, 0);
    std::size_t remaining = K;
    for (std::size_t t = 2; t <= T; ++t) {
        for (Arm a = 0; a < K; ++a) {
            if (flagged[a]) continue;
            bool hit = false;
            for (std::size_t c = 0; c < series && !hit; ++c) {
                const double* p = prefix.data() + (a * series + c) * (T + 1);
                const double end = p[t];
                for (std::size_t s1 = t - 1; s1 >= start; --s1) {
                    if (end - p[s1 - 1] >= threshold[t - s1]) {
                        hit = true;
                        break;
                    }
                }
            }
            if (hit) {
                flagged[a] = 1;
                --remaining;
            }
        }
        if (remaining == 0) {
            phases.push_back(t);
            start = t;
            std::fill(flagged.begin(), flagged.end(), 0);
            remaining = K;
        }
    }
    return phases;
}

std::vector<double> weighted_gaps(const PreferenceMatrix& m, const Weight& w) {
    std::vector<double> g(m.k());
    for (Arm a = 0; a < m.k(); ++a) g[a] = weighted_gap(m, a, w);
    return g;
}

Arm gic_winner_or_throw(const PreferenceMatrix& m, std::size_t round) {
    const auto winners = check_gic(m);
    if (winners.empty()) {
        throw GicViolation(round, "GIC fails at round " + std::to_string(round));
    }
    return winners.front();
}

}  // namespace

PhaseList skw(const PreferenceSequence& seq, const Weight& w, const Limits& limits) {
    check_limit(seq, limits, "SKW");
    if (w.k() != seq.k()) throw std::invalid_argument("weight and sequence differ in arm count");
    std::vector<std::vector<double>> gaps;
    for (const auto& seg : seq.segments()) gaps.push_back(weighted_gaps(seg.matrix, w));
    return significant_phases(seq, 1, gaps, std::cbrt(static_cast<double>(seq.k())));
}

PhaseList significant_borda_shifts(const PreferenceSequence& seq, const Limits& limits) {
    return skw(seq, Weight::uniform(seq.k()), limits);
}

PhaseList suw(const PreferenceSequence& seq, const Limits& limits) {
    check_limit(seq, limits, "SUW");
    const std::size_t K = seq.k();
    std::vector<Weight> masses;
    for (Arm c = 0; c < K; ++c) masses.push_back(Weight::point_mass(K, c));
    std::vector<std::vector<double>> gaps;
    for (const auto& seg : seq.segments()) {
        std::vector<double> g(K * K);
        for (Arm a = 0; a < K; ++a) {
            for (Arm c = 0; c < K; ++c) g[a * K + c] = weighted_gap(seg.matrix, a, masses[c]);
        }
        gaps.push_back(std::move(g));
    }
    const double k23 = std::cbrt(static_cast<double>(K) * static_cast<double>(K));
    return significant_phases(seq, K, gaps, k23);
}

ApproxPhases approx_winner_changes(const PreferenceSequence& seq) {
    const std::size_t K = seq.k();
    const double k2 = static_cast<double>(K * K);
    const auto& segs = seq.segments();
    // dist[g][x] = max_a |P(a*, a) - P(x, a)| on segment g.
    std::vector<std::vector<double>> dist(segs.size(), std::vector<double>(K));
    for (std::size_t g = 0; g < segs.size(); ++g) {
        const auto& m = segs[g].matrix;
        const Arm star = gic_winner_or_throw(m, segs[g].start);
        for (Arm x = 0; x < K; ++x) {
            double d = 0.0;
            for (Arm a = 0; a < K; ++a) d = std::max(d, std::abs(m(star, a) - m(x, a)));
            dist[g][x] = d;
        }
    }
    // First elapsed count n >= 1 with d > (K²/n)^{1/3}.
    auto first_failing_elapsed = [&](double d) -> std::size_t {
        double guess = std::floor(k2 / (d * d * d)) + 1.0;
        if (guess > 1e15) return static_cast<std::size_t>(-1);
        auto n = static_cast<std::size_t>(guess);
        while (n > 1 && !(d <= std::cbrt(k2 / static_cast<double>(n - 1)))) --n;
        while (d <= std::cbrt(k2 / static_cast<double>(n))) ++n;
        return n;
    };

    constexpr std::size_t kNever = static_cast<std::size_t>(-1);
    ApproxPhases out;
    std::size_t zeta = 1;
    while (true) {
        out.starts.push_back(zeta);
        std::vector<std::size_t> fail(K, kNever);
        for (Arm x = 0; x < K; ++x) {
            for (std::size_t g = seq.segment_index(zeta); g < segs.size(); ++g) {
                const double d = dist[g][x];
                if (d == 0.0) continue;
                const std::size_t lo = std::max(segs[g].start, zeta);
                const std::size_t hi = segs[g].start + segs[g].length - 1;
                const std::size_t n = first_failing_elapsed(d);
                if (n == kNever) continue;
                const std::size_t s = std::max(lo, zeta + n);
                if (s <= hi) {
                    fail[x] = s;
                    break;
                }
            }
        }
        const std::size_t next = *std::min_element(fail.begin(), fail.end()) == kNever
                                     ? kNever
                                     : *std::max_element(fail.begin(), fail.end());
        if (next == kNever) {
            // Open phase: smallest arm that never fails.
            for (Arm x = 0; x < K; ++x) {
                if (fail[x] == kNever) {
                    out.winners.push_back(x);
                    break;
                }
            }
            break;
        }
        for (Arm x = 0; x < K; ++x) {
            if (fail[x] == next) {
                out.winners.push_back(x);
                break;
            }
        }
        zeta = next;
    }
    return out;
}

double total_variation(const PreferenceSequence& seq) {
    const auto& segs = seq.segments();
    double v = 0.0;
    for (std::size_t g = 1; g < segs.size(); ++g) {
        const auto& a = segs[g - 1].matrix.data();
        const auto& b = segs[g].matrix.data();
        double jump = 0.0;
        for (std::size_t e = 0; e < a.size(); ++e) jump = std::max(jump, std::abs(b[e] - a[e]));
        v += jump;
    }
    return v;
}

std::size_t change_count(const PreferenceSequence& seq) {
    const auto& segs = seq.segments();
    std::size_t n = 0;
    for (std::size_t g = 1; g < segs.size(); ++g) n += segs[g].matrix != segs[g - 1].matrix ? 1 : 0;
    return n;
}

SwitchCounts winner_switch_counts(const PreferenceSequence& seq) {
    const auto& segs = seq.segments();
    SwitchCounts out;
    auto cw = condorcet_winner(segs[0].matrix);
    auto bw = borda_winner(segs[0].matrix);
    for (std::size_t g = 1; g < segs.size(); ++g) {
        const auto c = condorcet_winner(segs[g].matrix);
        const auto b = borda_winner(segs[g].matrix);
        if (c != cw) ++out.condorcet;
        if (b != bw) ++out.borda;
        cw = c;
        bw = b;
    }
    return out;
}

std::size_t gic_winner_phases(const PreferenceSequence& seq) {
    const auto& segs = seq.segments();
    std::size_t phases = 1;
    Arm prev = gic_winner_or_throw(segs[0].matrix, segs[0].start);
    for (std::size_t g = 1; g < segs.size(); ++g) {
        const Arm cur = gic_winner_or_throw(segs[g].matrix, segs[g].start);
        if (cur != prev) ++phases;
        prev = cur;
    }
    return phases;
}

std::vector<SegmentFlags> segment_flags(const PreferenceSequence& seq) {
    std::vector<SegmentFlags> out;
    for (const auto& seg : seq.segments()) {
        SegmentFlags f;
        f.start = seg.start;
        f.condorcet_winner = condorcet_winner(seg.matrix);
        f.gic_winners = check_gic(seg.matrix);
        if (seg.matrix.k() <= kMaxOrderSearchArms) {
            f.sst = check_sst(seg.matrix).satisfied;
            f.sti = check_sti(seg.matrix).satisfied;
        }
        out.push_back(std::move(f));
    }
    return out;
}

MeasureRequest MeasureRequest::all(std::size_t k) {
    MeasureRequest r;
    r.sbs = true;
    r.skw = Weight::uniform(k);
    r.suw = true;
    r.approx = true;
    r.tv = true;
    r.switches = true;
    r.flags = true;
    return r;
}

MeasureReport compute(const PreferenceSequence& seq, const MeasureRequest& req) {
    MeasureReport rep;
    rep.oracle = req.oracle;
    if (req.sbs) {
        rep.sbs_phases = req.oracle ? oracle::significant_borda_shifts(seq, req.limits)
                                    : significant_borda_shifts(seq, req.limits);
    }
    if (req.skw) {
        rep.skw_phases.emplace(*req.skw, req.oracle ? oracle::skw(seq, *req.skw, req.limits)
                                                    : skw(seq, *req.skw, req.limits));
    }
    if (req.suw) rep.suw_phases = req.oracle ? oracle::suw(seq, req.limits) : suw(seq, req.limits);
    if (req.approx) {
        try {
            rep.approx_phases = req.oracle ? oracle::approx_winner_changes(seq) : approx_winner_changes(seq);
        } catch (const GicViolation& e) {
            rep.approx_error = e.what();
        }
    }
    if (req.tv) {
        rep.v_total = req.oracle ? oracle::total_variation(seq) : total_variation(seq);
        rep.changes = change_count(seq);
    }
    if (req.switches) rep.switches = req.oracle ? oracle::winner_switch_counts(seq) : winner_switch_counts(seq);
    if (req.flags) rep.flags = segment_flags(seq);
    return rep;
}

nlohmann::json MeasureReport::to_json() const {
    using nlohmann::json;
    json j = json::object();
    j["oracle"] = oracle;
    if (sbs_phases) j["sbs"] = {{"phases", *sbs_phases}, {"count", sbs_phases->size()}};
    if (skw_phases) {
        j["skw"] = {{"weight", skw_phases->first.label()},
                    {"phases", skw_phases->second},
                    {"count", skw_phases->second.size()}};
    }
    if (suw_phases) j["suw"] = {{"phases", *suw_phases}, {"count", suw_phases->size()}};
    if (approx_phases) {
        j["approx"] = {{"phases", approx_phases->starts},
                       {"winners", approx_phases->winners},
                       {"count", approx_phases->starts.size()}};
    } else if (approx_error) {
        j["approx"] = {{"error", *approx_error}};
    }
    if (v_total) j["v_total"] = *v_total;
    if (changes) j["changes"] = *changes;
    if (switches) j["switches"] = {{"condorcet", switches->condorcet}, {"borda", switches->borda}};
    if (!flags.empty()) {
        json arr = json::array();
        for (const auto& f : flags) {
            json e = {{"start", f.start}, {"gic_winners", f.gic_winners}};
            e["condorcet_winner"] = f.condorcet_winner ? json(*f.condorcet_winner) : json(nullptr);
            e["sst"] = f.sst ? json(*f.sst) : json(nullptr);
            e["sti"] = f.sti ? json(*f.sti) : json(nullptr);
            arr.push_back(std::move(e));
        }
        j["flags"] = std::move(arr);
    }
    return j;
}

}  // namespace nsduel::measures
