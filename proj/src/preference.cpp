#include "nsduel/preference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace nsduel {

std::string Violation::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::kShape: os << "shape mismatch: expected " << i << " entries, got " << j; break;
        case Kind::kRange: os << "entry (" << i << "," << j << ") outside [0,1] by " << magnitude; break;
        case Kind::kDiagonal: os << "diagonal (" << i << "," << i << ") differs from 1/2 by " << magnitude; break;
        case Kind::kSkew: os << "p(" << i << "," << j << ") + p(" << j << "," << i << ") differs from 1 by " << magnitude; break;
    }
    return os.str();
}

std::vector<Violation> validate(std::span<const double> p, std::size_t k) {
    std::vector<Violation> out;
    if (k < 2 || p.size() != k * k) {
        out.push_back({Violation::Kind::kShape, k * k, p.size(), 0.0});
        return out;
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double v = p[i * k + j];
            if (!(v >= 0.0 && v <= 1.0)) {
                const double mag = std::isfinite(v) ? (v < 0.0 ? -v : v - 1.0) : INFINITY;
                out.push_back({Violation::Kind::kRange, i, j, mag});
            }
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        const double d = std::abs(p[i * k + i] - 0.5);
        if (!(d <= kTieTolerance)) out.push_back({Violation::Kind::kDiagonal, i, i, d});
        for (std::size_t j = i + 1; j < k; ++j) {
            const double s = std::abs(p[i * k + j] + p[j * k + i] - 1.0);
            if (!(s <= kTieTolerance)) out.push_back({Violation::Kind::kSkew, i, j, s});
        }
    }
    return out;
}

PreferenceMatrix::PreferenceMatrix(std::size_t k, std::vector<double> row_major)
    : k_(k), p_(std::move(row_major)) {
    auto violations = validate(p_, k_);
    if (!violations.empty()) {
        std::string msg = "invalid preference matrix: " + violations.front().describe();
        if (violations.size() > 1) msg += " (+" + std::to_string(violations.size() - 1) + " more)";
        throw InvalidMatrix(msg, std::move(violations));
    }
}

PreferenceMatrix PreferenceMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t k = rows.size();
    std::vector<double> flat;
    flat.reserve(k * k);
    for (const auto& r : rows) {
        if (r.size() != k) {
            throw InvalidMatrix("invalid preference matrix: ragged rows",
                                {{Violation::Kind::kShape, k, r.size(), 0.0}});
        }
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return PreferenceMatrix(k, std::move(flat));
}

PreferenceMatrix PreferenceMatrix::uniform(std::size_t k) {
    return PreferenceMatrix(k, std::vector<double>(k * k, 0.5));
}

PreferenceMatrix PreferenceMatrix::with_entry(Arm i, Arm j, double value) const {
    if (i >= k_ || j >= k_ || i == j) throw std::out_of_range("with_entry: bad index");
    std::vector<double> p = p_;
    p[i * k_ + j] = value;
    p[j * k_ + i] = 1.0 - value;
    return PreferenceMatrix(k_, std::move(p));
}

std::optional<Arm> condorcet_winner(const PreferenceMatrix& m) {
    for (Arm a = 0; a < m.k(); ++a) {
        bool beats_all = true;
        for (Arm b = 0; b < m.k() && beats_all; ++b) {
            beats_all = m(a, b) >= 0.5 - kTieTolerance;
        }
        if (beats_all) return a;
    }
    return std::nullopt;
}

namespace {

// rank[a] = position of a in the order (0 = best).
bool consistent(const PreferenceMatrix& m, const std::vector<Arm>& order) {
    for (std::size_t x = 0; x < order.size(); ++x) {
        for (std::size_t y = x + 1; y < order.size(); ++y) {
            if (m(order[x], order[y]) < 0.5 - kTieTolerance) return false;
        }
    }
    return true;
}

bool sst_holds(const PreferenceMatrix& m, const std::vector<Arm>& order) {
    if (!consistent(m, order)) return false;
    const std::size_t k = order.size();
    for (std::size_t x = 0; x < k; ++x) {
        for (std::size_t y = x + 1; y < k; ++y) {
            for (std::size_t z = y + 1; z < k; ++z) {
                const Arm i = order[x], j = order[y], l = order[z];
                if (m(i, l) < std::max(m(i, j), m(j, l)) - kTieTolerance) return false;
            }
        }
    }
    return true;
}

bool sti_holds(const PreferenceMatrix& m, const std::vector<Arm>& order) {
    if (!consistent(m, order)) return false;
    const std::size_t k = order.size();
    for (std::size_t x = 0; x < k; ++x) {
        for (std::size_t y = x + 1; y < k; ++y) {
            for (std::size_t z = y + 1; z < k; ++z) {
                const Arm i = order[x], j = order[y], l = order[z];
                if (m(i, l) > m(i, j) + m(j, l) + kTieTolerance) return false;
            }
        }
    }
    return true;
}

template <class Pred>
OrderCheck search_orders(const PreferenceMatrix& m, Pred holds, const char* name) {
    if (m.k() > kMaxOrderSearchArms) {
        throw UnsupportedSize(std::string(name) + " check supports at most " +
                              std::to_string(kMaxOrderSearchArms) + " arms, got " +
                              std::to_string(m.k()));
    }
    std::vector<Arm> order(m.k());
    std::iota(order.begin(), order.end(), Arm{0});
    do {
        if (holds(m, order)) return {true, order};
    } while (std::next_permutation(order.begin(), order.end()));
    return {false, {}};
}

}  // namespace

OrderCheck check_sst(const PreferenceMatrix& m) { return search_orders(m, sst_holds, "SST"); }

OrderCheck check_sti(const PreferenceMatrix& m) { return search_orders(m, sti_holds, "STI"); }

std::vector<Arm> check_gic(const PreferenceMatrix& m) {
    const std::size_t k = m.k();
    std::vector<char> in_all(k, 1);
    for (Arm col = 0; col < k; ++col) {
        double best = -1.0;
        for (Arm a = 0; a < k; ++a) best = std::max(best, m(a, col));
        for (Arm a = 0; a < k; ++a) {
            if (m(a, col) < best - kTieTolerance) in_all[a] = 0;
        }
    }
    std::vector<Arm> winners;
    for (Arm a = 0; a < k; ++a) {
        if (in_all[a]) winners.push_back(a);
    }
    return winners;
}

// ---------------------------------------------------------------------------

PreferenceSequence::PreferenceSequence(std::vector<Segment> segments)
    : segments_(std::move(segments)) {
    if (segments_.empty()) throw std::invalid_argument("preference sequence needs at least one segment");
    const std::size_t k = segments_.front().matrix.k();
    std::size_t next = 1;
    for (const auto& s : segments_) {
        if (s.length == 0) throw std::invalid_argument("segment lengths must be positive");
        if (s.matrix.k() != k) throw std::invalid_argument("all segments must share the arm count");
        if (s.start != next) throw std::logic_error("segment starts must be contiguous");
        next += s.length;
    }
    horizon_ = next - 1;
}

PreferenceSequence PreferenceSequence::stationary(PreferenceMatrix m, std::size_t horizon) {
    if (horizon == 0) throw std::invalid_argument("horizon must be positive");
    return PreferenceSequence({Segment{1, horizon, std::move(m)}});
}

PreferenceSequence PreferenceSequence::piecewise(
    std::vector<std::pair<std::size_t, PreferenceMatrix>> input) {
    if (input.empty()) throw std::invalid_argument("piecewise sequence needs at least one segment");
    std::vector<Segment> segs;
    segs.reserve(input.size());
    std::size_t start = 1;
    for (auto& [len, m] : input) {
        if (len == 0) throw std::invalid_argument("segment lengths must be positive");
        segs.push_back(Segment{start, len, std::move(m)});
        start += len;
    }
    return PreferenceSequence(std::move(segs));
}

PreferenceSequence PreferenceSequence::materialized(std::vector<PreferenceMatrix> rounds) {
    if (rounds.size() > kMaxMaterializedHorizon) {
        throw UnsupportedSize("materialized sequences support at most " +
                              std::to_string(kMaxMaterializedHorizon) + " rounds");
    }
    std::vector<std::pair<std::size_t, PreferenceMatrix>> segs;
    segs.reserve(rounds.size());
    for (auto& m : rounds) segs.emplace_back(1, std::move(m));
    return piecewise(std::move(segs));
}

std::size_t PreferenceSequence::segment_index(std::size_t t) const {
    if (t < 1 || t > horizon_) {
        throw std::out_of_range("round " + std::to_string(t) + " outside [1, " +
                                std::to_string(horizon_) + "]");
    }
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](std::size_t r, const Segment& s) { return r < s.start; });
    return static_cast<std::size_t>(std::distance(segments_.begin(), it)) - 1;
}

const PreferenceMatrix& PreferenceSequence::at(std::size_t t) const {
    return segments_[segment_index(t)].matrix;
}

std::vector<std::size_t> PreferenceSequence::change_points() const {
    std::vector<std::size_t> out;
    for (std::size_t s = 1; s < segments_.size(); ++s) out.push_back(segments_[s].start);
    return out;
}

PreferenceSequence PreferenceSequence::truncated(std::size_t horizon) const {
    if (horizon == 0 || horizon > horizon_) {
        throw std::out_of_range("cannot truncate a horizon-" + std::to_string(horizon_) +
                                " sequence to " + std::to_string(horizon));
    }
    std::vector<Segment> out;
    for (const auto& s : segments_) {
        if (s.start > horizon) break;
        Segment c = s;
        c.length = std::min(s.length, horizon + 1 - s.start);
        out.push_back(std::move(c));
    }
    return PreferenceSequence(std::move(out));
}

PreferenceSequence PreferenceSequence::concatenated(const PreferenceSequence& other) const {
    std::vector<std::pair<std::size_t, PreferenceMatrix>> segs;
    for (const auto& s : segments_) segs.emplace_back(s.length, s.matrix);
    for (const auto& s : other.segments_) segs.emplace_back(s.length, s.matrix);
    return piecewise(std::move(segs));
}

DuelOutcome sample_duel(const PreferenceSequence& seq, std::size_t t, Arm i, Arm j,
                        const rng::Stream& stream) {
    const auto& m = seq.at(t);
    if (i >= m.k() || j >= m.k()) throw std::out_of_range("sample_duel: arm index out of range");
    const int o = stream.bernoulli(m(i, j), t, i, j) ? 1 : 0;
    return DuelOutcome{t, i, j, o};
}

// ---------------------------------------------------------------------------

namespace envs {

PreferenceSequence gen_stationary(PreferenceMatrix m, std::size_t horizon) {
    return PreferenceSequence::stationary(std::move(m), horizon);
}

PreferenceSequence gen_piecewise(std::vector<std::pair<std::size_t, PreferenceMatrix>> segments) {
    return PreferenceSequence::piecewise(std::move(segments));
}

namespace {
void check_epsilon(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 0.05)) {
        throw std::invalid_argument("epsilon must lie in (0, 0.05)");
    }
}
}  // namespace

PreferenceMatrix borda_hardness(std::size_t k, double epsilon, std::optional<Arm> winner) {
    if (k < 2 || k % 2 != 0) throw std::invalid_argument("Borda hardness environment needs an even K >= 2");
    check_epsilon(epsilon);
    const std::size_t half = k / 2;
    if (winner && *winner >= half) throw std::invalid_argument("winner must be a good arm (index < K/2)");
    return PreferenceMatrix::from_upper(k, [&](Arm i, Arm j) {
        if (i < half && j >= half) return (winner && *winner == i) ? 0.9 + epsilon : 0.9;
        return 0.5;
    });
}

PreferenceMatrix conflict_3x3() {
    return PreferenceMatrix::from_rows({{0.5, 0.6, 0.6}, {0.4, 0.5, 1.0}, {0.4, 0.0, 0.5}});
}

std::pair<PreferenceMatrix, PreferenceMatrix> gic_pair(double epsilon) {
    check_epsilon(epsilon);
    auto p1 = PreferenceMatrix::from_upper(3, [&](Arm i, Arm j) {
        if (j == 2) return i == 0 ? 0.9 + epsilon : 0.9;
        return 0.5;
    });
    auto p2 = PreferenceMatrix::from_upper(3, [&](Arm i, Arm j) {
        if (j == 2) return i == 1 ? 0.9 + epsilon : 0.9;
        return 0.5;
    });
    return {std::move(p1), std::move(p2)};
}

PreferenceMatrix gic_k_hardness(std::size_t k, double epsilon, Arm a, Arm a_prime) {
    if (k < 2 || k % 2 != 0) throw std::invalid_argument("GIC hardness environment needs an even K >= 2");
    check_epsilon(epsilon);
    const std::size_t half = k / 2;
    if (a >= half) throw std::invalid_argument("a must be a good arm (index < K/2)");
    if (a_prime < half || a_prime >= k) throw std::invalid_argument("a' must be a bad arm (K/2 <= index < K)");
    return borda_hardness(k, epsilon, std::nullopt).with_entry(a, a_prime, 0.9 + epsilon);
}

PreferenceMatrix dominant_arm(std::size_t k, double gap, Arm winner) {
    if (winner >= k) throw std::invalid_argument("winner index out of range");
    if (!(gap >= 0.0 && gap <= 0.5)) throw std::invalid_argument("gap must lie in [0, 1/2]");
    return PreferenceMatrix::from_upper(k, [&](Arm i, Arm j) {
        if (i == winner) return 0.5 + gap;
        if (j == winner) return 0.5 - gap;
        return 0.5;
    });
}

}  // namespace envs

}  // namespace nsduel
