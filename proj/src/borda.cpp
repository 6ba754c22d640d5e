#include "nsduel/borda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace nsduel {

Weight::Weight(std::vector<double> w) : w_(std::move(w)) {
    if (w_.empty()) throw std::invalid_argument("weight must have at least one entry");
    double sum = 0.0;
    for (double v : w_) {
        if (!(v >= 0.0)) throw std::invalid_argument("weight entries must be non-negative");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("weight entries must sum to 1 (got " + std::to_string(sum) + ")");
    }
}

Weight Weight::uniform(std::size_t k) { return Weight(std::vector<double>(k, 1.0 / static_cast<double>(k))); }

Weight Weight::point_mass(std::size_t k, Arm a) {
    if (a >= k) throw std::out_of_range("point mass arm out of range");
    std::vector<double> w(k, 0.0);
    w[a] = 1.0;
    return Weight(std::move(w));
}

Weight Weight::parse(const std::string& spec, std::size_t k) {
    if (spec == "uniform") return uniform(k);
    if (spec.rfind("point:", 0) == 0) {
        const std::string idx = spec.substr(6);
        std::size_t pos = 0;
        unsigned long a = 0;
        try {
            a = std::stoul(idx, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != idx.size()) throw std::invalid_argument("bad point-mass weight '" + spec + "'");
        return point_mass(k, a);
    }
    std::vector<double> w;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            w.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad weight entry '" + item + "' in '" + spec + "'");
        }
    }
    if (w.size() != k) {
        throw std::invalid_argument("weight '" + spec + "' has " + std::to_string(w.size()) +
                                    " entries, expected " + std::to_string(k));
    }
    return Weight(std::move(w));
}

Weight Weight::mixed(const Weight& other, double lambda) const {
    if (other.k() != k()) throw std::invalid_argument("weights differ in arm count");
    std::vector<double> w(k());
    for (std::size_t a = 0; a < k(); ++a) w[a] = lambda * w_[a] + (1.0 - lambda) * other.w_[a];
    // Renormalize rounding drift so the simplex invariant holds exactly enough.
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= sum;
    return Weight(std::move(w));
}

std::string Weight::label() const {
    std::size_t nonzero = 0;
    Arm last = 0;
    for (Arm a = 0; a < k(); ++a) {
        if (w_[a] > 0.0) {
            ++nonzero;
            last = a;
        }
    }
    if (nonzero == 1) return "point:" + std::to_string(last);
    if (std::all_of(w_.begin(), w_.end(), [&](double v) { return v == w_.front(); })) return "uniform";
    std::ostringstream os;
    os.precision(17);
    for (std::size_t a = 0; a < k(); ++a) os << (a ? "," : "") << w_[a];
    return os.str();
}

double borda_score(const PreferenceMatrix& m, Arm a) {
    double s = 0.0;
    for (Arm b = 0; b < m.k(); ++b) s += m(a, b);
    return s / static_cast<double>(m.k());
}

namespace {

template <class Score>
std::pair<Arm, double> argmax(std::size_t k, Score&& score) {
    std::vector<double> v(k);
    double best = -INFINITY;
    for (Arm a = 0; a < k; ++a) {
        v[a] = score(a);
        best = std::max(best, v[a]);
    }
    for (Arm a = 0; a < k; ++a) {
        if (v[a] >= best - kTieTolerance) return {a, best};
    }
    return {0, best};
}

}  // namespace

Arm borda_winner(const PreferenceMatrix& m) {
    return argmax(m.k(), [&](Arm a) { return borda_score(m, a); }).first;
}

double weighted_borda_score(const PreferenceMatrix& m, Arm a, const Weight& w) {
    if (w.k() != m.k()) throw std::invalid_argument("weight and matrix differ in arm count");
    double s = 0.0;
    for (Arm b = 0; b < m.k(); ++b) s += m.gap(a, b) * w[b];
    return s;
}

Arm weighted_winner(const PreferenceMatrix& m, const Weight& w) {
    return argmax(m.k(), [&](Arm a) { return weighted_borda_score(m, a, w); }).first;
}

double weighted_gap(const PreferenceMatrix& m, Arm a, const Weight& w) {
    const double best = argmax(m.k(), [&](Arm b) { return weighted_borda_score(m, b, w); }).second;
    return best - weighted_borda_score(m, a, w);
}

double condorcet_regret_inc(const PreferenceMatrix& m, Arm i, Arm j) {
    const auto cw = condorcet_winner(m);
    if (!cw) throw NoCondorcetWinner("no Condorcet winner: Condorcet regret undefined");
    return (m(*cw, i) + m(*cw, j) - 1.0) / 2.0;
}

double borda_regret_inc(const PreferenceMatrix& m, Arm i, Arm j) {
    const double best = argmax(m.k(), [&](Arm a) { return borda_score(m, a); }).second;
    return best - (borda_score(m, i) + borda_score(m, j)) / 2.0;
}

double weighted_regret_inc(const PreferenceMatrix& m, const Weight& w, Arm i, Arm j) {
    const double best = argmax(m.k(), [&](Arm a) { return weighted_borda_score(m, a, w); }).second;
    return best - (weighted_borda_score(m, i, w) + weighted_borda_score(m, j, w)) / 2.0;
}

}  // namespace nsduel
