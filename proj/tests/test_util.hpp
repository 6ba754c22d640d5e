#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "nsduel/preference.hpp"

namespace nsduel::fixtures {

inline PreferenceMatrix random_matrix(std::mt19937_64& gen, std::size_t k) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return PreferenceMatrix::from_upper(k, [&](Arm, Arm) { return u(gen); });
}

/// Entries drawn from a small grid so that ties and exact thresholds occur.
inline PreferenceMatrix grid_matrix(std::mt19937_64& gen, std::size_t k) {
    std::uniform_int_distribution<int> d(0, 10);
    return PreferenceMatrix::from_upper(k, [&](Arm, Arm) { return d(gen) / 10.0; });
}

/// Random total order with P(i, j) >= 1/2 for i above j and SST-consistent entries:
/// p(order[x], order[y]) = 1/2 + h(y) - h(x) scaled so every entry stays in [1/2, 1].
inline PreferenceMatrix random_sst(std::mt19937_64& gen, std::size_t k) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> h(k);
    for (auto& v : h) v = u(gen);
    std::sort(h.begin(), h.end(), std::greater<>());
    std::vector<Arm> perm(k);
    for (Arm a = 0; a < k; ++a) perm[a] = a;
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<double> strength(k);
    for (std::size_t r = 0; r < k; ++r) strength[perm[r]] = h[r];
    return PreferenceMatrix::from_upper(k, [&](Arm i, Arm j) { return 0.5 + 0.5 * (strength[i] - strength[j]); });
}

inline PreferenceSequence random_piecewise(std::mt19937_64& gen, std::size_t k, std::size_t max_horizon,
                                           std::size_t max_segments, bool grid = false) {
    std::uniform_int_distribution<std::size_t> nseg(1, max_segments);
    const std::size_t segs = nseg(gen);
    std::vector<std::pair<std::size_t, PreferenceMatrix>> out;
    std::size_t left = max_horizon;
    for (std::size_t s = 0; s < segs && left > 0; ++s) {
        std::uniform_int_distribution<std::size_t> len(1, std::max<std::size_t>(1, left / (segs - s)));
        const std::size_t n = s + 1 == segs ? left : len(gen);
        out.emplace_back(n, grid ? grid_matrix(gen, k) : random_matrix(gen, k));
        left -= n;
    }
    return PreferenceSequence::piecewise(std::move(out));
}

}  // namespace nsduel::fixtures
