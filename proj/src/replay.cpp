#include "nsduel/replay.hpp"

#include <algorithm>
#include <cmath>

namespace nsduel {

std::vector<std::size_t> dyadic_grid(std::size_t horizon) {
    std::vector<std::size_t> grid{2};
    while (grid.back() < horizon) grid.push_back(grid.back() * 2);
    return grid;
}

ReplaySchedule::ReplaySchedule(rng::Stream stream, std::size_t episode, std::size_t t_ell, std::size_t horizon)
    : stream_(stream), episode_(episode), t_ell_(t_ell), grid_(dyadic_grid(horizon)) {}

double ReplaySchedule::probability(std::size_t s, std::size_t m) const {
    if (s <= t_ell_ || m == 0) return 0.0;
    const double d = static_cast<double>(s - t_ell_);
    return std::min(1.0, 1.0 / (std::cbrt(static_cast<double>(m)) * std::cbrt(d * d)));
}

bool ReplaySchedule::bit(std::size_t s, std::size_t m) const {
    const double p = probability(s, m);
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return stream_.bernoulli(p, episode_, s, m);
}

std::size_t ReplaySchedule::max_replay(std::size_t s) const {
    for (auto it = grid_.rbegin(); it != grid_.rend(); ++it) {
        if (bit(s, *it)) return *it;
    }
    return 0;
}

}  // namespace nsduel
