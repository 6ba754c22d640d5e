#pragma once

// Randomized replay schedule of one episode.
//
// B_{s,m} ~ Bernoulli(min{1, m^{-1/3}·(s - t_ell)^{-2/3}}) for s in (t_ell, T] and
// m on the dyadic grid {2, 4, ..., 2^ceil(log2 T)}. Bits are drawn lazily from a
// counter-based stream keyed by (episode, s, m), so the schedule is fixed once the
// seed and episode index are.

#include <cstddef>
#include <vector>

#include "nsduel/rng.hpp"

namespace nsduel {

/// {2, 4, ..., 2^ceil(log2 T)}; at least {2}.
std::vector<std::size_t> dyadic_grid(std::size_t horizon);

class ReplaySchedule {
public:
    ReplaySchedule(rng::Stream stream, std::size_t episode, std::size_t t_ell, std::size_t horizon);

    std::size_t episode() const { return episode_; }
    std::size_t t_ell() const { return t_ell_; }
    const std::vector<std::size_t>& grid() const { return grid_; }

    double probability(std::size_t s, std::size_t m) const;
    bool bit(std::size_t s, std::size_t m) const;
    /// Largest m with B_{s,m} = 1, or 0 when no bit is set.
    std::size_t max_replay(std::size_t s) const;

private:
    rng::Stream stream_;
    std::size_t episode_;
    std::size_t t_ell_;
    std::vector<std::size_t> grid_;
};

}  // namespace nsduel
