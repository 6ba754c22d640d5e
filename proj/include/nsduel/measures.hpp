#pragma once

// Offline non-stationarity measures of a preference sequence.
//
// Phase lists hold the 1-based start round of every phase and always begin
// with 1. A significant-regret interval [s1, s2] needs s1 < s2: the threshold
// c·(s2 - s1)^{2/3} vanishes on single rounds, where every arm (including the
// round's winner) would otherwise qualify.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsduel/borda.hpp"
#include "nsduel/preference.hpp"

namespace nsduel::measures {

using PhaseList = std::vector<std::size_t>;

struct Limits {
    /// SBS/SKW/SUW cost O(K·|W|·T²) per pass; longer sequences are refused.
    std::size_t max_horizon = 5000;
};

class LimitExceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

class GicViolation : public std::domain_error {
public:
    GicViolation(std::size_t round, const std::string& what) : std::domain_error(what), round_(round) {}
    std::size_t round() const { return round_; }

private:
    std::size_t round_;
};

PhaseList significant_borda_shifts(const PreferenceSequence& seq, const Limits& limits = {});
PhaseList skw(const PreferenceSequence& seq, const Weight& w, const Limits& limits = {});
PhaseList suw(const PreferenceSequence& seq, const Limits& limits = {});

struct ApproxPhases {
    PhaseList starts;
    /// A witnessing approximate winner arm for every phase (including the last).
    std::vector<Arm> winners;
};

/// Requires GIC at every round; throws GicViolation naming the first bad round.
ApproxPhases approx_winner_changes(const PreferenceSequence& seq);

/// V_T = Σ_{t>=2} max_{a,a'} |δ_t(a,a') - δ_{t-1}(a,a')|.
double total_variation(const PreferenceSequence& seq);

/// L: number of rounds t >= 2 with P_t != P_{t-1}.
std::size_t change_count(const PreferenceSequence& seq);

struct SwitchCounts {
    /// Phases induced by changes of the Condorcet winner identity ("none" counts as an identity).
    std::size_t condorcet = 1;
    /// Phases induced by changes of the Borda winner identity.
    std::size_t borda = 1;
};
SwitchCounts winner_switch_counts(const PreferenceSequence& seq);

/// Phases induced by changes of the GIC winner a_t^* (smallest index on ties).
std::size_t gic_winner_phases(const PreferenceSequence& seq);

struct SegmentFlags {
    std::size_t start = 1;
    std::optional<Arm> condorcet_winner;
    std::vector<Arm> gic_winners;
    std::optional<bool> sst;  // unset when K exceeds the order-search limit
    std::optional<bool> sti;
};
std::vector<SegmentFlags> segment_flags(const PreferenceSequence& seq);

struct MeasureRequest {
    bool sbs = false;
    std::optional<Weight> skw;
    bool suw = false;
    bool approx = false;
    bool tv = false;
    bool switches = false;
    bool flags = false;
    bool oracle = false;
    Limits limits;

    static MeasureRequest all(std::size_t k);
};

struct MeasureReport {
    std::optional<PhaseList> sbs_phases;
    std::optional<std::pair<Weight, PhaseList>> skw_phases;
    std::optional<PhaseList> suw_phases;
    std::optional<ApproxPhases> approx_phases;
    std::optional<std::string> approx_error;
    std::optional<double> v_total;
    std::optional<std::size_t> changes;
    std::optional<SwitchCounts> switches;
    std::vector<SegmentFlags> flags;
    bool oracle = false;

    nlohmann::json to_json() const;
};

MeasureReport compute(const PreferenceSequence& seq, const MeasureRequest& req);

}  // namespace nsduel::measures

// Brute-force restatements of every measure, written without prefix sums or
// segment shortcuts. They exist to cross-check the optimized paths.
namespace nsduel::measures::oracle {

PhaseList significant_borda_shifts(const PreferenceSequence& seq, const Limits& limits = {});
PhaseList skw(const PreferenceSequence& seq, const Weight& w, const Limits& limits = {});
PhaseList suw(const PreferenceSequence& seq, const Limits& limits = {});
ApproxPhases approx_winner_changes(const PreferenceSequence& seq);
/// The weighted-Borda form: Σ_t max over (arm, point-mass weight) of |b_t(a,w) - b_{t-1}(a,w)|.
double total_variation(const PreferenceSequence& seq);
SwitchCounts winner_switch_counts(const PreferenceSequence& seq);
std::size_t gic_winner_phases(const PreferenceSequence& seq);

}  // namespace nsduel::measures::oracle
