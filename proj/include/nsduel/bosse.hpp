#pragma once

// Soft-elimination base learner over weighted Borda scores.
//
// One base instance plays the mixture (1 - η)·Unif(A) + η·Unif(W), estimates
// the gap-form weighted Borda score of every active arm by importance
// weighting and evicts an arm once some comparator's cumulative estimated lead
// over an interval crosses C·log(T)·F(interval).

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "nsduel/borda.hpp"
#include "nsduel/preference.hpp"
#include "nsduel/rng.hpp"

namespace nsduel::bosse {

enum class SpecKind { kFixedWeight, kUnknownWeight };

/// Eviction-constant presets.
inline constexpr double kTheoryC = 10.0 * (2.718281828459045 - 1.0);
inline constexpr double kEmpiricalC = 1.0;

class Specification {
public:
    /// W = {w}, γ(n) = min{K^{1/3} n^{-1/3}, 1}.
    static Specification fixed_weight(Weight w, double c_evict);
    /// W = the K point masses, γ(n) = min{K^{2/3} n^{-1/3}, 1}.
    static Specification unknown_weight(std::size_t k, double c_evict);

    SpecKind kind() const { return kind_; }
    std::size_t k() const { return k_; }
    const std::vector<Weight>& weights() const { return weights_; }
    double c_evict() const { return c_evict_; }

    /// Exploration rate after `elapsed` rounds; γ(0) = 1.
    double gamma(std::size_t elapsed) const;

    /// F([s1, s2]) from the interval length s2 - s1 and the η history on it.
    double threshold(std::size_t length, double sum_inv_eta, double max_inv_eta) const;

    /// Mean over W of w[a]: the play mass the exploration part puts on arm a.
    double exploration_mass(Arm a) const { return exploration_[a]; }

    /// Smallest interval length s2 - s1 an eviction can have (K/8 or K²/8).
    double min_eviction_length() const;

private:
    Specification(SpecKind kind, std::vector<Weight> weights, double c_evict);

    SpecKind kind_;
    std::size_t k_;
    std::vector<Weight> weights_;
    std::vector<double> exploration_;
    double c_evict_;
    double k_cbrt_;
};

/// State of one base instance.
struct BaseState {
    std::size_t t_start = 1;
    /// Scheduled duration m0: the instance plays rounds t_start .. t_start + m0.
    std::size_t m0 = 0;
    std::vector<char> active;
    std::size_t active_count = 0;

    BaseState(std::size_t k, std::size_t t_start, std::size_t m0);
    bool contains(Arm a) const { return active[a] != 0; }
    void evict(Arm a);
};

/// True once round t lies past the instance's scheduled rounds (t > t_start + m0).
inline bool is_expired(const BaseState& state, std::size_t t) { return t > state.t_start + state.m0; }

enum class Scope { kLocal, kGlobal };

struct EvictionRecord {
    std::size_t round = 0;
    Arm arm = 0;
    std::size_t s1 = 0;
    std::size_t s2 = 0;
    std::size_t weight_id = 0;
    double lhs = 0.0;
    double threshold = 0.0;
    Scope scope = Scope::kLocal;
};

/// Shared state of one episode: global arm set, learning-rate history, per-(weight, arm)
/// prefix sums of estimates and the per-arm activity timeline.
class EpisodeContext {
public:
    EpisodeContext(std::size_t k, std::size_t horizon, std::size_t num_weights);

    /// Begins a new episode at round t_ell with A_global = [K].
    void reset(std::size_t t_ell);

    std::size_t k() const { return k_; }
    std::size_t horizon() const { return horizon_; }
    std::size_t t_ell() const { return t_ell_; }
    /// log(T) factor of the eviction threshold.
    double log_horizon() const { return log_horizon_; }

    const std::vector<char>& a_global() const { return a_global_; }
    std::size_t a_global_size() const { return a_global_count_; }
    bool in_global(Arm a) const { return a_global_[a] != 0; }
    void evict_global(Arm a);

    double eta(std::size_t t) const { return eta_[t]; }
    /// Σ_{s=s1}^{s2} 1/η_s.
    double inv_eta_sum(std::size_t s1, std::size_t s2) const { return inv_eta_prefix_[s2] - inv_eta_prefix_[s1 - 1]; }
    /// max_{s=s1}^{t} 1/η_s where t is the last recorded round.
    double max_inv_eta(std::size_t s1) const;
    /// Prefix of D_s = max over weights of |estimate at round s|. One round changes any
    /// interval statistic by at most D_s, which lets the scan skip hopeless s1.
    const std::vector<double>& abs_prefix() const { return abs_prefix_; }
    /// Σ_{s=s1}^{s2} of the estimate for (weight, arm).
    double estimate_sum(std::size_t weight, Arm a, std::size_t s1, std::size_t s2) const;
    /// Latest round (within the episode) at which `a` was outside the play set; t_ell - 1 if none.
    std::size_t last_inactive(Arm a) const { return last_inactive_[a]; }

    /// Records round t: its exploration rate, play set and per-(weight, arm) estimates
    /// (row-major [weight][arm]). Rounds must be recorded in order.
    void record_round(std::size_t t, double eta, const std::vector<char>& play_set,
                      const std::vector<double>& estimates);
    std::size_t last_recorded() const { return last_recorded_; }

private:
    std::size_t k_;
    std::size_t horizon_;
    std::size_t num_weights_;
    double log_horizon_;
    std::size_t t_ell_ = 1;
    std::vector<char> a_global_;
    std::size_t a_global_count_ = 0;
    std::vector<double> eta_;
    std::vector<double> prefix_;  // [t * (|W| * K) + weight * K + arm]
    std::vector<double> inv_eta_prefix_;
    std::vector<double> abs_prefix_;
    // Suffix maxima of 1/η ending at the last recorded round: increasing rounds, decreasing values.
    std::vector<std::pair<std::size_t, double>> inv_eta_max_;
    std::vector<std::size_t> last_inactive_;
    std::size_t last_recorded_ = 0;
};

/// q(a) = (1 - η)/|A|·1{a ∈ A} + η·mean_{w ∈ W} w[a]. Throws on empty A.
std::vector<double> play_distribution(const BaseState& state, const Specification& spec, double eta);

/// η_t = γ(t - t_start).
double learning_rate(const Specification& spec, std::size_t t, std::size_t t_start);

/// Gap-form importance-weighted estimate of b_t(a, w) from one duel.
double estimate_wbs(const DuelOutcome& duel, const std::vector<double>& q, Arm a, const Weight& w);

struct ScanResult {
    std::vector<EvictionRecord> local;
    std::vector<EvictionRecord> global;
};

/// Checks every interval [s1, t] with s1 in [t_ell, t] (global scope) or
/// [t_start, t] (local scope). Both the evicted arm and the comparator must have
/// been in the play set on every round of the interval. Each arm is reported with
/// the shortest interval that triggers its eviction. Does not modify state.
///
/// The threshold is non-decreasing as s1 moves back while the statistic moves by
/// at most D_s per round, so runs of s1 whose cumulative D stays below the
/// smallest remaining margin are skipped without changing the outcome.
ScanResult eviction_scan(const EpisodeContext& ctx, const BaseState& state, const Specification& spec,
                         std::size_t t);

struct StepOutcome {
    DuelOutcome duel;
    double eta = 1.0;
    std::vector<double> q;
    ScanResult evictions;
    /// The instance's scheduled duration ends before round t + 1.
    bool expired = false;
    /// A_global is empty after this round's evictions.
    bool restart = false;
};

/// Plays round t with `state` as the active instance: samples the duel, records
/// estimates, applies local and global evictions.
StepOutcome step(BaseState& state, EpisodeContext& ctx, const Specification& spec, std::size_t t,
                 const PreferenceSequence& env, const rng::Streams& streams);

/// Inverse-CDF draw from q using the action stream at (t, draw).
Arm sample_arm(const std::vector<double>& q, const rng::Stream& stream, std::size_t t, std::size_t draw);

}  // namespace nsduel::bosse
