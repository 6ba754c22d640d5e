#include "nsduel/bosse.hpp"

#include <algorithm>
#include <stdexcept>

namespace nsduel::bosse {

Specification::Specification(SpecKind kind, std::vector<Weight> weights, double c_evict)
    : kind_(kind),
      k_(weights.front().k()),
      weights_(std::move(weights)),
      exploration_(k_, 0.0),
      c_evict_(c_evict),
      k_cbrt_(std::cbrt(static_cast<double>(k_))) {
    if (!(c_evict_ > 0.0)) throw std::invalid_argument("eviction constant must be positive");
    for (const auto& w : weights_) {
        if (w.k() != k_) throw std::invalid_argument("specification weights differ in arm count");
        for (Arm a = 0; a < k_; ++a) exploration_[a] += w[a] / static_cast<double>(weights_.size());
    }
}

Specification Specification::fixed_weight(Weight w, double c_evict) {
    return Specification(SpecKind::kFixedWeight, {std::move(w)}, c_evict);
}

Specification Specification::unknown_weight(std::size_t k, double c_evict) {
    std::vector<Weight> masses;
    for (Arm a = 0; a < k; ++a) masses.push_back(Weight::point_mass(k, a));
    return Specification(SpecKind::kUnknownWeight, std::move(masses), c_evict);
}

double Specification::gamma(std::size_t elapsed) const {
    if (elapsed == 0) return 1.0;
    const double scale = kind_ == SpecKind::kFixedWeight ? k_cbrt_ : k_cbrt_ * k_cbrt_;
    return std::min(scale / std::cbrt(static_cast<double>(elapsed)), 1.0);
}

double Specification::threshold(std::size_t length, double sum_inv_eta, double max_inv_eta) const {
    const double k = static_cast<double>(k_);
    const double len23 = std::cbrt(static_cast<double>(length) * static_cast<double>(length));
    if (kind_ == SpecKind::kFixedWeight) {
        return std::max(k_cbrt_ * len23, std::sqrt(k * sum_inv_eta) + k * max_inv_eta);
    }
    return std::max(k_cbrt_ * k_cbrt_ * len23, std::sqrt(k * k * sum_inv_eta) + k * max_inv_eta);
}

double Specification::min_eviction_length() const {
    const double k = static_cast<double>(k_);
    return kind_ == SpecKind::kFixedWeight ? k / 8.0 : k * k / 8.0;
}

BaseState::BaseState(std::size_t k, std::size_t start, std::size_t duration)
    : t_start(start), m0(duration), active(k, 1), active_count(k) {}

void BaseState::evict(Arm a) {
    if (active[a]) {
        active[a] = 0;
        --active_count;
    }
}

// ---------------------------------------------------------------------------

EpisodeContext::EpisodeContext(std::size_t k, std::size_t horizon, std::size_t num_weights)
    : k_(k),
      horizon_(horizon),
      num_weights_(num_weights),
      log_horizon_(std::log(static_cast<double>(std::max<std::size_t>(horizon, 2)))),
      a_global_(k, 1),
      a_global_count_(k),
      eta_(horizon + 1, 1.0),
      prefix_((horizon + 1) * num_weights * k, 0.0),
      inv_eta_prefix_(horizon + 1, 0.0),
      abs_prefix_(horizon + 1, 0.0),
      last_inactive_(k, 0) {}

void EpisodeContext::reset(std::size_t t_ell) {
    if (t_ell != last_recorded_ + 1) throw std::logic_error("episodes must start right after the last round");
    t_ell_ = t_ell;
    std::fill(a_global_.begin(), a_global_.end(), 1);
    a_global_count_ = k_;
    std::fill(last_inactive_.begin(), last_inactive_.end(), t_ell - 1);
}

double EpisodeContext::max_inv_eta(std::size_t s1) const {
    auto it = std::lower_bound(inv_eta_max_.begin(), inv_eta_max_.end(), s1,
                               [](const auto& e, std::size_t s) { return e.first < s; });
    return it == inv_eta_max_.end() ? 0.0 : it->second;
}

void EpisodeContext::evict_global(Arm a) {
    if (a_global_[a]) {
        a_global_[a] = 0;
        --a_global_count_;
    }
}

double EpisodeContext::estimate_sum(std::size_t weight, Arm a, std::size_t s1, std::size_t s2) const {
    const std::size_t stride = num_weights_ * k_;
    const std::size_t off = weight * k_ + a;
    return prefix_[s2 * stride + off] - prefix_[(s1 - 1) * stride + off];
}

void EpisodeContext::record_round(std::size_t t, double eta, const std::vector<char>& play_set,
                                  const std::vector<double>& estimates) {
    if (t != last_recorded_ + 1 || t > horizon_) throw std::out_of_range("rounds must be recorded in order");
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("exploration rate must lie in (0, 1]");
    eta_[t] = eta;
    const double inv = 1.0 / eta;
    inv_eta_prefix_[t] = inv_eta_prefix_[t - 1] + inv;
    while (!inv_eta_max_.empty() && inv_eta_max_.back().second <= inv) inv_eta_max_.pop_back();
    inv_eta_max_.emplace_back(t, inv);

    const std::size_t stride = num_weights_ * k_;
    const double* prev = prefix_.data() + (t - 1) * stride;
    double* cur = prefix_.data() + t * stride;
    double dmax = 0.0;
    for (std::size_t e = 0; e < stride; ++e) {
        cur[e] = prev[e] + estimates[e];
        dmax = std::max(dmax, std::abs(estimates[e]));
    }
    abs_prefix_[t] = abs_prefix_[t - 1] + dmax;
    for (Arm a = 0; a < k_; ++a) {
        if (!play_set[a]) last_inactive_[a] = t;
    }
    last_recorded_ = t;
}

// ---------------------------------------------------------------------------

std::vector<double> play_distribution(const BaseState& state, const Specification& spec, double eta) {
    if (state.active_count == 0) throw std::logic_error("play distribution of an empty active set");
    const std::size_t k = spec.k();
    std::vector<double> q(k);
    const double uniform_part = (1.0 - eta) / static_cast<double>(state.active_count);
    for (Arm a = 0; a < k; ++a) {
        q[a] = (state.contains(a) ? uniform_part : 0.0) + eta * spec.exploration_mass(a);
    }
    return q;
}

double learning_rate(const Specification& spec, std::size_t t, std::size_t t_start) {
    if (t < t_start) throw std::invalid_argument("learning rate requested before the instance started");
    return spec.gamma(t - t_start);
}

double estimate_wbs(const DuelOutcome& duel, const std::vector<double>& q, Arm a, const Weight& w) {
    if (duel.i != a) return 0.0;
    const double mass = w[duel.j];
    if (mass == 0.0) return 0.0;
    const double denom = q[a] * q[duel.j];
    if (!(denom > 0.0)) throw std::domain_error("estimate_wbs: zero play probability on a contributing pair");
    return mass * (static_cast<double>(duel.o) - 0.5) / denom;
}

ScanResult eviction_scan(const EpisodeContext& ctx, const BaseState& state, const Specification& spec,
                         std::size_t t) {
    ScanResult out;
    const std::size_t k = spec.k();
    const std::size_t nw = spec.weights().size();
    const std::size_t t_ell = ctx.t_ell();
    const double mult = spec.c_evict() * ctx.log_horizon();
    const auto& dpre = ctx.abs_prefix();

    std::vector<char> want_local(k), want_global(k);
    std::size_t pending = 0;
    for (Arm a = 0; a < k; ++a) {
        want_local[a] = state.contains(a);
        want_global[a] = ctx.in_global(a);
        pending += (want_local[a] || want_global[a]) ? 1 : 0;
    }

    std::vector<double> window(k);
    std::size_t s1 = t;
    while (pending > 0 && s1 >= t_ell && s1 >= 1) {
        const bool local_ok = s1 >= state.t_start;
        // Eligible on [s1, t]: in the play set on every round of the interval.
        auto eligible = [&](Arm a) { return ctx.last_inactive(a) < s1; };

        const double thr =
            mult * spec.threshold(t - s1, ctx.inv_eta_sum(s1, t), ctx.max_inv_eta(s1));
        double margin = INFINITY;
        for (std::size_t w = 0; w < nw && pending > 0; ++w) {
            double best = -INFINITY;
            for (Arm a = 0; a < k; ++a) {
                if (eligible(a)) {
                    window[a] = ctx.estimate_sum(w, a, s1, t);
                    best = std::max(best, window[a]);
                }
            }
            for (Arm a = 0; a < k; ++a) {
                if (!eligible(a)) continue;
                const bool loc = local_ok && want_local[a];
                if (!loc && !want_global[a]) continue;
                const double lhs = best - window[a];
                if (lhs < thr) {
                    margin = std::min(margin, thr - lhs);
                    continue;
                }
                EvictionRecord rec{t, a, s1, t, w, lhs, thr, Scope::kLocal};
                if (loc) {
                    out.local.push_back(rec);
                    want_local[a] = 0;
                }
                if (want_global[a]) {
                    rec.scope = Scope::kGlobal;
                    out.global.push_back(rec);
                    want_global[a] = 0;
                }
                --pending;
            }
        }

        if (margin == INFINITY) {
            // No candidate at s1. Eligibility only shrinks as s1 decreases and the
            // local scope ends at t_start, so stop unless a global candidate remains.
            bool future = false;
            for (Arm a = 0; a < k && !future; ++a) future = eligible(a) && want_global[a];
            if (!future || s1 == 1) break;
            --s1;
            continue;
        }
        // Skip every s1' < s1 with Σ_{s1'}^{s1-1} D < margin; the next candidate is the
        // largest x < s1 with dpre[s1-1] - dpre[x-1] >= margin, found as x - 1 below.
        const double floor_value = dpre[s1 - 1] - (margin - 1e-9);
        const std::size_t lo = t_ell - 1;
        auto first = std::upper_bound(dpre.begin() + static_cast<std::ptrdiff_t>(lo),
                                      dpre.begin() + static_cast<std::ptrdiff_t>(s1), floor_value);
        const std::size_t x = static_cast<std::size_t>(first - dpre.begin());
        // dpre[x] is the first prefix above floor_value: intervals starting at x + 1 .. s1 - 1
        // cannot trigger, so the next s1 to examine is x.
        if (x < t_ell || x == 0) break;
        s1 = std::min(x, s1 - 1);
    }
    return out;
}

Arm sample_arm(const std::vector<double>& q, const rng::Stream& stream, std::size_t t, std::size_t draw) {
    const double u = stream.uniform(t, draw);
    double cum = 0.0;
    Arm last_positive = 0;
    for (Arm a = 0; a < q.size(); ++a) {
        if (q[a] <= 0.0) continue;
        cum += q[a];
        last_positive = a;
        if (u < cum) return a;
    }
    return last_positive;
}

StepOutcome step(BaseState& state, EpisodeContext& ctx, const Specification& spec, std::size_t t,
                 const PreferenceSequence& env, const rng::Streams& streams) {
    if (t < 1 || t > env.horizon()) throw std::out_of_range("step: round outside the environment horizon");
    StepOutcome out;
    out.eta = learning_rate(spec, t, state.t_start);
    out.q = play_distribution(state, spec, out.eta);
    const Arm i = sample_arm(out.q, streams.action, t, 0);
    const Arm j = sample_arm(out.q, streams.action, t, 1);
    out.duel = sample_duel(env, t, i, j, streams.environment);

    const std::size_t k = spec.k();
    const auto& weights = spec.weights();
    std::vector<double> est(weights.size() * k, 0.0);
    for (std::size_t w = 0; w < weights.size(); ++w) {
        if (state.contains(i)) est[w * k + i] = estimate_wbs(out.duel, out.q, i, weights[w]);
    }
    ctx.record_round(t, out.eta, state.active, est);

    out.evictions = eviction_scan(ctx, state, spec, t);
    for (const auto& r : out.evictions.local) state.evict(r.arm);
    for (const auto& r : out.evictions.global) ctx.evict_global(r.arm);

    out.expired = t + 1 > state.t_start + state.m0;
    out.restart = ctx.a_global_size() == 0;
    return out;
}

}  // namespace nsduel::bosse
