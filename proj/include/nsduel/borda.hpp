#pragma once

// Borda and weighted Borda scores, winners and per-round regret increments.
// Weighted scores use the gap parameterization b(a, w) = Σ_a' (p(a, a') - 1/2) w[a'];
// the plain Borda score is the probability form (1/K) Σ_a' p(a, a').

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsduel/preference.hpp"

namespace nsduel {

/// A probability vector over arms.
class Weight {
public:
    /// Entries must be >= 0 and sum to 1 within 1e-12.
    explicit Weight(std::vector<double> w);

    static Weight uniform(std::size_t k);
    static Weight point_mass(std::size_t k, Arm a);

    /// Parses "uniform", "point:<arm>" or a comma-separated probability list.
    static Weight parse(const std::string& spec, std::size_t k);

    std::size_t k() const { return w_.size(); }
    double operator[](Arm a) const { return w_[a]; }
    std::span<const double> values() const { return w_; }

    /// λ·this + (1-λ)·other.
    Weight mixed(const Weight& other, double lambda) const;

    std::string label() const;

private:
    std::vector<double> w_;
};

class NoCondorcetWinner : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

double borda_score(const PreferenceMatrix& m, Arm a);
Arm borda_winner(const PreferenceMatrix& m);

double weighted_borda_score(const PreferenceMatrix& m, Arm a, const Weight& w);
Arm weighted_winner(const PreferenceMatrix& m, const Weight& w);
/// max_a' b(a', w) - b(a, w).
double weighted_gap(const PreferenceMatrix& m, Arm a, const Weight& w);

/// (p(a_C, i) + p(a_C, j) - 1) / 2. Throws NoCondorcetWinner when no CW exists.
double condorcet_regret_inc(const PreferenceMatrix& m, Arm i, Arm j);
/// b(a_B) - (b(i) + b(j)) / 2.
double borda_regret_inc(const PreferenceMatrix& m, Arm i, Arm j);
/// b(a*(w), w) - (b(i, w) + b(j, w)) / 2.
double weighted_regret_inc(const PreferenceMatrix& m, const Weight& w, Arm i, Arm j);

}  // namespace nsduel
