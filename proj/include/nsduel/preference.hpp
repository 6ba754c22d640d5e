#pragma once

// Pairwise preference matrices, piecewise-stationary preference sequences,
// structural condition checks and the environment families used throughout
// the toolkit. Arms are 0-indexed everywhere.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nsduel/rng.hpp"

namespace nsduel {

using Arm = std::size_t;

/// Tolerance for skew-symmetry checks and for ties in arg-max computations.
inline constexpr double kTieTolerance = 1e-12;

/// Largest arm count for which SST/STI orderings are searched exhaustively.
inline constexpr std::size_t kMaxOrderSearchArms = 10;

/// Largest horizon accepted for per-round (materialized) sequences.
inline constexpr std::size_t kMaxMaterializedHorizon = 100000;

struct Violation {
    enum class Kind { kShape, kRange, kDiagonal, kSkew };
    Kind kind;
    Arm i = 0;
    Arm j = 0;
    double magnitude = 0.0;

    std::string describe() const;
};

/// Reports every shape, range, diagonal and skew-symmetry violation of a
/// row-major k×k array. Never throws.
std::vector<Violation> validate(std::span<const double> row_major, std::size_t k);

class InvalidMatrix : public std::invalid_argument {
public:
    InvalidMatrix(const std::string& what, std::vector<Violation> violations)
        : std::invalid_argument(what), violations_(std::move(violations)) {}
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

class UnsupportedSize : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// p(i, j) is the probability that arm i beats arm j in a duel.
class PreferenceMatrix {
public:
    /// Throws InvalidMatrix listing all violations.
    PreferenceMatrix(std::size_t k, std::vector<double> row_major);

    static PreferenceMatrix from_rows(const std::vector<std::vector<double>>& rows);

    /// Builds the matrix from the strict upper triangle: entry(i, j) for i < j;
    /// the lower triangle is filled as 1 - p(i, j), the diagonal with 1/2.
    template <class UpperFn>
    static PreferenceMatrix from_upper(std::size_t k, UpperFn&& entry) {
        std::vector<double> p(k * k, 0.5);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                const double v = entry(i, j);
                p[i * k + j] = v;
                p[j * k + i] = 1.0 - v;
            }
        }
        return PreferenceMatrix(k, std::move(p));
    }

    /// All-½ matrix.
    static PreferenceMatrix uniform(std::size_t k);

    std::size_t k() const { return k_; }
    double operator()(Arm i, Arm j) const { return p_[i * k_ + j]; }
    /// δ(i, j) = p(i, j) - 1/2.
    double gap(Arm i, Arm j) const { return p_[i * k_ + j] - 0.5; }
    std::span<const double> row(Arm i) const { return {p_.data() + i * k_, k_}; }
    const std::vector<double>& data() const { return p_; }

    /// Returns a copy with one entry replaced (and its mirror set to 1 - value).
    PreferenceMatrix with_entry(Arm i, Arm j, double value) const;

    bool operator==(const PreferenceMatrix&) const = default;

private:
    std::size_t k_;
    std::vector<double> p_;
};

/// Smallest arm a with p(a, a') >= 1/2 for every a', if any.
std::optional<Arm> condorcet_winner(const PreferenceMatrix& m);

struct OrderCheck {
    bool satisfied = false;
    /// Best-first ordering witnessing the property (empty when violated).
    std::vector<Arm> order;
};

/// Strong stochastic transitivity under some total order. Orders searched in
/// lexicographic order; the first witness is returned. K <= kMaxOrderSearchArms.
OrderCheck check_sst(const PreferenceMatrix& m);

/// Stochastic triangle inequality under some preference-consistent total order
/// (an arm ranked above another beats it with probability >= 1/2).
OrderCheck check_sti(const PreferenceMatrix& m);

/// Arms lying in the column-wise arg-max of every column. Empty when GIC fails.
std::vector<Arm> check_gic(const PreferenceMatrix& m);

struct DuelOutcome {
    std::size_t t = 0;
    Arm i = 0;
    Arm j = 0;
    int o = 0;  // 1 when i is preferred
};

class PreferenceSequence {
public:
    struct Segment {
        std::size_t start;   // first round (1-based)
        std::size_t length;
        PreferenceMatrix matrix;
    };

    static PreferenceSequence stationary(PreferenceMatrix m, std::size_t horizon);
    /// Segments given as (length, matrix); horizon is the sum of lengths.
    static PreferenceSequence piecewise(std::vector<std::pair<std::size_t, PreferenceMatrix>> segments);
    /// One matrix per round; horizon <= kMaxMaterializedHorizon.
    static PreferenceSequence materialized(std::vector<PreferenceMatrix> rounds);

    std::size_t horizon() const { return horizon_; }
    std::size_t k() const { return segments_.front().matrix.k(); }
    const std::vector<Segment>& segments() const { return segments_; }

    /// Index of the segment containing round t (1-based).
    std::size_t segment_index(std::size_t t) const;
    const PreferenceMatrix& at(std::size_t t) const;

    /// Start rounds of every segment after the first.
    std::vector<std::size_t> change_points() const;

    /// The first `horizon` rounds of this sequence.
    PreferenceSequence truncated(std::size_t horizon) const;

    /// Rounds of `this` followed by the rounds of `other`.
    PreferenceSequence concatenated(const PreferenceSequence& other) const;

private:
    explicit PreferenceSequence(std::vector<Segment> segments);

    std::vector<Segment> segments_;
    std::size_t horizon_ = 0;
};

/// Draws O_t(i, j) ~ Ber(P_t(i, j)) from `stream`, keyed by (t, i, j).
DuelOutcome sample_duel(const PreferenceSequence& seq, std::size_t t, Arm i, Arm j,
                        const rng::Stream& stream);

namespace envs {

PreferenceSequence gen_stationary(PreferenceMatrix m, std::size_t horizon);
PreferenceSequence gen_piecewise(std::vector<std::pair<std::size_t, PreferenceMatrix>> segments);

/// Good arms {0..k/2-1} beat bad arms with probability 0.9; ties elsewhere.
/// With `winner` set, that good arm beats the bad arms with 0.9 + epsilon.
/// K must be even and epsilon in (0, 0.05).
PreferenceMatrix borda_hardness(std::size_t k, double epsilon, std::optional<Arm> winner);

/// Arm 0 is the Condorcet winner, arm 1 the Borda winner.
PreferenceMatrix conflict_3x3();

/// The 3-armed GIC pair: arm 0 dominant in the first, arm 1 in the second.
std::pair<PreferenceMatrix, PreferenceMatrix> gic_pair(double epsilon);

/// The Borda-hardness base environment with the single entry p(a, a') = 0.9 + epsilon.
PreferenceMatrix gic_k_hardness(std::size_t k, double epsilon, Arm a, Arm a_prime);

/// `winner` beats every other arm with probability 1/2 + gap; all other pairs
/// tie. The Borda gap between the winner and every other arm equals `gap`.
PreferenceMatrix dominant_arm(std::size_t k, double gap, Arm winner);

}  // namespace envs

}  // namespace nsduel
