#pragma once

// Per-round regret accounting for Borda, Condorcet and tracked weighted objectives.

#include <cmath>
#include <optional>
#include <ostream>
#include <vector>

#include "nsduel/borda.hpp"
#include "nsduel/preference.hpp"

namespace nsduel {

struct RoundMeta {
    std::size_t episode = 0;
    std::size_t depth = 1;
    std::size_t active_set_size = 0;
};

struct LedgerRow {
    std::size_t t = 0;
    Arm i = 0;
    Arm j = 0;
    int o = 0;
    double borda_inc = 0.0;
    /// NaN when the round has no Condorcet winner.
    double condorcet_inc = NAN;
    double cum_borda = 0.0;
    /// Sum of the defined Condorcet increments so far.
    double cum_condorcet = 0.0;
    Arm borda_winner = 0;
    std::optional<Arm> condorcet_winner;
    RoundMeta meta;
};

class RegretLedger {
public:
    explicit RegretLedger(std::vector<Weight> tracked = {});

    /// Appends round `duel.t`; rounds must be consecutive starting at 1.
    void record(const PreferenceSequence& seq, const DuelOutcome& duel, const RoundMeta& meta);

    std::size_t rounds() const { return rows_.size(); }
    const std::vector<LedgerRow>& rows() const { return rows_; }
    const std::vector<Weight>& tracked() const { return tracked_; }
    /// weighted_inc(k)[t-1] is the increment for tracked weight k at round t.
    const std::vector<double>& weighted_inc(std::size_t k) const { return weighted_inc_[k]; }
    double weighted_total(std::size_t k) const;

    double final_borda() const { return rows_.empty() ? 0.0 : rows_.back().cum_borda; }
    double final_condorcet() const { return rows_.empty() ? 0.0 : rows_.back().cum_condorcet; }
    std::size_t condorcet_undefined_rounds() const { return undefined_; }

    /// Columns t,i,j,o,borda_inc,condorcet_inc,cum_borda,cum_condorcet,episode,depth,active_set_size.
    void write_csv(std::ostream& out) const;

private:
    struct SegmentCache {
        std::size_t segment = static_cast<std::size_t>(-1);
        std::vector<double> borda;
        double borda_best = 0.0;
        Arm borda_winner = 0;
        std::optional<Arm> cw;
    };

    std::vector<Weight> tracked_;
    std::vector<std::vector<double>> weighted_inc_;
    std::vector<LedgerRow> rows_;
    std::size_t undefined_ = 0;
    SegmentCache cache_;
};

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace nsduel
