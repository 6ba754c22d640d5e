#include "nsduel/ledger.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <stdexcept>

namespace nsduel {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

RegretLedger::RegretLedger(std::vector<Weight> tracked)
    : tracked_(std::move(tracked)), weighted_inc_(tracked_.size()) {}

void RegretLedger::record(const PreferenceSequence& seq, const DuelOutcome& duel,
                          const RoundMeta& meta) {
    if (duel.t != rows_.size() + 1) {
        throw std::invalid_argument("ledger expects round " + std::to_string(rows_.size() + 1) +
                                    ", got " + std::to_string(duel.t));
    }
    const std::size_t seg = seq.segment_index(duel.t);
    const PreferenceMatrix& m = seq.segments()[seg].matrix;
    if (cache_.segment != seg) {
        cache_.segment = seg;
        cache_.borda.resize(m.k());
        for (Arm a = 0; a < m.k(); ++a) cache_.borda[a] = borda_score(m, a);
        cache_.borda_best = *std::max_element(cache_.borda.begin(), cache_.borda.end());
        cache_.borda_winner = borda_winner(m);
        cache_.cw = condorcet_winner(m);
    }

    LedgerRow row;
    row.t = duel.t;
    row.i = duel.i;
    row.j = duel.j;
    row.o = duel.o;
    row.borda_inc = cache_.borda_best - (cache_.borda[duel.i] + cache_.borda[duel.j]) / 2.0;
    row.borda_winner = cache_.borda_winner;
    row.condorcet_winner = cache_.cw;
    row.meta = meta;
    const double prev_b = rows_.empty() ? 0.0 : rows_.back().cum_borda;
    const double prev_c = rows_.empty() ? 0.0 : rows_.back().cum_condorcet;
    row.cum_borda = prev_b + row.borda_inc;
    if (cache_.cw) {
        row.condorcet_inc = (m(*cache_.cw, duel.i) + m(*cache_.cw, duel.j) - 1.0) / 2.0;
        row.cum_condorcet = prev_c + row.condorcet_inc;
    } else {
        row.condorcet_inc = NAN;
        row.cum_condorcet = prev_c;
        ++undefined_;
    }
    for (std::size_t k = 0; k < tracked_.size(); ++k) {
        weighted_inc_[k].push_back(weighted_regret_inc(m, tracked_[k], duel.i, duel.j));
    }
    rows_.push_back(row);
}

double RegretLedger::weighted_total(std::size_t k) const {
    return std::accumulate(weighted_inc_[k].begin(), weighted_inc_[k].end(), 0.0);
}

void RegretLedger::write_csv(std::ostream& out) const {
    out << "t,i,j,o,borda_inc,condorcet_inc,cum_borda,cum_condorcet,episode,depth,active_set_size\n";
    for (const auto& r : rows_) {
        out << r.t << ',' << r.i << ',' << r.j << ',' << r.o << ',' << format_double(r.borda_inc) << ','
            << (std::isnan(r.condorcet_inc) ? std::string("NA") : format_double(r.condorcet_inc)) << ','
            << format_double(r.cum_borda) << ',' << format_double(r.cum_condorcet) << ','
            << r.meta.episode << ',' << r.meta.depth << ',' << r.meta.active_set_size << '\n';
    }
}

}  // namespace nsduel
