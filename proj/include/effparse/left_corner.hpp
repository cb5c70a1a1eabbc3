#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "effparse/pcfg.hpp"
#include "effparse/symbols.hpp"

namespace effparse {

/// Probability that a symbol's leftmost derivation reaches each POS tag at
/// its left corner, from the closure E = (I - P_lc)^-1 over nonterminals.
class LeftCornerTable {
public:
    /// Throws LeftCornerError if I - P_lc is singular or the closure is not
    /// a valid (non-negative) expectation.
    static LeftCornerTable compute(const Pcfg& pcfg);

    /// R[symbol][pos]; a POS reaches only itself.
    double reach(SymbolId symbol, SymbolId pos) const;
    /// sum_t R[symbol][t] * P(word | t), clamped to [0, 1]. Uncounted.
    double word_prob(const Pcfg& pcfg, SymbolId symbol, std::string_view word) const;
    /// word_prob for every grammar symbol at once.
    std::vector<double> word_probs(const Pcfg& pcfg, std::string_view word) const;

    std::size_t num_symbols() const { return num_symbols_; }
    const std::vector<SymbolId>& pos_tags() const { return pos_; }

    void write(std::ostream& out) const;
    static LeftCornerTable read(std::istream& in);
    friend bool operator==(const LeftCornerTable&, const LeftCornerTable&) = default;

private:
    std::size_t num_symbols_ = 0;
    std::vector<SymbolId> pos_;
    std::vector<std::size_t> pos_index_;  // per symbol; npos if not a POS
    std::vector<double> reach_;           // num_symbols_ x pos_.size()
};

}  // namespace effparse
