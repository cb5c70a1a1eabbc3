#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "effparse/events.hpp"
#include "effparse/full_model.hpp"
#include "effparse/interpolation.hpp"
#include "effparse/pcfg.hpp"
#include "effparse/tree.hpp"

namespace effparse {

/// Stands for kNoSibling in the sibling slot and kSentenceStart in the
/// previous-POS slot.
inline constexpr SymbolId kNoSymbol = 0xffffffffu;

/// Conditioning information available when a symbol is expanded top-down:
/// only structure to its left and above it. Symbols are grammar ids.
struct ExpansionContext {
    SymbolId lhs = 0;
    SymbolId parent = 0;  // the start symbol for the root choice and above
    SymbolId left_sibling = kNoSymbol;
    SymbolId prev_pos = kNoSymbol;
};

/// Conditional model driving the top-down beam parser. The candidate
/// expansions are the grammar's rules; each scoring call records one
/// Expansion event.
class IncrementalModel {
public:
    virtual ~IncrementalModel() = default;
    virtual const Pcfg& grammar() const = 0;
    /// log P(rule rhs | context); the rule's lhs must equal ctx.lhs.
    virtual double expansion_logprob(std::size_t rule, const ExpansionContext& ctx, EventCounter& counter) const = 0;
    /// log P(word | pos, parent).
    virtual double word_logprob(SymbolId pos, SymbolId parent, std::string_view word,
                                EventCounter& counter) const = 0;

    /// Log probability of a complete tree: the root choice, every expansion
    /// and every word, with contexts read off the finished tree. -inf if the
    /// tree uses a symbol or rule outside the grammar. Uncounted.
    double score_tree(const Tree& tree) const;
};

/// The plain PCFG viewed as an incremental model (no context beyond lhs).
class PcfgIncrementalModel final : public IncrementalModel {
public:
    explicit PcfgIncrementalModel(const Pcfg& pcfg) : pcfg_(&pcfg) {}
    const Pcfg& grammar() const override { return *pcfg_; }
    double expansion_logprob(std::size_t rule, const ExpansionContext& ctx, EventCounter& counter) const override;
    double word_logprob(SymbolId pos, SymbolId parent, std::string_view word, EventCounter& counter) const override;

private:
    const Pcfg* pcfg_;
};

/// Interpolated left-context model:
///   expansion  rhs | lhs, parent, left sibling, previous POS
///   word       word | POS, parent
class LeftContextModel final : public IncrementalModel {
public:
    static LeftContextModel train(const std::vector<Tree>& training, const std::vector<Tree>& heldout,
                                  const Pcfg& pcfg, const InterpolationOptions& options = {});

    const Pcfg& grammar() const override { return *pcfg_; }
    double expansion_logprob(std::size_t rule, const ExpansionContext& ctx, EventCounter& counter) const override;
    double word_logprob(SymbolId pos, SymbolId parent, std::string_view word, EventCounter& counter) const override;

    /// Conditioning chain of an expansion, most significant first.
    std::vector<EventId> expansion_context(const ExpansionContext& ctx) const;
    const InterpolatedModel& expansion_model() const { return expansion_; }
    const InterpolatedModel& word_model() const { return word_; }
    const ModelSymbols& symbols() const { return symbols_; }

    void write(std::ostream& out) const;
    /// Rebinds to `pcfg`, which must be the grammar the model was trained with.
    static LeftContextModel read(std::istream& in, const Pcfg& pcfg);

private:
    void bind(const Pcfg& pcfg);
    EventId map(SymbolId s, EventId sentinel) const { return s == kNoSymbol ? sentinel : symbol_map_.at(s); }

    const Pcfg* pcfg_ = nullptr;
    ModelSymbols symbols_;
    InterpolatedModel expansion_;
    InterpolatedModel word_;
    std::vector<EventId> symbol_map_;    // grammar id -> model id
    std::vector<EventId> rule_outcome_;  // grammar rule -> model id of its rhs
    EventId no_sibling_ = 0;
    EventId sentence_start_ = 0;
};

}  // namespace effparse
