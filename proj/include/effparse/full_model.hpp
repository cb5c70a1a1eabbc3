#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "effparse/events.hpp"
#include "effparse/interpolation.hpp"
#include "effparse/pcfg.hpp"
#include "effparse/symbols.hpp"
#include "effparse/treebank.hpp"

namespace effparse {

inline constexpr std::string_view kUnknownWord = "<unk>";

/// Symbol table shared by the sub-models of one conditional model, plus the
/// known-word list used to fold rare and unseen words into kUnknownWord.
class ModelSymbols {
public:
    ModelSymbols();
    explicit ModelSymbols(const std::vector<std::string>& vocabulary);

    EventId intern(std::string_view name) { return table_.intern(name); }
    /// Lookup without growing the table; unseen names map to the unknown id.
    EventId id(std::string_view name) const { return table_.find_or(name, unknown_); }
    EventId unknown() const { return unknown_; }
    /// Folds words outside the vocabulary to kUnknownWord; sentinels pass through.
    std::string_view word(std::string_view w) const;
    const SymbolTable& table() const { return table_; }

    void write(std::ostream& out) const;
    static ModelSymbols read(std::istream& in);

private:
    SymbolTable table_;
    std::unordered_set<std::string> vocabulary_;
    EventId unknown_ = 0;
};

/// P(rhs | lhs, parent) with deleted-interpolation backoff to P(rhs | lhs).
class ParentRuleModel {
public:
    static ParentRuleModel train(const std::vector<Tree>& training, const std::vector<Tree>& heldout,
                                 const InterpolationOptions& options = {});

    /// Records one Expansion event. Throws ModelDomainError for an unknown lhs.
    double prob(const Rule& rule, std::string_view parent, EventCounter& counter) const;
    double prob_uncounted(const Rule& rule, std::string_view parent) const;

    const InterpolatedModel& model() const { return model_; }
    const ModelSymbols& symbols() const { return symbols_; }
    ParentRuleModel with_constant_lambda(double value) const;

private:
    std::vector<EventId> context(const Rule& rule, std::string_view parent) const;

    ModelSymbols symbols_;
    std::unordered_set<std::string> lhs_seen_;
    InterpolatedModel model_;
};

/// Top-down generative model used to rescore complete parses. Each
/// constituent contributes three factors, in this order:
///   head POS   | label, parent, parent's head POS
///   head word  | head POS, label, parent's head word
///   expansion  | label, parent, head POS, head word
class FullModel {
public:
    static FullModel train(const std::vector<Tree>& training, const std::vector<Tree>& heldout, const Pcfg& pcfg,
                           const HeadFinder& heads, const InterpolationOptions& options = {});

    double head_pos_prob(const Constituent& c, EventCounter& counter) const;
    double head_word_prob(const Constituent& c, EventCounter& counter) const;
    double expansion_prob(const Constituent& c, EventCounter& counter) const;

    std::vector<EventId> head_pos_context(const Constituent& c) const;
    std::vector<EventId> head_word_context(const Constituent& c) const;
    std::vector<EventId> expansion_context(const Constituent& c) const;
    EventId expansion_outcome(const Constituent& c) const;

    const HeadFinder& heads() const { return heads_; }
    const ModelSymbols& symbols() const { return symbols_; }
    const InterpolatedModel& head_pos_model() const { return head_pos_; }
    const InterpolatedModel& head_word_model() const { return head_word_; }
    const InterpolatedModel& expansion_model() const { return expansion_; }

    void write(std::ostream& out) const;
    static FullModel read(std::istream& in);

private:
    ModelSymbols symbols_;
    HeadFinder heads_;
    InterpolatedModel head_pos_;
    InterpolatedModel head_word_;
    InterpolatedModel expansion_;
};

}  // namespace effparse
