#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "effparse/symbols.hpp"
#include "effparse/tree.hpp"
#include "effparse/treebank.hpp"

namespace effparse {

struct PcfgOptions {
    /// Words seen fewer times than this are pooled into per-POS unknown mass.
    std::size_t rare_threshold = 5;
};

struct PcfgRule {
    SymbolId lhs = 0;
    std::vector<SymbolId> rhs;
    std::uint64_t count = 0;
    double prob = 0.0;
    double logprob = 0.0;
};

/// Relative-frequency PCFG with a lexicon. A start symbol (kRootSentinel)
/// rewrites to each observed root label, so parse probabilities include the
/// root choice.
class Pcfg {
public:
    struct RuleCount {
        Rule rule;
        std::uint64_t count = 1;
    };
    struct LexicalCount {
        std::string pos;
        std::string word;
        std::uint64_t count = 1;
    };

    static Pcfg train(const std::vector<Tree>& trees, const PcfgOptions& options = {});
    /// Grammar from explicit counts. Start rules are given with lhs
    /// kRootSentinel; every listed word is in the vocabulary.
    static Pcfg from_counts(const std::vector<RuleCount>& rules, const std::vector<LexicalCount>& lexicon);

    const SymbolTable& symbols() const { return symbols_; }
    SymbolId start() const { return start_; }
    bool is_nonterminal(SymbolId s) const { return s < is_nt_.size() && is_nt_[s]; }
    bool is_pos(SymbolId s) const { return s < is_pos_.size() && is_pos_[s]; }
    const std::vector<SymbolId>& nonterminals() const { return nonterminals_; }
    const std::vector<SymbolId>& pos_tags() const { return pos_tags_; }

    const std::vector<PcfgRule>& rules() const { return rules_; }
    std::span<const std::size_t> rules_for(SymbolId lhs) const;
    std::optional<std::size_t> find_rule(SymbolId lhs, const std::vector<SymbolId>& rhs) const;
    /// P(rhs | lhs); 0 for an unseen expansion. Throws ModelDomainError for an unknown lhs.
    double rule_prob(const Rule& rule) const;

    bool in_vocabulary(std::string_view word) const { return word_tags_.count(std::string(word)) != 0; }
    /// P(word | pos), with out-of-vocabulary words taking the unknown mass.
    double lexical_prob(SymbolId pos, std::string_view word) const;
    double unknown_mass(SymbolId pos) const;
    /// Tags with non-zero probability of emitting `word`, in symbol order.
    std::vector<SymbolId> candidate_tags(std::string_view word) const;
    std::vector<std::string> vocabulary() const;

    /// Log probability of a tree including the start rule; -inf if the tree
    /// uses an unseen rule or emission.
    double tree_logprob(const Tree& tree) const;

    const PcfgOptions& options() const { return options_; }

    void write(std::ostream& out) const;
    static Pcfg read(std::istream& in);

private:
    SymbolId add_symbol(std::string_view name);
    void finalize();
    double subtree_logprob(const Tree& t) const;

    PcfgOptions options_;
    SymbolTable symbols_;
    SymbolId start_ = 0;
    std::vector<char> is_nt_, is_pos_;
    std::vector<SymbolId> nonterminals_, pos_tags_;
    std::vector<PcfgRule> rules_;
    std::vector<std::vector<std::size_t>> by_lhs_;
    std::map<std::pair<SymbolId, std::vector<SymbolId>>, std::size_t> rule_index_;
    std::vector<std::uint64_t> pos_count_;
    std::vector<std::uint64_t> pos_unknown_count_;
    std::unordered_map<std::string, std::vector<std::pair<SymbolId, std::uint64_t>>> word_tags_;
};

}  // namespace effparse
