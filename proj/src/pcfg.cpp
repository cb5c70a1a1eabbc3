#include "effparse/pcfg.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "effparse/errors.hpp"
#include "text_io.hpp"

namespace effparse {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void count_tree(const Tree& t, std::vector<Rule>& rules, std::vector<std::pair<std::string, std::string>>& lexical) {
    if (t.is_preterminal()) {
        lexical.emplace_back(t.label, t.word);
        return;
    }
    Rule r;
    r.lhs = t.label;
    for (const Tree& c : t.children) r.rhs.push_back(c.label);
    rules.push_back(std::move(r));
    for (const Tree& c : t.children) count_tree(c, rules, lexical);
}

}  // namespace

SymbolId Pcfg::add_symbol(std::string_view name) {
    SymbolId id = symbols_.intern(name);
    if (is_nt_.size() <= id) {
        is_nt_.resize(id + 1, 0);
        is_pos_.resize(id + 1, 0);
        by_lhs_.resize(id + 1);
        pos_count_.resize(id + 1, 0);
        pos_unknown_count_.resize(id + 1, 0);
    }
    return id;
}

Pcfg Pcfg::train(const std::vector<Tree>& trees, const PcfgOptions& options) {
    if (trees.empty()) throw TrainingError("cannot train a PCFG from an empty corpus");
    Pcfg g;
    g.options_ = options;
    g.start_ = g.add_symbol(kRootSentinel);
    g.is_nt_[g.start_] = 1;

    std::vector<Rule> rule_instances;
    std::vector<std::pair<std::string, std::string>> lexical;
    for (const Tree& t : trees) {
        rule_instances.push_back(Rule{std::string(kRootSentinel), {t.label}});
        count_tree(t, rule_instances, lexical);
    }
    for (const Rule& r : rule_instances) {
        SymbolId lhs = g.add_symbol(r.lhs);
        g.is_nt_[lhs] = 1;
        std::vector<SymbolId> rhs;
        for (const auto& s : r.rhs) rhs.push_back(g.add_symbol(s));
        auto [it, inserted] = g.rule_index_.try_emplace({lhs, rhs}, g.rules_.size());
        if (inserted) {
            g.rules_.push_back(PcfgRule{lhs, rhs, 0, 0.0, 0.0});
            g.by_lhs_[lhs].push_back(it->second);
        }
        ++g.rules_[it->second].count;
    }

    std::unordered_map<std::string, std::uint64_t> word_count;
    for (const auto& [pos, word] : lexical) ++word_count[word];
    std::map<std::string, std::map<SymbolId, std::uint64_t>> known;
    for (const auto& [pos, word] : lexical) {
        SymbolId p = g.add_symbol(pos);
        g.is_pos_[p] = 1;
        ++g.pos_count_[p];
        if (word_count[word] < options.rare_threshold) {
            ++g.pos_unknown_count_[p];
        } else {
            ++known[word][p];
        }
    }
    for (const auto& [word, tags] : known) g.word_tags_[word].assign(tags.begin(), tags.end());
    g.finalize();
    return g;
}

Pcfg Pcfg::from_counts(const std::vector<RuleCount>& rules, const std::vector<LexicalCount>& lexicon) {
    Pcfg g;
    g.start_ = g.add_symbol(kRootSentinel);
    g.is_nt_[g.start_] = 1;
    for (const RuleCount& rc : rules) {
        if (rc.count == 0 || rc.rule.rhs.empty()) throw TrainingError("pcfg: empty rule or zero count");
        SymbolId lhs = g.add_symbol(rc.rule.lhs);
        g.is_nt_[lhs] = 1;
        std::vector<SymbolId> rhs;
        for (const auto& s : rc.rule.rhs) rhs.push_back(g.add_symbol(s));
        auto [it, inserted] = g.rule_index_.try_emplace({lhs, rhs}, g.rules_.size());
        if (inserted) {
            g.rules_.push_back(PcfgRule{lhs, rhs, 0, 0.0, 0.0});
            g.by_lhs_[lhs].push_back(it->second);
        }
        g.rules_[it->second].count += rc.count;
    }
    std::map<std::string, std::map<SymbolId, std::uint64_t>> known;
    for (const LexicalCount& lc : lexicon) {
        if (lc.count == 0) throw TrainingError("pcfg: zero lexical count");
        SymbolId p = g.add_symbol(lc.pos);
        if (g.is_nt_[p]) throw TrainingError("pcfg: symbol is both a nonterminal and a POS: " + lc.pos);
        g.is_pos_[p] = 1;
        g.pos_count_[p] += lc.count;
        known[lc.word][p] += lc.count;
    }
    for (const auto& [word, tags] : known) g.word_tags_[word].assign(tags.begin(), tags.end());
    g.finalize();
    return g;
}

void Pcfg::finalize() {
    std::vector<std::uint64_t> lhs_total(symbols_.size(), 0);
    for (const PcfgRule& r : rules_) lhs_total[r.lhs] += r.count;
    for (PcfgRule& r : rules_) {
        r.prob = static_cast<double>(r.count) / static_cast<double>(lhs_total[r.lhs]);
        r.logprob = std::log(r.prob);
    }
    nonterminals_.clear();
    pos_tags_.clear();
    for (SymbolId s = 0; s < symbols_.size(); ++s) {
        if (is_nt_[s]) nonterminals_.push_back(s);
        if (is_pos_[s]) pos_tags_.push_back(s);
    }
}

std::span<const std::size_t> Pcfg::rules_for(SymbolId lhs) const {
    if (lhs >= by_lhs_.size()) return {};
    return by_lhs_[lhs];
}

std::optional<std::size_t> Pcfg::find_rule(SymbolId lhs, const std::vector<SymbolId>& rhs) const {
    auto it = rule_index_.find({lhs, rhs});
    if (it == rule_index_.end()) return std::nullopt;
    return it->second;
}

double Pcfg::rule_prob(const Rule& rule) const {
    auto lhs = symbols_.find(rule.lhs);
    if (!lhs || !is_nonterminal(*lhs)) throw ModelDomainError("unknown left-hand side: " + rule.lhs);
    std::vector<SymbolId> rhs;
    for (const auto& s : rule.rhs) {
        auto id = symbols_.find(s);
        if (!id) return 0.0;
        rhs.push_back(*id);
    }
    auto idx = find_rule(*lhs, rhs);
    return idx ? rules_[*idx].prob : 0.0;
}

double Pcfg::unknown_mass(SymbolId pos) const {
    if (!is_pos(pos) || pos_count_[pos] == 0) return 0.0;
    return static_cast<double>(pos_unknown_count_[pos]) / static_cast<double>(pos_count_[pos]);
}

double Pcfg::lexical_prob(SymbolId pos, std::string_view word) const {
    if (!is_pos(pos)) return 0.0;
    auto it = word_tags_.find(std::string(word));
    if (it == word_tags_.end()) return unknown_mass(pos);
    for (const auto& [p, c] : it->second)
        if (p == pos) return static_cast<double>(c) / static_cast<double>(pos_count_[pos]);
    return 0.0;
}

std::vector<SymbolId> Pcfg::candidate_tags(std::string_view word) const {
    std::vector<SymbolId> out;
    auto it = word_tags_.find(std::string(word));
    if (it != word_tags_.end()) {
        for (const auto& [p, c] : it->second) out.push_back(p);
    } else {
        for (SymbolId p : pos_tags_)
            if (pos_unknown_count_[p] > 0) out.push_back(p);
    }
    return out;
}

std::vector<std::string> Pcfg::vocabulary() const {
    std::vector<std::string> out;
    out.reserve(word_tags_.size());
    for (const auto& [w, tags] : word_tags_) out.push_back(w);
    std::sort(out.begin(), out.end());
    return out;
}

double Pcfg::subtree_logprob(const Tree& t) const {
    auto label = symbols_.find(t.label);
    if (!label) return kNegInf;
    if (t.is_preterminal()) {
        double p = lexical_prob(*label, t.word);
        return p > 0.0 ? std::log(p) : kNegInf;
    }
    std::vector<SymbolId> rhs;
    for (const Tree& c : t.children) {
        auto id = symbols_.find(c.label);
        if (!id) return kNegInf;
        rhs.push_back(*id);
    }
    auto idx = find_rule(*label, rhs);
    if (!idx) return kNegInf;
    double lp = rules_[*idx].logprob;
    for (const Tree& c : t.children) lp += subtree_logprob(c);
    return lp;
}

double Pcfg::tree_logprob(const Tree& tree) const {
    auto root = symbols_.find(tree.label);
    if (!root) return kNegInf;
    auto idx = find_rule(start_, {*root});
    if (!idx) return kNegInf;
    return rules_[*idx].logprob + subtree_logprob(tree);
}

void Pcfg::write(std::ostream& out) const {
    out << "pcfg 1\n";
    out << "rare_threshold " << options_.rare_threshold << '\n';
    out << "symbols " << symbols_.size() << '\n';
    for (SymbolId s = 0; s < symbols_.size(); ++s)
        out << symbols_.name(s) << ' ' << int(is_nt_[s]) << ' ' << int(is_pos_[s]) << ' ' << pos_count_[s] << ' '
            << pos_unknown_count_[s] << '\n';
    out << "rules " << rules_.size() << '\n';
    for (const PcfgRule& r : rules_) {
        out << r.count << ' ' << r.lhs << ' ' << r.rhs.size();
        for (SymbolId s : r.rhs) out << ' ' << s;
        out << '\n';
    }
    auto vocab = vocabulary();
    out << "lexicon " << vocab.size() << '\n';
    for (const auto& w : vocab) {
        const auto& tags = word_tags_.at(w);
        out << w << ' ' << tags.size();
        for (const auto& [p, c] : tags) out << ' ' << p << ' ' << c;
        out << '\n';
    }
    out << "end\n";
}

Pcfg Pcfg::read(std::istream& in) {
    using namespace textio;
    Pcfg g;
    expect_word(in, "pcfg");
    if (read_value<int>(in, "version") != 1) throw SerializationError("pcfg: unsupported version");
    expect_word(in, "rare_threshold");
    g.options_.rare_threshold = read_value<std::size_t>(in, "rare_threshold");
    expect_word(in, "symbols");
    const auto n = read_value<std::size_t>(in, "symbol count");
    for (std::size_t i = 0; i < n; ++i) {
        SymbolId s = g.add_symbol(read_value<std::string>(in, "symbol"));
        g.is_nt_[s] = static_cast<char>(read_value<int>(in, "nt flag"));
        g.is_pos_[s] = static_cast<char>(read_value<int>(in, "pos flag"));
        g.pos_count_[s] = read_value<std::uint64_t>(in, "pos count");
        g.pos_unknown_count_[s] = read_value<std::uint64_t>(in, "unknown count");
    }
    g.start_ = g.symbols_.find(kRootSentinel).value_or(0);
    expect_word(in, "rules");
    const auto nr = read_value<std::size_t>(in, "rule count");
    for (std::size_t i = 0; i < nr; ++i) {
        PcfgRule r;
        r.count = read_value<std::uint64_t>(in, "rule count");
        r.lhs = read_value<SymbolId>(in, "lhs");
        const auto k = read_value<std::size_t>(in, "rhs length");
        for (std::size_t j = 0; j < k; ++j) r.rhs.push_back(read_value<SymbolId>(in, "rhs"));
        if (r.lhs >= n) throw SerializationError("pcfg: rule symbol out of range");
        for (SymbolId s : r.rhs)
            if (s >= n) throw SerializationError("pcfg: rule symbol out of range");
        g.rule_index_.emplace(std::make_pair(r.lhs, r.rhs), g.rules_.size());
        g.by_lhs_[r.lhs].push_back(g.rules_.size());
        g.rules_.push_back(std::move(r));
    }
    expect_word(in, "lexicon");
    const auto nw = read_value<std::size_t>(in, "lexicon size");
    for (std::size_t i = 0; i < nw; ++i) {
        auto word = read_value<std::string>(in, "word");
        const auto k = read_value<std::size_t>(in, "tag count");
        auto& tags = g.word_tags_[word];
        for (std::size_t j = 0; j < k; ++j) {
            auto p = read_value<SymbolId>(in, "tag");
            auto c = read_value<std::uint64_t>(in, "count");
            tags.emplace_back(p, c);
        }
    }
    expect_word(in, "end");
    g.finalize();
    return g;
}

}  // namespace effparse
