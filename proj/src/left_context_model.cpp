#include "effparse/left_context_model.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "effparse/errors.hpp"
#include "effparse/treebank.hpp"
#include "text_io.hpp"

namespace effparse {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Emission {
    const Tree* preterminal;
    std::string_view parent;
};

void emissions(const Tree& t, std::string_view parent, std::vector<Emission>& out) {
    if (t.is_preterminal()) {
        out.push_back({&t, parent});
        return;
    }
    for (const Tree& c : t.children) emissions(c, t.label, out);
}

std::string rhs_key_of(const Tree& node) {
    std::string key;
    for (const Tree& c : node.children) {
        if (!key.empty()) key += ' ';
        key += c.label;
    }
    return key;
}

}  // namespace

double IncrementalModel::score_tree(const Tree& tree) const {
    const Pcfg& g = grammar();
    const SymbolTable& syms = g.symbols();
    auto id = [&](std::string_view name, std::string_view sentinel) -> std::optional<SymbolId> {
        if (name == sentinel) return kNoSymbol;
        return syms.find(name);
    };
    EventCounter scratch;
    double lp = 0.0;

    auto root = syms.find(tree.label);
    if (!root) return kNegInf;
    auto root_rule = g.find_rule(g.start(), {*root});
    if (!root_rule) return kNegInf;
    lp += expansion_logprob(*root_rule, {g.start(), g.start(), kNoSymbol, kNoSymbol}, scratch);

    for (const Constituent& c : constituents_topdown(tree, HeadFinder::builtin())) {
        auto lhs = syms.find(c.node->label);
        auto parent = c.parent == kRootSentinel ? std::optional<SymbolId>(g.start()) : syms.find(c.parent);
        auto sibling = id(c.left_sibling, kNoSibling);
        auto prev = id(c.prev_pos, kSentenceStart);
        if (!lhs || !parent || !sibling || !prev) return kNegInf;
        std::vector<SymbolId> rhs;
        for (const Tree& child : c.node->children) {
            auto s = syms.find(child.label);
            if (!s) return kNegInf;
            rhs.push_back(*s);
        }
        auto rule = g.find_rule(*lhs, rhs);
        if (!rule) return kNegInf;
        lp += expansion_logprob(*rule, {*lhs, *parent, *sibling, *prev}, scratch);
    }

    std::vector<Emission> ems;
    emissions(tree, kRootSentinel, ems);
    for (const Emission& e : ems) {
        auto pos = syms.find(e.preterminal->label);
        auto parent = e.parent == kRootSentinel ? std::optional<SymbolId>(g.start()) : syms.find(e.parent);
        if (!pos || !parent || !g.is_pos(*pos)) return kNegInf;
        lp += word_logprob(*pos, *parent, e.preterminal->word, scratch);
    }
    return lp;
}

// ---------------------------------------------------------------------------

double PcfgIncrementalModel::expansion_logprob(std::size_t rule, const ExpansionContext& ctx,
                                               EventCounter& counter) const {
    const PcfgRule& r = pcfg_->rules().at(rule);
    if (r.lhs != ctx.lhs) throw ModelDomainError("expansion context does not match the rule's left-hand side");
    notify_score(EventCategory::Expansion);
    counter.record(EventCategory::Expansion);
    return r.logprob;
}

double PcfgIncrementalModel::word_logprob(SymbolId pos, SymbolId, std::string_view word,
                                          EventCounter& counter) const {
    notify_score(EventCategory::Expansion);
    counter.record(EventCategory::Expansion);
    const double p = pcfg_->lexical_prob(pos, word);
    return p > 0.0 ? std::log(p) : kNegInf;
}

// ---------------------------------------------------------------------------

LeftContextModel LeftContextModel::train(const std::vector<Tree>& training, const std::vector<Tree>& heldout,
                                         const Pcfg& pcfg, const InterpolationOptions& options) {
    if (training.empty()) throw TrainingError("left-context model: empty training corpus");
    LeftContextModel m;
    m.symbols_ = ModelSymbols(pcfg.vocabulary());
    auto& s = m.symbols_;
    const HeadFinder heads = HeadFinder::builtin();
    auto collect = [&](const std::vector<Tree>& trees, std::vector<EventTuple>& expansion,
                       std::vector<EventTuple>& words) {
        for (const Tree& t : trees) {
            const EventId root = s.intern(kRootSentinel);
            expansion.push_back({s.intern(t.label), {root, root, s.intern(kNoSibling), s.intern(kSentenceStart)}});
            for (const Constituent& c : constituents_topdown(t, heads)) {
                expansion.push_back({s.intern(rhs_key_of(*c.node)),
                                     {s.intern(c.node->label), s.intern(c.parent), s.intern(c.left_sibling),
                                      s.intern(c.prev_pos)}});
            }
            std::vector<Emission> ems;
            emissions(t, kRootSentinel, ems);
            for (const Emission& e : ems)
                words.push_back({s.intern(s.word(e.preterminal->word)),
                                 {s.intern(e.preterminal->label), s.intern(e.parent)}});
        }
    };
    std::vector<EventTuple> tr_exp, tr_word, ho_exp, ho_word;
    collect(training, tr_exp, tr_word);
    collect(heldout, ho_exp, ho_word);
    m.expansion_ = InterpolatedModel::train(tr_exp, ho_exp, 4, options);
    m.word_ = InterpolatedModel::train(tr_word, ho_word, 2, options);
    m.bind(pcfg);
    return m;
}

void LeftContextModel::bind(const Pcfg& pcfg) {
    pcfg_ = &pcfg;
    const SymbolTable& syms = pcfg.symbols();
    symbol_map_.clear();
    for (const auto& name : syms.names()) symbol_map_.push_back(symbols_.intern(name));
    rule_outcome_.clear();
    for (const PcfgRule& r : pcfg.rules()) {
        std::string key;
        for (SymbolId x : r.rhs) {
            if (!key.empty()) key += ' ';
            key += syms.name(x);
        }
        rule_outcome_.push_back(symbols_.intern(key));
    }
    no_sibling_ = symbols_.intern(kNoSibling);
    sentence_start_ = symbols_.intern(kSentenceStart);
}

std::vector<EventId> LeftContextModel::expansion_context(const ExpansionContext& ctx) const {
    return {map(ctx.lhs, no_sibling_), map(ctx.parent, no_sibling_), map(ctx.left_sibling, no_sibling_),
            map(ctx.prev_pos, sentence_start_)};
}

double LeftContextModel::expansion_logprob(std::size_t rule, const ExpansionContext& ctx,
                                           EventCounter& counter) const {
    if (rule >= rule_outcome_.size() || pcfg_->rules()[rule].lhs != ctx.lhs || ctx.lhs == kNoSymbol ||
        ctx.parent == kNoSymbol)
        throw ModelDomainError("malformed expansion context");
    const auto chain = expansion_context(ctx);
    const double p = expansion_.prob(rule_outcome_[rule], chain, counter, EventCategory::Expansion);
    return p > 0.0 ? std::log(p) : kNegInf;
}

double LeftContextModel::word_logprob(SymbolId pos, SymbolId parent, std::string_view word,
                                      EventCounter& counter) const {
    if (pos == kNoSymbol || parent == kNoSymbol) throw ModelDomainError("malformed word context");
    const EventId chain[2] = {map(pos, 0), map(parent, 0)};
    const double p = word_.prob(symbols_.id(symbols_.word(word)), chain, counter, EventCategory::Expansion);
    return p > 0.0 ? std::log(p) : kNegInf;
}

void LeftContextModel::write(std::ostream& out) const {
    out << "left-context-model 1\n";
    symbols_.write(out);
    expansion_.write(out);
    word_.write(out);
}

LeftContextModel LeftContextModel::read(std::istream& in, const Pcfg& pcfg) {
    using namespace textio;
    expect_word(in, "left-context-model");
    if (read_value<int>(in, "version") != 1) throw SerializationError("left-context model: unsupported version");
    LeftContextModel m;
    m.symbols_ = ModelSymbols::read(in);
    m.expansion_ = InterpolatedModel::read(in);
    m.word_ = InterpolatedModel::read(in);
    const std::size_t before = m.symbols_.table().size();
    m.bind(pcfg);
    if (m.symbols_.table().size() != before)
        throw SerializationError("left-context model: grammar does not match the trained model");
    return m;
}

}  // namespace effparse
