#include "effparse/full_model.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "effparse/errors.hpp"
#include "text_io.hpp"

namespace effparse {

namespace {

std::string rhs_key_of(const Tree& node) {
    std::string key;
    for (const Tree& c : node.children) {
        if (!key.empty()) key += ' ';
        key += c.label;
    }
    return key;
}

void read_lines(std::istream& in, std::size_t n, std::vector<std::string>& out, const char* what) {
    std::string line;
    std::getline(in, line);  // rest of the header line
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw SerializationError(std::string("model file: truncated ") + what);
        out.push_back(line);
    }
}

void write_heads(std::ostream& out, const HeadFinder& heads) {
    std::ostringstream table;
    heads.write(table);
    const std::string text = table.str();
    out << "heads " << std::count(text.begin(), text.end(), '\n') << '\n' << text;
}

HeadFinder read_heads(std::istream& in) {
    textio::expect_word(in, "heads");
    std::vector<std::string> lines;
    read_lines(in, textio::read_value<std::size_t>(in, "head table size"), lines, "head table");
    std::string text;
    for (const auto& l : lines) text += l + '\n';
    std::istringstream table(text);
    return HeadFinder::parse(table);
}

}  // namespace

ModelSymbols::ModelSymbols() { unknown_ = table_.intern(kUnknownWord); }

ModelSymbols::ModelSymbols(const std::vector<std::string>& vocabulary)
    : vocabulary_(vocabulary.begin(), vocabulary.end()) {
    unknown_ = table_.intern(kUnknownWord);
}

std::string_view ModelSymbols::word(std::string_view w) const {
    if (w == kRootSentinel || w == kSentenceStart || w == kSentenceEnd) return w;
    return vocabulary_.count(std::string(w)) ? w : kUnknownWord;
}

void ModelSymbols::write(std::ostream& out) const {
    out << "symbols " << table_.size() << '\n';
    for (const auto& n : table_.names()) out << n << '\n';
    std::vector<std::string> vocab(vocabulary_.begin(), vocabulary_.end());
    std::sort(vocab.begin(), vocab.end());
    out << "vocabulary " << vocab.size() << '\n';
    for (const auto& w : vocab) out << w << '\n';
}

ModelSymbols ModelSymbols::read(std::istream& in) {
    using namespace textio;
    ModelSymbols s;
    s.table_ = SymbolTable{};
    expect_word(in, "symbols");
    std::vector<std::string> names;
    read_lines(in, read_value<std::size_t>(in, "symbol count"), names, "symbol table");
    for (const auto& n : names) s.table_.intern(n);
    s.unknown_ = s.table_.find_or(kUnknownWord, 0);
    expect_word(in, "vocabulary");
    std::vector<std::string> vocab;
    read_lines(in, read_value<std::size_t>(in, "vocabulary size"), vocab, "vocabulary");
    s.vocabulary_.insert(vocab.begin(), vocab.end());
    return s;
}

// ---------------------------------------------------------------------------

ParentRuleModel ParentRuleModel::train(const std::vector<Tree>& training, const std::vector<Tree>& heldout,
                                       const InterpolationOptions& options) {
    if (training.empty()) throw TrainingError("parent rule model: empty training corpus");
    ParentRuleModel m;
    const HeadFinder heads = HeadFinder::builtin();
    auto tuples = [&](const std::vector<Tree>& trees) {
        std::vector<EventTuple> out;
        for (const Tree& t : trees) {
            for (const RuleEvent& ev : extract_rule_events(t, heads)) {
                EventTuple tup;
                tup.outcome = m.symbols_.intern(ev.rule.rhs_key());
                tup.context = {m.symbols_.intern(ev.rule.lhs), m.symbols_.intern(ev.parent)};
                out.push_back(std::move(tup));
            }
        }
        return out;
    };
    auto train_tuples = tuples(training);
    for (const Tree& t : training)
        for (const RuleEvent& ev : extract_rule_events(t, heads)) m.lhs_seen_.insert(ev.rule.lhs);
    auto heldout_tuples = tuples(heldout);
    m.model_ = InterpolatedModel::train(train_tuples, heldout_tuples, 2, options);
    return m;
}

std::vector<EventId> ParentRuleModel::context(const Rule& rule, std::string_view parent) const {
    if (!lhs_seen_.count(rule.lhs)) throw ModelDomainError("unknown left-hand side: " + rule.lhs);
    return {symbols_.id(rule.lhs), symbols_.id(parent)};
}

double ParentRuleModel::prob(const Rule& rule, std::string_view parent, EventCounter& counter) const {
    return model_.prob(symbols_.id(rule.rhs_key()), context(rule, parent), counter, EventCategory::Expansion);
}

double ParentRuleModel::prob_uncounted(const Rule& rule, std::string_view parent) const {
    return model_.prob_uncounted(symbols_.id(rule.rhs_key()), context(rule, parent));
}

ParentRuleModel ParentRuleModel::with_constant_lambda(double value) const {
    ParentRuleModel m = *this;
    m.model_ = model_.with_constant_lambda(value);
    return m;
}

// ---------------------------------------------------------------------------

FullModel FullModel::train(const std::vector<Tree>& training, const std::vector<Tree>& heldout, const Pcfg& pcfg,
                           const HeadFinder& heads, const InterpolationOptions& options) {
    if (training.empty()) throw TrainingError("full model: empty training corpus");
    FullModel m;
    m.symbols_ = ModelSymbols(pcfg.vocabulary());
    m.heads_ = heads;

    struct Tuples {
        std::vector<EventTuple> head_pos, head_word, expansion;
    };
    auto collect = [&](const std::vector<Tree>& trees) {
        Tuples out;
        auto& s = m.symbols_;
        for (const Tree& t : trees) {
            for (const Constituent& c : constituents_topdown(t, heads)) {
                const EventId label = s.intern(c.node->label);
                const EventId parent = s.intern(c.parent);
                const EventId head_pos = s.intern(c.head_pos);
                const EventId head_word = s.intern(s.word(c.head_word));
                out.head_pos.push_back({head_pos, {label, parent, s.intern(c.parent_head_pos)}});
                out.head_word.push_back({head_word, {head_pos, label, s.intern(s.word(c.parent_head_word))}});
                out.expansion.push_back({s.intern(rhs_key_of(*c.node)), {label, parent, head_pos, head_word}});
            }
        }
        return out;
    };
    const Tuples tr = collect(training);
    const Tuples ho = collect(heldout);
    m.head_pos_ = InterpolatedModel::train(tr.head_pos, ho.head_pos, 3, options);
    m.head_word_ = InterpolatedModel::train(tr.head_word, ho.head_word, 3, options);
    m.expansion_ = InterpolatedModel::train(tr.expansion, ho.expansion, 4, options);
    return m;
}

std::vector<EventId> FullModel::head_pos_context(const Constituent& c) const {
    return {symbols_.id(c.node->label), symbols_.id(c.parent), symbols_.id(c.parent_head_pos)};
}

std::vector<EventId> FullModel::head_word_context(const Constituent& c) const {
    return {symbols_.id(c.head_pos), symbols_.id(c.node->label), symbols_.id(symbols_.word(c.parent_head_word))};
}

std::vector<EventId> FullModel::expansion_context(const Constituent& c) const {
    return {symbols_.id(c.node->label), symbols_.id(c.parent), symbols_.id(c.head_pos),
            symbols_.id(symbols_.word(c.head_word))};
}

EventId FullModel::expansion_outcome(const Constituent& c) const { return symbols_.id(rhs_key_of(*c.node)); }

double FullModel::head_pos_prob(const Constituent& c, EventCounter& counter) const {
    return head_pos_.prob(symbols_.id(c.head_pos), head_pos_context(c), counter, EventCategory::ConstituentHead);
}

double FullModel::head_word_prob(const Constituent& c, EventCounter& counter) const {
    return head_word_.prob(symbols_.id(symbols_.word(c.head_word)), head_word_context(c), counter,
                           EventCategory::ConstituentHead);
}

double FullModel::expansion_prob(const Constituent& c, EventCounter& counter) const {
    return expansion_.prob(expansion_outcome(c), expansion_context(c), counter, EventCategory::Expansion);
}

void FullModel::write(std::ostream& out) const {
    out << "full-model 1\n";
    symbols_.write(out);
    write_heads(out, heads_);
    head_pos_.write(out);
    head_word_.write(out);
    expansion_.write(out);
}

FullModel FullModel::read(std::istream& in) {
    textio::expect_word(in, "full-model");
    if (textio::read_value<int>(in, "version") != 1) throw SerializationError("full model: unsupported version");
    FullModel m;
    m.symbols_ = ModelSymbols::read(in);
    m.heads_ = read_heads(in);
    m.head_pos_ = InterpolatedModel::read(in);
    m.head_word_ = InterpolatedModel::read(in);
    m.expansion_ = InterpolatedModel::read(in);
    return m;
}

}  // namespace effparse
