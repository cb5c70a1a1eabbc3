#include "effparse/treebank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "effparse/errors.hpp"

namespace effparse {

std::string strip_function_tag(std::string_view label) {
    if (label.empty() || label.front() == '-') return std::string(label);
    auto cut = label.find_first_of("-=");
    return std::string(label.substr(0, cut));
}

namespace {

std::optional<Tree> normalize_node(const Tree& t, const NormalizeOptions& opt) {
    if (opt.remove_empty_elements && opt.empty_labels.count(t.label)) return std::nullopt;
    Tree out;
    out.label = opt.strip_function_tags ? strip_function_tag(t.label) : t.label;
    if (t.is_preterminal()) {
        out.word = t.word;
        return out;
    }
    for (const Tree& c : t.children) {
        if (auto nc = normalize_node(c, opt)) out.children.push_back(std::move(*nc));
    }
    if (out.children.empty()) return std::nullopt;
    return out;
}

}  // namespace

Tree normalize(const Tree& tree, const NormalizeOptions& options) {
    auto out = normalize_node(tree, options);
    if (!out) throw DegenerateTreeError("tree has an empty yield after normalization: " + print_bracketed(tree));
    return std::move(*out);
}

NormalizedCorpus normalize_corpus(const std::vector<Tree>& trees, const NormalizeOptions& options) {
    NormalizedCorpus out;
    out.trees.reserve(trees.size());
    for (const Tree& t : trees) {
        try {
            out.trees.push_back(normalize(t, options));
        } catch (const DegenerateTreeError&) {
            ++out.skipped;
        }
    }
    return out;
}

CorpusSplit split_corpus(const std::vector<Tree>& trees, double heldout_fraction, double test_fraction,
                         std::uint64_t seed) {
    if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0))
        throw SplitError("heldout fraction must lie in (0,1)");
    if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw SplitError("test fraction must lie in [0,1)");
    if (heldout_fraction + test_fraction >= 1.0) throw SplitError("fractions must sum to less than 1");

    const std::size_t n = trees.size();
    const auto n_heldout = static_cast<std::size_t>(std::llround(static_cast<double>(n) * heldout_fraction));
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    if (n_heldout < 1 || (test_fraction > 0.0 && n_test < 1) || n_heldout + n_test >= n)
        throw SplitError("corpus of " + std::to_string(n) + " trees is too small for the requested split");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Explicit Fisher-Yates: std::shuffle's algorithm is implementation-defined.
    std::mt19937_64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(order[i], order[j]);
    }

    CorpusSplit split;
    split.seed = seed;
    split.test_index.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.heldout_index.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
                               order.begin() + static_cast<std::ptrdiff_t>(n_test + n_heldout));
    split.train_index.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test + n_heldout), order.end());
    for (auto* idx : {&split.train_index, &split.heldout_index, &split.test_index}) std::sort(idx->begin(), idx->end());
    for (std::size_t i : split.train_index) split.train.push_back(trees[i]);
    for (std::size_t i : split.heldout_index) split.heldout.push_back(trees[i]);
    for (std::size_t i : split.test_index) split.test.push_back(trees[i]);
    return split;
}

std::string Rule::rhs_key() const {
    std::string out;
    for (const auto& s : rhs) {
        if (!out.empty()) out += ' ';
        out += s;
    }
    return out;
}

HeadFinder HeadFinder::builtin() {
    static constexpr std::string_view kTable = R"(ADJP left NNS QP NN $ ADVP JJ VBN VBG ADJP JJR NP JJS DT FW RBR RBS SBAR RB
ADVP right RB RBR RBS FW ADVP TO CD JJR JJ IN NP JJS NN
CONJP right CC RB IN
FRAG right
INTJ left
LST right LS :
NAC left NN NNS NNP NNPS NP NAC EX $ CD QP PRP VBG JJ JJS JJR ADJP FW
NP right NN NNP NNPS NNS NX POS JJR PRP NP CD JJ QP
NX right NN NNP NNPS NNS NX
PP left IN TO VBG VBN RP FW
PRN left
PRT right RP
QP left $ IN NNS NN JJ RB DT CD NCD QP JJR JJS
RRC right VP NP ADVP ADJP PP
S left TO IN VP S SBAR ADJP UCP NP
SBAR left WHNP WHPP WHADVP WHADJP IN DT S SQ SINV SBAR FRAG
SBARQ left SQ S SINV SBARQ FRAG
SINV left VBZ VBD VBP VB MD VP S SINV ADJP NP
SQ left VBZ VBD VBP VB MD VP SQ
UCP right
VP left TO VBD VBN MD VBZ VB VBG VBP VP ADJP NN NNS NP
WHADJP left CC WRB JJ ADJP
WHADVP right CC WRB
WHNP left WDT WP WP$ WHADJP WHPP WHNP
WHPP right IN TO FW
)";
    std::istringstream in{std::string(kTable)};
    return parse(in);
}

HeadFinder HeadFinder::parse(std::istream& in) {
    HeadFinder finder;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::string lhs, dir;
        if (!(fields >> lhs) || lhs.front() == '#') continue;
        if (!(fields >> dir) || (dir != "left" && dir != "right"))
            throw ConfigError("head table line " + std::to_string(line_no) + ": direction must be left or right");
        Entry entry;
        entry.direction = dir == "left" ? Direction::Left : Direction::Right;
        for (std::string sym; fields >> sym;) entry.priorities.push_back(sym);
        finder.table_[lhs] = std::move(entry);
    }
    return finder;
}

HeadFinder HeadFinder::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open head table: " + path);
    return parse(in);
}

void HeadFinder::write(std::ostream& out) const {
    for (const auto& [lhs, e] : table_) {
        out << lhs << (e.direction == Direction::Left ? " left" : " right");
        for (const auto& p : e.priorities) out << ' ' << p;
        out << '\n';
    }
}

std::size_t HeadFinder::find_head(std::string_view lhs, const std::vector<std::string>& rhs) const {
    if (rhs.size() <= 1) return 0;
    auto it = table_.find(lhs);
    if (it == table_.end()) return rhs.size() - 1;
    const Entry& e = it->second;
    const bool from_left = e.direction == Direction::Left;
    for (const auto& want : e.priorities) {
        if (from_left) {
            for (std::size_t i = 0; i < rhs.size(); ++i)
                if (rhs[i] == want) return i;
        } else {
            for (std::size_t i = rhs.size(); i-- > 0;)
                if (rhs[i] == want) return i;
        }
    }
    return from_left ? 0 : rhs.size() - 1;
}

std::size_t HeadFinder::find_head(const Tree& node) const {
    std::vector<std::string> rhs;
    rhs.reserve(node.children.size());
    for (const Tree& c : node.children) rhs.push_back(c.label);
    return find_head(node.label, rhs);
}

namespace {

struct Head {
    std::string pos;
    std::string word;
};

class ConstituentCollector {
public:
    ConstituentCollector(const HeadFinder& heads, const Tree& root) : heads_(heads), tags_(root.tags()) {}

    Head visit(const Tree& t, std::size_t start, const std::string& parent, const Head& parent_head,
               const std::string& left_sibling, std::vector<Constituent>& out) {
        if (t.is_preterminal()) return {t.label, t.word};
        const std::size_t slot = out.size();
        out.emplace_back();
        {
            Constituent& c = out[slot];
            c.node = &t;
            c.start = start;
            c.end = start + t.num_words();
            c.parent = parent;
            c.parent_head_pos = parent_head.pos;
            c.parent_head_word = parent_head.word;
            c.left_sibling = left_sibling;
            c.prev_pos = start == 0 ? std::string(kSentenceStart) : tags_[start - 1];
            c.head_child = heads_.find_head(t);
            Head h = lexical_head(t);
            c.head_pos = h.pos;
            c.head_word = h.word;
        }
        const Head own{out[slot].head_pos, out[slot].head_word};
        std::size_t pos = start;
        std::string sibling(kNoSibling);
        for (const Tree& child : t.children) {
            visit(child, pos, t.label, own, sibling, out);
            pos += child.num_words();
            sibling = child.label;
        }
        return own;
    }

private:
    Head lexical_head(const Tree& t) const {
        const Tree* cur = &t;
        while (!cur->is_preterminal()) cur = &cur->children[heads_.find_head(*cur)];
        return {cur->label, cur->word};
    }

    const HeadFinder& heads_;
    std::vector<std::string> tags_;
};

}  // namespace

std::vector<Constituent> constituents_topdown(const Tree& tree, const HeadFinder& heads) {
    std::vector<Constituent> out;
    ConstituentCollector collector(heads, tree);
    const Head root{std::string(kRootSentinel), std::string(kRootSentinel)};
    collector.visit(tree, 0, std::string(kRootSentinel), root, std::string(kNoSibling), out);
    return out;
}

std::vector<RuleEvent> extract_rule_events(const Tree& tree, const HeadFinder& heads) {
    std::vector<RuleEvent> out;
    for (const Constituent& c : constituents_topdown(tree, heads)) {
        RuleEvent ev;
        ev.rule.lhs = c.node->label;
        for (const Tree& child : c.node->children) ev.rule.rhs.push_back(child.label);
        ev.parent = c.parent;
        ev.head_word = c.head_word;
        ev.head_pos = c.head_pos;
        out.push_back(std::move(ev));
    }
    return out;
}

NormalizedCorpus load_treebank(const std::string& path, const NormalizeOptions& options) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open treebank: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return normalize_corpus(read_bracketed(buf.str()), options);
}

}  // namespace effparse
