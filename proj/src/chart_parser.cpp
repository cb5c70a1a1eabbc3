#include "effparse/chart_parser.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "effparse/treebank.hpp"

namespace effparse {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t pair_key(SymbolId a, SymbolId b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

// Relative slack for probability-threshold comparisons.
constexpr double kRelTolerance = 1e-12;

}  // namespace

// ---------------------------------------------------------------------------
// BinarizedGrammar

BinarizedGrammar::BinarizedGrammar(const Pcfg& pcfg) : pcfg_(&pcfg), symbols_(pcfg.symbols()) {
    first_intermediate_ = static_cast<SymbolId>(symbols_.size());
    std::unordered_map<std::uint64_t, std::vector<BinaryRule>> binary;
    auto add_binary = [&](SymbolId parent, SymbolId left, SymbolId right, double lp) {
        auto& list = binary[pair_key(left, right)];
        for (const auto& r : list)
            if (r.parent == parent) return;
        list.push_back({parent, lp});
    };
    unary_.resize(symbols_.size());
    for (const PcfgRule& r : pcfg.rules()) {
        if (r.rhs.size() == 1) {
            unary_[r.rhs[0]].push_back({r.lhs, r.logprob});
        } else if (r.rhs.size() == 2) {
            add_binary(r.lhs, r.rhs[0], r.rhs[1], r.logprob);
        } else {
            const std::string& lhs_name = symbols_.name(r.lhs);
            std::string name = "@" + lhs_name + "|" + symbols_.name(r.rhs[0]);
            SymbolId prev = r.rhs[0];
            for (std::size_t i = 1; i + 1 < r.rhs.size(); ++i) {
                name += " " + symbols_.name(r.rhs[i]);
                const std::size_t before = symbols_.size();
                SymbolId inter = symbols_.intern(name);
                if (symbols_.size() != before) base_.push_back(r.lhs);
                add_binary(inter, prev, r.rhs[i], 0.0);
                prev = inter;
            }
            add_binary(r.lhs, prev, r.rhs.back(), r.logprob);
        }
    }
    unary_.resize(symbols_.size());
    binary_ = std::move(binary);
}

std::span<const BinarizedGrammar::UnaryRule> BinarizedGrammar::unary_parents(SymbolId child) const {
    if (child >= unary_.size()) return {};
    return unary_[child];
}

std::span<const BinarizedGrammar::BinaryRule> BinarizedGrammar::binary_parents(SymbolId left, SymbolId right) const {
    auto it = binary_.find(pair_key(left, right));
    if (it == binary_.end()) return {};
    return it->second;
}

// ---------------------------------------------------------------------------
// PackedChart

std::optional<std::size_t> PackedChart::find(SymbolId label, std::size_t start, std::size_t end) const {
    auto it = index_.find(key(label, start, end));
    if (it == index_.end() || !edges_[it->second].in_chart) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> PackedChart::find(std::string_view label, std::size_t start, std::size_t end) const {
    auto id = grammar_->symbols().find(label);
    if (!id) return std::nullopt;
    return find(*id, start, end);
}

std::optional<std::size_t> PackedChart::root_edge() const {
    if (words_.empty()) return std::nullopt;
    return find(grammar_->start(), 0, words_.size());
}

std::set<std::tuple<std::string, std::size_t, std::size_t>> PackedChart::chart_keys() const {
    std::set<std::tuple<std::string, std::size_t, std::size_t>> out;
    for (const Edge& e : edges_)
        if (e.in_chart) out.emplace(grammar_->symbols().name(e.label), e.start, e.end);
    return out;
}

// ---------------------------------------------------------------------------
// Scoring

namespace {

double boundary_fom(const BoundaryModel& boundary, std::optional<std::size_t> label, std::size_t start,
                    std::size_t end, double inside, const std::vector<std::optional<std::size_t>>& pos_cond,
                    EventCounter& counter) {
    notify_score(EventCategory::Edge);
    counter.record(EventCategory::Edge);
    if (inside == kNegInf) return kNegInf;
    // pos_cond[0] is the sentence-start sentinel, pos_cond[i + 1] the POS of word i.
    return inside + boundary.left(label, pos_cond[start]) + boundary.right(label, pos_cond[end + 1]) +
           boundary.span(end - start);
}

std::vector<std::optional<std::size_t>> boundary_conditions(const BoundaryModel& boundary,
                                                             std::span<const std::string> pos_context) {
    std::vector<std::optional<std::size_t>> out;
    out.reserve(pos_context.size() + 2);
    out.push_back(boundary.condition_index(kSentenceStart));
    for (const auto& p : pos_context) out.push_back(boundary.condition_index(p));
    out.push_back(boundary.condition_index(kSentenceEnd));
    return out;
}

}  // namespace

double fom_edge(const BoundaryModel& boundary, std::string_view label, std::size_t start, std::size_t end,
                double inside_logprob, std::span<const std::string> pos_context, EventCounter& counter) {
    if (start >= end || end > pos_context.size()) throw ModelDomainError("fom_edge: span outside the sentence");
    return boundary_fom(boundary, boundary.label_index(label), start, end, inside_logprob,
                        boundary_conditions(boundary, pos_context), counter);
}

// ---------------------------------------------------------------------------
// ChartParser

ChartParser::ChartParser(const Pcfg& pcfg, const BoundaryModel& boundary)
    : grammar_(std::make_shared<BinarizedGrammar>(pcfg)), boundary_(&boundary) {
    const SymbolTable& syms = grammar_->symbols();
    boundary_label_.resize(syms.size());
    for (SymbolId s = 0; s < syms.size(); ++s)
        boundary_label_[s] = boundary.label_index(syms.name(grammar_->base_label(s)));
}

double ChartParser::score_edge(SymbolId label, std::size_t start, std::size_t end, double inside,
                               const std::vector<std::optional<std::size_t>>& pos_cond, EventCounter& counter) const {
    return boundary_fom(*boundary_, boundary_label_[label], start, end, inside, pos_cond, counter);
}

struct ChartParser::Agenda {
    struct Entry {
        double fom;
        std::uint64_t seq;
        std::uint32_t edge;
        std::uint32_t version;
        bool operator<(const Entry& o) const {
            if (fom != o.fom) return fom < o.fom;
            return seq > o.seq;  // earlier insertion wins ties
        }
    };
    std::priority_queue<Entry> heap;
    std::uint64_t next_seq = 0;
    void push(double fom, std::uint32_t edge, std::uint32_t version) { heap.push({fom, next_seq++, edge, version}); }
};

PackedChart ChartParser::best_first_parse(const Sentence& sentence, double overparse_factor,
                                          EventCounter& counter) const {
    if (sentence.empty()) throw ModelDomainError("best_first_parse: empty sentence");
    if (!(overparse_factor >= 1.0)) throw ModelDomainError("best_first_parse: overparse factor must be >= 1");
    const Pcfg& pcfg = grammar_->pcfg();
    const SymbolTable& syms = grammar_->symbols();
    const std::size_t n = sentence.size();

    PackedChart chart;
    chart.grammar_ = grammar_;
    chart.chart_by_start_.resize(n + 1);
    chart.chart_by_end_.resize(n + 1);
    chart.words_ = sentence_words(sentence);
    chart.pos_context_.resize(n);

    // Lexical stage: one Tag event per (POS, word) pair scored.
    struct Lexical {
        SymbolId pos;
        double logprob;
    };
    std::vector<std::vector<Lexical>> lexical(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Token& tok = sentence[i];
        if (tok.tag) {
            auto id = syms.find(*tok.tag);
            if (id && pcfg.is_pos(*id)) lexical[i].push_back({*id, 0.0});
            chart.pos_context_[i] = *tok.tag;
            continue;
        }
        double best = kNegInf;
        for (SymbolId pos : pcfg.candidate_tags(tok.word)) {
            notify_score(EventCategory::Tag);
            counter.record(EventCategory::Tag);
            const double p = pcfg.lexical_prob(pos, tok.word);
            if (p <= 0.0) continue;
            const double lp = std::log(p);
            lexical[i].push_back({pos, lp});
            if (lp > best) {
                best = lp;
                chart.pos_context_[i] = syms.name(pos);
            }
        }
    }
    const auto pos_cond = boundary_conditions(*boundary_, chart.pos_context_);

    Agenda agenda;
    bool stop = false;
    const SymbolId start_symbol = grammar_->start();

    auto propose = [&](SymbolId label, std::size_t s, std::size_t e, double inside, EdgeAlternative alt) {
        const std::uint64_t k = PackedChart::key(label, s, e);
        auto it = chart.index_.find(k);
        if (it != chart.index_.end()) {
            Edge& edge = chart.edges_[it->second];
            if (edge.in_chart) {
                // Already final: pack the derivation without rescoring.
                edge.alternatives.push_back(alt);
                return;
            }
            const double fom = score_edge(label, s, e, inside, pos_cond, counter);
            edge.alternatives.push_back(alt);
            if (inside > edge.inside_logprob) {
                edge.inside_logprob = inside;
                edge.fom = fom;
                ++edge.version;
                agenda.push(fom, it->second, edge.version);
            }
            return;
        }
        const double fom = score_edge(label, s, e, inside, pos_cond, counter);
        const auto idx = static_cast<std::uint32_t>(chart.edges_.size());
        Edge edge;
        edge.label = label;
        edge.start = static_cast<std::uint32_t>(s);
        edge.end = static_cast<std::uint32_t>(e);
        edge.inside_logprob = inside;
        edge.fom = fom;
        edge.alternatives.push_back(alt);
        chart.edges_.push_back(std::move(edge));
        chart.index_.emplace(k, idx);
        agenda.push(fom, idx, 0);
    };

    auto enter_chart = [&](std::uint32_t idx) {
        Edge& edge = chart.edges_[idx];
        edge.in_chart = true;
        chart.chart_by_start_[edge.start].push_back(idx);
        chart.chart_by_end_[edge.end].push_back(idx);
        ++chart.chart_size_;
        if (edge.label == start_symbol && edge.start == 0 && edge.end == n && chart.edges_at_first_parse_ == 0)
            chart.edges_at_first_parse_ = chart.chart_size_;
        if (chart.edges_at_first_parse_ > 0 &&
            static_cast<double>(chart.chart_size_) >= overparse_factor * static_cast<double>(chart.edges_at_first_parse_))
            stop = true;
    };

    auto combine = [&](std::uint32_t idx) {
        const Edge edge = chart.edges_[idx];  // copy: propose() may grow edges_
        for (const auto& u : grammar_->unary_parents(edge.label)) {
            if (u.parent == start_symbol && !(edge.start == 0 && edge.end == n)) continue;
            propose(u.parent, edge.start, edge.end, edge.inside_logprob + u.logprob,
                    {EdgeAlternative::Kind::Unary, static_cast<std::int32_t>(idx), -1, u.logprob});
        }
        const auto right_neighbours = chart.chart_by_start_[edge.end];
        for (std::uint32_t r : right_neighbours) {
            const Edge& right = chart.edges_[r];
            const double inside = edge.inside_logprob + right.inside_logprob;
            const std::uint32_t right_end = right.end;
            for (const auto& b : grammar_->binary_parents(edge.label, right.label))
                propose(b.parent, edge.start, right_end, inside + b.logprob,
                        {EdgeAlternative::Kind::Binary, static_cast<std::int32_t>(idx), static_cast<std::int32_t>(r),
                         b.logprob});
        }
        const auto left_neighbours = chart.chart_by_end_[edge.start];
        for (std::uint32_t l : left_neighbours) {
            if (l == idx) continue;
            const Edge& left = chart.edges_[l];
            const double inside = left.inside_logprob + edge.inside_logprob;
            const std::uint32_t left_start = left.start;
            for (const auto& b : grammar_->binary_parents(left.label, edge.label))
                propose(b.parent, left_start, edge.end, inside + b.logprob,
                        {EdgeAlternative::Kind::Binary, static_cast<std::int32_t>(l), static_cast<std::int32_t>(idx),
                         b.logprob});
        }
    };

    // Preterminal edges go straight into the chart.
    for (std::size_t i = 0; i < n; ++i) {
        for (const Lexical& lex : lexical[i]) {
            const auto idx = static_cast<std::uint32_t>(chart.edges_.size());
            Edge edge;
            edge.label = lex.pos;
            edge.start = static_cast<std::uint32_t>(i);
            edge.end = static_cast<std::uint32_t>(i + 1);
            edge.inside_logprob = lex.logprob;
            edge.fom = lex.logprob;
            edge.alternatives.push_back({EdgeAlternative::Kind::Lexical, -1, -1, lex.logprob});
            chart.edges_.push_back(std::move(edge));
            chart.index_.emplace(PackedChart::key(lex.pos, i, i + 1), idx);
            enter_chart(idx);
            combine(idx);
        }
    }

    while (!stop && !agenda.heap.empty()) {
        const auto top = agenda.heap.top();
        agenda.heap.pop();
        Edge& edge = chart.edges_[top.edge];
        if (edge.in_chart || edge.version != top.version) continue;
        chart.pop_foms_.push_back(top.fom);
        enter_chart(top.edge);
        if (stop) break;
        combine(top.edge);
    }

    if (!chart.has_parse()) {
        auto shared = std::make_shared<PackedChart>(std::move(chart));
        throw NoParseError("no complete parse for a sentence of " + std::to_string(n) + " words", shared);
    }
    return chart;
}

// ---------------------------------------------------------------------------
// Candidate extraction

namespace {

/// Best derivation log probability of every chart edge over all packed
/// alternatives. Binary children are strictly shorter; unary chains within a
/// span are relaxed to a fixpoint (cycles never improve a score <= 0).
std::vector<double> viterbi_inside(const PackedChart& chart) {
    const auto& edges = chart.edges();
    std::vector<double> best(edges.size(), kNegInf);
    std::vector<std::vector<std::uint32_t>> by_length(chart.length() + 1);
    for (std::uint32_t i = 0; i < edges.size(); ++i)
        if (edges[i].in_chart) by_length[edges[i].end - edges[i].start].push_back(i);
    for (const auto& group : by_length) {
        for (std::uint32_t i : group) {
            for (const auto& alt : edges[i].alternatives) {
                double v = kNegInf;
                if (alt.kind == EdgeAlternative::Kind::Lexical) {
                    v = alt.rule_logprob;
                } else if (alt.kind == EdgeAlternative::Kind::Binary) {
                    v = alt.rule_logprob + best[alt.left] + best[alt.right];
                }
                best[i] = std::max(best[i], v);
            }
        }
        for (std::size_t pass = 0; pass <= group.size(); ++pass) {
            bool changed = false;
            for (std::uint32_t i : group) {
                for (const auto& alt : edges[i].alternatives) {
                    if (alt.kind != EdgeAlternative::Kind::Unary) continue;
                    const double v = alt.rule_logprob + best[alt.left];
                    if (v > best[i]) {
                        best[i] = v;
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
    }
    return best;
}

class TreeBuilder {
public:
    TreeBuilder(const PackedChart& chart, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& choices)
        : chart_(chart), choices_(choices) {}

    std::vector<Tree> build() {
        const auto [edge_idx, alt_idx] = choices_.at(pos_++);
        const Edge& edge = chart_.edges()[edge_idx];
        const EdgeAlternative& alt = edge.alternatives[alt_idx];
        const BinarizedGrammar& g = chart_.grammar();
        std::vector<Tree> kids;
        switch (alt.kind) {
            case EdgeAlternative::Kind::Lexical:
                return {Tree::leaf(g.symbols().name(edge.label), chart_.words()[edge.start])};
            case EdgeAlternative::Kind::Unary:
                kids = build();
                break;
            case EdgeAlternative::Kind::Binary: {
                kids = build();
                auto right = build();
                for (auto& t : right) kids.push_back(std::move(t));
                break;
            }
        }
        if (g.is_intermediate(edge.label)) return kids;
        return {Tree::node(g.symbols().name(edge.label), std::move(kids))};
    }

private:
    const PackedChart& chart_;
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& choices_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<Candidate> ChartParser::extract_candidates(const PackedChart& chart, double threshold_ratio,
                                                       std::size_t max_candidates) const {
    if (!(threshold_ratio > 0.0 && threshold_ratio <= 1.0))
        throw ModelDomainError("extract_candidates: threshold ratio must lie in (0,1]");
    auto root = chart.root_edge();
    if (!root) throw NoParseError("extract_candidates: chart holds no complete parse");
    const auto best = viterbi_inside(chart);
    const double best_lp = best[*root];
    if (best_lp == kNegInf) throw NoParseError("extract_candidates: complete parse has zero probability");
    const double cutoff = best_lp + std::log(threshold_ratio) - kRelTolerance * std::max(1.0, std::abs(best_lp));

    // A* over derivations: priority = log prob so far + Viterbi bound of the
    // pending edges, which is exact, so completions arrive best first.
    struct State {
        double inside;
        double bound;
        std::vector<std::uint32_t> pending;  // back = next to expand (leftmost)
        std::vector<std::pair<std::uint32_t, std::uint32_t>> choices;
    };
    struct Entry {
        double priority;
        std::uint64_t seq;
        std::uint32_t state;
        bool operator<(const Entry& o) const {
            if (priority != o.priority) return priority < o.priority;
            return seq > o.seq;
        }
    };
    std::vector<State> states;
    std::priority_queue<Entry> heap;
    std::uint64_t seq = 0;
    states.push_back({0.0, best_lp, {static_cast<std::uint32_t>(*root)}, {}});
    heap.push({best_lp, seq++, 0});

    constexpr std::size_t kMaxExpansions = 2'000'000;
    std::vector<Candidate> out;
    std::size_t expansions = 0;
    const auto& edges = chart.edges();
    while (!heap.empty() && out.size() < max_candidates && expansions < kMaxExpansions) {
        const Entry top = heap.top();
        heap.pop();
        if (top.priority < cutoff) break;
        State st = std::move(states[top.state]);
        if (st.pending.empty()) {
            TreeBuilder builder(chart, st.choices);
            auto trees = builder.build();
            // The root edge is the start symbol; its single child is the parse.
            Tree parse = std::move(trees.front().children.front());
            out.push_back({std::move(parse), st.inside});
            continue;
        }
        ++expansions;
        const std::uint32_t e = st.pending.back();
        st.pending.pop_back();
        const double rest = st.bound - best[e];
        for (std::uint32_t a = 0; a < edges[e].alternatives.size(); ++a) {
            const EdgeAlternative& alt = edges[e].alternatives[a];
            State next;
            next.inside = st.inside + alt.rule_logprob;
            next.pending = st.pending;
            double bound = rest + alt.rule_logprob;
            if (alt.kind == EdgeAlternative::Kind::Binary) {
                next.pending.push_back(static_cast<std::uint32_t>(alt.right));
                next.pending.push_back(static_cast<std::uint32_t>(alt.left));
                bound += best[alt.left] + best[alt.right];
            } else if (alt.kind == EdgeAlternative::Kind::Unary) {
                next.pending.push_back(static_cast<std::uint32_t>(alt.left));
                bound += best[alt.left];
            }
            if (bound == kNegInf || bound < cutoff) continue;
            next.bound = bound;
            next.choices = st.choices;
            next.choices.emplace_back(e, a);
            const double priority = next.pending.empty() ? next.inside : bound;
            states.push_back(std::move(next));
            heap.push({priority, seq++, static_cast<std::uint32_t>(states.size() - 1)});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Second stage

double rescore_parse(const FullModel& model, const Tree& tree, EventCounter& counter) {
    double lp = 0.0;
    for (const Constituent& c : constituents_topdown(tree, model.heads())) {
        lp += std::log(model.head_pos_prob(c, counter));
        lp += std::log(model.head_word_prob(c, counter));
        lp += std::log(model.expansion_prob(c, counter));
    }
    return lp;
}

EcResult ec_parse(const ChartParser& parser, const FullModel& model, const Sentence& sentence, const EcConfig& config,
                  EventCounter& counter) {
    Stopwatch clock;
    PackedChart chart = parser.best_first_parse(sentence, config.overparse_factor, counter);
    auto candidates = parser.extract_candidates(chart, config.threshold_ratio, config.max_candidates);
    if (candidates.empty()) throw NoParseError("ec_parse: no candidate parses");
    std::size_t best = 0;
    double best_score = kNegInf;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double score = rescore_parse(model, candidates[i].tree, counter);
        if (i == 0 || score > best_score) {
            best = i;
            best_score = score;
        }
    }
    EcResult result;
    result.num_candidates = candidates.size();
    result.full_logprob = best_score;
    result.pcfg_logprob = candidates[best].pcfg_logprob;
    result.tree = std::move(candidates[best].tree);
    result.seconds = clock.seconds();
    result.counter = counter;
    return result;
}

}  // namespace effparse
