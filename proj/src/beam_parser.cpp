#include "effparse/beam_parser.hpp"

#include <cmath>
#include <limits>

namespace effparse {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }
}  // namespace

double beam_threshold(double beta, double p_tilde_log, std::size_t k) {
    if (!(beta > 0.0 && beta <= 1.0)) throw ModelDomainError("base beam factor must lie in (0, 1]");
    if (k == 0) throw NoThreshold();
    return 3.0 * std::log(static_cast<double>(k)) + std::log(beta) + p_tilde_log;
}

std::vector<DerivationStep> derivation_steps(const PartialAnalysis& a) {
    std::vector<DerivationStep> out;
    for (const DerivationStep* s = a.derivation.get(); s != nullptr; s = s->prev.get())
        out.push_back({s->rule, s->pos, nullptr});
    return {out.rbegin(), out.rend()};
}

void AnalysisHeap::push(PartialAnalysis a) { heap_.push({std::move(a), next_seq_++}); }

PartialAnalysis AnalysisHeap::pop() {
    PartialAnalysis a = std::move(const_cast<Entry&>(heap_.top()).analysis);
    heap_.pop();
    return a;
}

// ---------------------------------------------------------------------------

struct BeamParser::Lookahead {
    bool end = false;
    std::vector<double> logprob;  // per grammar symbol
};

BeamParser::BeamParser(const IncrementalModel& model, const LeftCornerTable& left_corner)
    : model_(&model), left_corner_(&left_corner) {
    if (left_corner.num_symbols() != model.grammar().symbols().size())
        throw ModelDomainError("left-corner table does not match the grammar");
}

BeamParser::Lookahead BeamParser::lookahead_for(const std::optional<Token>& token) const {
    Lookahead la;
    if (!token) {
        la.end = true;
        return la;
    }
    const Pcfg& g = model_->grammar();
    std::vector<double> p;
    if (token->tag) {
        p.assign(left_corner_->num_symbols(), 0.0);
        auto tag = g.symbols().find(*token->tag);
        if (tag && g.is_pos(*tag)) {
            const double emit = g.lexical_prob(*tag, token->word);
            for (SymbolId s = 0; s < p.size(); ++s)
                p[s] = std::min(1.0, left_corner_->reach(s, *tag) * (emit > 0.0 ? emit : 1.0));
        }
    } else {
        p = left_corner_->word_probs(g, token->word);
    }
    la.logprob.reserve(p.size());
    for (double v : p) la.logprob.push_back(safe_log(v));
    return la;
}

double BeamParser::lookahead_cached(const Lookahead& la, std::span<const StackEntry> stack,
                                    EventCounter& counter) const {
    notify_score(EventCategory::Lookahead);
    counter.record(EventCategory::Lookahead);
    if (la.end) return stack.empty() ? 0.0 : kNegInf;
    if (stack.empty()) return kNegInf;
    return la.logprob[stack.back().symbol];
}

double BeamParser::lookahead_logprob(std::span<const StackEntry> stack, const std::optional<Token>& token,
                                     EventCounter& counter) const {
    return lookahead_cached(lookahead_for(token), stack, counter);
}

WordBeam BeamParser::advance_word(AnalysisHeap& heap, const Sentence& sentence, std::size_t position,
                                  const BeamConfig& config, EventCounter& counter) const {
    if (position >= sentence.size()) throw ModelDomainError("advance_word: position past the sentence");
    return advance(heap, sentence, position, lookahead_for(sentence[position]), config, counter);
}

WordBeam BeamParser::advance(AnalysisHeap& heap, const Sentence& sentence, std::size_t position,
                             const Lookahead& la, const BeamConfig& config, EventCounter& counter) const {
    if (config.enough == 0) throw ModelDomainError("enough must be at least 1");
    const Pcfg& g = model_->grammar();
    const std::size_t n = sentence.size();
    const std::size_t remaining = n - position;
    const std::size_t max_steps = 20 + 4 * n;
    const Token& token = sentence[position];
    std::optional<SymbolId> fixed_tag;
    if (token.tag) fixed_tag = g.symbols().find(*token.tag).value_or(kNoSymbol);

    WordBeam beam;
    double threshold = kNegInf;
    auto update_threshold = [&] {
        threshold = beam_threshold(config.base_beam_factor, beam.best_success_logprob, beam.success_count);
    };

    while (!heap.empty() && beam.success_count < config.enough && beam.pops < config.max_pops) {
        if (beam.success_count >= 1 && heap.top().fom < threshold) break;
        PartialAnalysis a = heap.pop();
        ++beam.pops;
        const StackEntry top = a.stack.back();

        if (g.is_pos(top.symbol) && (!fixed_tag || *fixed_tag == top.symbol) &&
            a.stack.size() - 1 <= remaining - 1 && a.steps + 1 <= max_steps) {
            const double lp = model_->word_logprob(top.symbol, top.parent, token.word, counter);
            if (lp != kNegInf) {
                PartialAnalysis b;
                b.derivation = std::make_shared<const DerivationStep>(
                    DerivationStep{DerivationStep::kWord, top.symbol, a.derivation});
                b.stack.assign(a.stack.begin(), a.stack.end() - 1);
                b.consumed = a.consumed + 1;
                b.steps = a.steps + 1;
                b.last_pos = top.symbol;
                b.logprob = a.logprob + lp;
                b.fom = b.logprob;
                if (beam.success_count == 0 || b.logprob >= threshold) {
                    if (b.logprob > beam.best_success_logprob) beam.best_success_logprob = b.logprob;
                    ++beam.success_count;
                    beam.successes.push_back(std::move(b));
                    update_threshold();
                }
            }
        }

        if (g.is_nonterminal(top.symbol)) {
            const ExpansionContext ctx{top.symbol, top.parent, top.left_sibling, a.last_pos};
            for (std::size_t r : g.rules_for(top.symbol)) {
                const PcfgRule& rule = g.rules()[r];
                if (a.stack.size() - 1 + rule.rhs.size() > remaining || a.steps + 1 > max_steps) continue;
                const double lp = model_->expansion_logprob(r, ctx, counter);
                PartialAnalysis b;
                b.stack.reserve(a.stack.size() - 1 + rule.rhs.size());
                b.stack.assign(a.stack.begin(), a.stack.end() - 1);
                for (std::size_t i = rule.rhs.size(); i-- > 0;)
                    b.stack.push_back({rule.rhs[i], top.symbol, i == 0 ? kNoSymbol : rule.rhs[i - 1]});
                const double look = lookahead_cached(la, b.stack, counter);
                b.logprob = a.logprob + lp;
                b.fom = b.logprob + look;
                if (b.fom == kNegInf) continue;
                if (beam.success_count >= 1 && b.fom < threshold) continue;
                b.derivation = std::make_shared<const DerivationStep>(DerivationStep{r, 0, a.derivation});
                b.consumed = a.consumed;
                b.steps = a.steps + 1;
                b.last_pos = a.last_pos;
                heap.push(std::move(b));
            }
        }
    }
    if (beam.success_count == 0) throw WordFailure(position);
    return beam;
}

Tree BeamParser::analysis_tree(const PartialAnalysis& a, const Sentence& sentence) const {
    const Pcfg& g = model_->grammar();
    const auto steps = derivation_steps(a);
    std::size_t next = 0;
    std::size_t word = 0;
    auto build = [&](auto&& self) -> Tree {
        if (next >= steps.size()) throw ModelDomainError("analysis_tree: incomplete derivation");
        const DerivationStep& s = steps[next++];
        if (s.rule == DerivationStep::kWord) return Tree::leaf(g.symbols().name(s.pos), sentence.at(word++).word);
        const PcfgRule& rule = g.rules()[s.rule];
        std::vector<Tree> kids;
        for (std::size_t i = 0; i < rule.rhs.size(); ++i) kids.push_back(self(self));
        return Tree::node(g.symbols().name(rule.lhs), std::move(kids));
    };
    Tree root = build(build);
    if (root.children.size() != 1) throw ModelDomainError("analysis_tree: malformed root");
    return std::move(root.children.front());
}

BrResult BeamParser::parse(const Sentence& sentence, const BeamConfig& config, EventCounter& counter) const {
    if (sentence.empty()) throw ModelDomainError("br_parse: empty sentence");
    Stopwatch clock;
    const Pcfg& g = model_->grammar();
    BrResult result;

    AnalysisHeap heap;
    Lookahead la = lookahead_for(sentence[0]);
    PartialAnalysis init;
    init.stack.push_back({g.start(), g.start(), kNoSymbol});
    init.fom = lookahead_cached(la, init.stack, counter);
    if (init.fom != kNegInf) heap.push(std::move(init));

    std::vector<PartialAnalysis> finished;
    try {
        for (std::size_t i = 0; i < sentence.size(); ++i) {
            if (heap.empty()) throw WordFailure(i);
            WordBeam beam = advance(heap, sentence, i, la, config, counter);
            heap = AnalysisHeap{};
            const bool last = i + 1 == sentence.size();
            la = lookahead_for(last ? std::nullopt : std::optional<Token>(sentence[i + 1]));
            for (PartialAnalysis& s : beam.successes) {
                if (last) {
                    if (s.stack.empty()) finished.push_back(std::move(s));
                    continue;
                }
                s.fom = s.logprob + lookahead_cached(la, s.stack, counter);
                if (s.fom != kNegInf) heap.push(std::move(s));
            }
        }
        if (finished.empty()) throw WordFailure(sentence.size());
    } catch (const WordFailure& f) {
        result.failed = true;
        result.failed_at = f.position();
    }
    if (!result.failed) {
        const PartialAnalysis* best = &finished.front();
        for (const PartialAnalysis& a : finished)
            if (a.logprob > best->logprob) best = &a;
        result.logprob = best->logprob;
        result.tree = analysis_tree(*best, sentence);
    }
    result.seconds = clock.seconds();
    result.counter = counter;
    return result;
}

BrResult br_parse(const BeamParser& parser, const Sentence& sentence, const BeamConfig& config,
                  EventCounter& counter) {
    return parser.parse(sentence, config, counter);
}

}  // namespace effparse
