#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "effparse/beam_parser.hpp"
#include "effparse/errors.hpp"
#include "effparse/left_context_model.hpp"
#include "effparse/left_corner.hpp"
#include "support.hpp"

using namespace effparse;

namespace {

Sentence words(std::initializer_list<const char*> ws) {
    Sentence s;
    for (const char* w : ws) s.push_back({w, std::nullopt});
    return s;
}

BeamConfig exhaustive_config() {
    BeamConfig c;
    c.base_beam_factor = 1e-300;
    c.enough = 1'000'000;
    c.max_pops = 10'000'000;
    return c;
}

/// A -> B c (0.6) | p (0.4); B -> A c (0.5) | q (0.5); <ROOT> -> A.
/// Lexicon p: x, q: y, c: z.
Pcfg recursive_grammar() {
    return Pcfg::from_counts({{Rule{"<ROOT>", {"A"}}, 1},
                              {Rule{"A", {"B", "c"}}, 3},
                              {Rule{"A", {"p"}}, 2},
                              {Rule{"B", {"A", "c"}}, 1},
                              {Rule{"B", {"q"}}, 1}},
                             {{"p", "x", 1}, {"q", "y", 1}, {"c", "z", 1}});
}

PartialAnalysis initial_analysis(const BeamParser& parser, const Sentence& s, EventCounter& counter) {
    const Pcfg& g = parser.model().grammar();
    PartialAnalysis a;
    a.stack.push_back({g.start(), g.start(), kNoSymbol});
    a.fom = parser.lookahead_logprob(a.stack, s[0], counter);
    return a;
}

const char* kToyTreebank =
    "(S (NP (DT the) (NN dog)) (VP (VBD saw) (NP (DT a) (NN cat))))"
    "(S (NP (DT a) (NN cat)) (VP (VBD ran)))"
    "(S (NP (NN dog)) (VP (VBD saw) (NP (NN cat)) (PP (IN with) (NP (DT the) (NN dog)))))"
    "(S (NP (DT the) (NN cat)) (VP (VBD saw) (NP (NP (DT a) (NN dog)) (PP (IN with) (NP (NN cat))))))"
    "(S (NP (DT the) (NN dog)) (VP (VBD ran) (PP (IN with) (NP (DT a) (NN cat)))))"
    "(S (NP (NN cat)) (VP (VBD saw) (NP (DT the) (NN dog))))"
    "(S (NP (DT a) (NN dog)) (VP (VBD ran)))"
    "(S (NP (DT the) (NN cat)) (VP (VBD ran) (PP (IN with) (NP (NN dog)))))";

}  // namespace

TEST_CASE("beam threshold arithmetic") {
    const double p = std::log(0.0123);
    CHECK(std::abs(beam_threshold(1e-12, p, 100) - (std::log(1e-6) + p)) <= 1e-12 * std::abs(std::log(1e-6) + p));
    CHECK(std::abs(beam_threshold(1e-12, p, 1000) - (std::log(1e-3) + p)) <= 1e-12 * std::abs(std::log(1e-3) + p));
    CHECK(beam_threshold(1e-5, p, 1) == doctest::Approx(std::log(1e-5) + p));
    CHECK(beam_threshold(1.0, p, 1) == doctest::Approx(p));
    for (std::size_t k = 1; k < 50; ++k) {
        CHECK(beam_threshold(1e-9, p, k) <= beam_threshold(1e-9, p, k + 1));
        CHECK(beam_threshold(1e-9, p, k) <= beam_threshold(1e-8, p, k));
    }
    CHECK_THROWS_AS(beam_threshold(1e-6, p, 0), NoThreshold);
    CHECK_THROWS_AS(beam_threshold(0.0, p, 1), ModelDomainError);
    CHECK_THROWS_AS(beam_threshold(1.5, p, 1), ModelDomainError);
}

TEST_CASE("left-corner closure solves the 2x2 system") {
    // P_lc = [[0, .6], [.5, 0]] over (A, B); E = (I - P_lc)^-1 = [[1, .6], [.5, 1]] / .7
    const Pcfg g = recursive_grammar();
    const LeftCornerTable lc = LeftCornerTable::compute(g);
    const auto id = [&](const char* s) { return *g.symbols().find(s); };
    CHECK(lc.reach(id("A"), id("p")) == doctest::Approx(0.4 / 0.7).epsilon(1e-12));
    CHECK(lc.reach(id("A"), id("q")) == doctest::Approx(0.6 * 0.5 / 0.7).epsilon(1e-12));
    CHECK(lc.reach(id("B"), id("p")) == doctest::Approx(0.5 * 0.4 / 0.7).epsilon(1e-12));
    CHECK(lc.reach(id("B"), id("q")) == doctest::Approx(0.5 / 0.7).epsilon(1e-12));
    CHECK(lc.reach(id("<ROOT>"), id("p")) == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
    CHECK(lc.reach(id("p"), id("p")) == 1.0);
    CHECK(lc.reach(id("p"), id("q")) == 0.0);
    CHECK(lc.word_prob(g, id("A"), "y") == doctest::Approx(3.0 / 7.0).epsilon(1e-12));

    std::ostringstream out;
    lc.write(out);
    std::istringstream in(out.str());
    CHECK(LeftCornerTable::read(in) == lc);
}

TEST_CASE("left-corner cycles of mass one are rejected") {
    const Pcfg g = Pcfg::from_counts({{Rule{"<ROOT>", {"A"}}, 1}, {Rule{"A", {"A", "c"}}, 1}}, {{"c", "z", 1}});
    CHECK_THROWS_AS(LeftCornerTable::compute(g), LeftCornerError);
}

TEST_CASE("look-ahead probabilities") {
    const Pcfg g = recursive_grammar();
    const LeftCornerTable lc = LeftCornerTable::compute(g);
    const PcfgIncrementalModel model(g);
    const BeamParser parser(model, lc);
    const auto id = [&](const char* s) { return *g.symbols().find(s); };
    EventCounter c;
    const std::vector<StackEntry> pos_top{{id("c"), id("A"), kNoSymbol}};
    CHECK(parser.lookahead_logprob(pos_top, Token{"z", std::nullopt}, c) == 0.0);
    const std::vector<StackEntry> a_top{{id("A"), id("<ROOT>"), kNoSymbol}};
    CHECK(parser.lookahead_logprob(a_top, Token{"x", std::nullopt}, c) == doctest::Approx(std::log(4.0 / 7.0)));
    CHECK(parser.lookahead_logprob(a_top, Token{"y", std::nullopt}, c) == doctest::Approx(std::log(3.0 / 7.0)));
    CHECK(parser.lookahead_logprob({}, std::nullopt, c) == 0.0);
    CHECK(c.count(EventCategory::Lookahead) == 4);
    CHECK(c.total() == 4);

    // A -> a with probability 1.
    const Pcfg single = Pcfg::from_counts({{Rule{"<ROOT>", {"A"}}, 1}, {Rule{"A", {"a"}}, 1}}, {{"a", "w", 1}});
    const LeftCornerTable lc1 = LeftCornerTable::compute(single);
    const PcfgIncrementalModel m1(single);
    const BeamParser p1(m1, lc1);
    const std::vector<StackEntry> st{{*single.symbols().find("A"), single.start(), kNoSymbol}};
    CHECK(p1.lookahead_logprob(st, Token{"w", std::nullopt}, c) == doctest::Approx(0.0));
}

TEST_CASE("beam parse matches top-down enumeration") {
    std::mt19937_64 rng(424242);
    testsupport::ToyGrammarSpec spec;
    spec.max_nonterminals = 6;
    spec.max_rules = 14;
    spec.acyclic_unaries = true;
    int checked = 0;
    while (checked < 20) {
        const Pcfg g = testsupport::random_grammar(rng, spec).pcfg();
        std::optional<LeftCornerTable> lc;
        try {
            lc = LeftCornerTable::compute(g);
        } catch (const LeftCornerError&) {
            continue;
        }
        const auto s = testsupport::sample_sentence(rng, g, 6);
        if (!s) continue;
        ++checked;
        const double oracle = testsupport::topdown_enumeration_max(g, *s);
        REQUIRE(std::isfinite(oracle));
        const PcfgIncrementalModel model(g);
        const BeamParser parser(model, *lc);
        EventCounter c;
        const BrResult r = br_parse(parser, *s, exhaustive_config(), c);
        REQUIRE_FALSE(r.failed);
        CHECK(std::abs(r.logprob - oracle) <= 1e-9);
        CHECK(std::abs(g.tree_logprob(*r.tree) - oracle) <= 1e-9);
        CHECK(std::abs(model.score_tree(*r.tree) - oracle) <= 1e-9);
    }
}

TEST_CASE("deterministic grammar yields one success per word") {
    const Pcfg g = Pcfg::from_counts(
        {{Rule{"<ROOT>", {"S"}}, 1}, {Rule{"S", {"D", "N", "V"}}, 1}}, {{"D", "the", 1}, {"N", "dog", 1}, {"V", "ran", 1}});
    const LeftCornerTable lc = LeftCornerTable::compute(g);
    const PcfgIncrementalModel model(g);
    const BeamParser parser(model, lc);
    const Sentence s = words({"the", "dog", "ran"});
    EventCounter c;
    AnalysisHeap heap;
    heap.push(initial_analysis(parser, s, c));
    const WordBeam beam = parser.advance_word(heap, s, 0, BeamConfig{}, c);
    CHECK(beam.success_count == 1);
    CHECK(beam.successes.size() == 1);
    CHECK(beam.pops <= 4);

    EventCounter full;
    const BrResult r = br_parse(parser, s, BeamConfig{}, full);
    REQUIRE_FALSE(r.failed);
    CHECK(print_bracketed(*r.tree) == "(S (D the) (N dog) (V ran))");
    CHECK(r.logprob == doctest::Approx(0.0));
}

TEST_CASE("garden path fails under the narrowest beam") {
    // S -> X c (0.9) | Y d (0.1); X -> p; Y -> p. "x z2" needs the Y reading,
    // which ranks below the first success of word one.
    const Pcfg g = Pcfg::from_counts({{Rule{"<ROOT>", {"S"}}, 1},
                                      {Rule{"S", {"X", "c"}}, 9},
                                      {Rule{"S", {"Y", "d"}}, 1},
                                      {Rule{"X", {"p"}}, 1},
                                      {Rule{"Y", {"p"}}, 1}},
                                     {{"p", "x", 1}, {"c", "z1", 1}, {"d", "z2", 1}});
    const LeftCornerTable lc = LeftCornerTable::compute(g);
    const PcfgIncrementalModel model(g);
    const BeamParser parser(model, lc);
    BeamConfig narrow;
    narrow.base_beam_factor = 1.0;
    EventCounter c1;
    const BrResult r1 = br_parse(parser, words({"x", "z2"}), narrow, c1);
    CHECK(r1.failed);
    CHECK_FALSE(r1.tree.has_value());
    CHECK(r1.failed_at == 1);
    CHECK(c1.total() > 0);

    EventCounter c2;
    const BrResult r2 = br_parse(parser, words({"x", "z2"}), BeamConfig{}, c2);
    REQUIRE_FALSE(r2.failed);
    CHECK(r2.tree->children[0].label == "Y");
    CHECK(r2.logprob == doctest::Approx(std::log(0.1)));
}

TEST_CASE("wider beams consider at least as many events from identical heaps") {
    // Ambiguous grammar: NP attachment and noun/verb ambiguity.
    const Pcfg g = Pcfg::from_counts({{Rule{"<ROOT>", {"S"}}, 1},
                                      {Rule{"S", {"NP", "VP"}}, 4},
                                      {Rule{"S", {"VP"}}, 1},
                                      {Rule{"NP", {"N"}}, 3},
                                      {Rule{"NP", {"N", "N"}}, 2},
                                      {Rule{"NP", {"NP", "PP"}}, 1},
                                      {Rule{"VP", {"V", "NP"}}, 3},
                                      {Rule{"VP", {"V"}}, 1},
                                      {Rule{"VP", {"V", "NP", "PP"}}, 1},
                                      {Rule{"PP", {"P", "NP"}}, 1}},
                                     {{"N", "time", 2}, {"V", "time", 1}, {"N", "flies", 1}, {"V", "flies", 2},
                                      {"P", "like", 2}, {"V", "like", 1}, {"N", "arrow", 1}});
    const LeftCornerTable lc = LeftCornerTable::compute(g);
    const PcfgIncrementalModel model(g);
    const BeamParser parser(model, lc);
    const Sentence s = words({"time", "flies", "like", "arrow"});

    BeamConfig wide, narrow;
    wide.base_beam_factor = 1e-12;
    narrow.base_beam_factor = 1e-6;
    wide.enough = narrow.enough = 3;

    EventCounter scratch;
    std::vector<PartialAnalysis> input{initial_analysis(parser, s, scratch)};
    for (std::size_t i = 0; i < s.size(); ++i) {
        AnalysisHeap h1, h2;
        for (const PartialAnalysis& a : input) {
            h1.push(a);
            h2.push(a);
        }
        EventCounter cw, cn;
        const WordBeam bw = parser.advance_word(h1, s, i, wide, cw);
        const WordBeam bn = parser.advance_word(h2, s, i, narrow, cn);
        CHECK(cw.total() >= cn.total());
        CHECK(bw.success_count >= bn.success_count);
        CHECK(bw.success_count == bw.successes.size());
        double best = -std::numeric_limits<double>::infinity();
        for (const PartialAnalysis& a : bw.successes) {
            best = std::max(best, a.logprob);
            CHECK(a.fom <= a.logprob + 1e-12);
            CHECK(a.consumed == i + 1);
        }
        CHECK(bw.best_success_logprob == best);

        if (i + 1 == s.size()) break;
        input.clear();
        for (PartialAnalysis a : bw.successes) {
            a.fom = a.logprob + parser.lookahead_logprob(a.stack, s[i + 1], scratch);
            if (std::isfinite(a.fom)) input.push_back(std::move(a));
        }
        REQUIRE_FALSE(input.empty());
    }
}

TEST_CASE("advance_word without any success throws") {
    const Pcfg g = recursive_grammar();
    const LeftCornerTable lc = LeftCornerTable::compute(g);
    const PcfgIncrementalModel model(g);
    const BeamParser parser(model, lc);
    const Sentence s = words({"z"});
    EventCounter c;
    PartialAnalysis a;
    a.stack.push_back({g.start(), g.start(), kNoSymbol});
    AnalysisHeap heap;
    heap.push(a);
    CHECK_THROWS_AS(parser.advance_word(heap, s, 0, BeamConfig{}, c), WordFailure);

    EventCounter c2;
    const BrResult r = br_parse(parser, s, BeamConfig{}, c2);
    CHECK(r.failed);
    CHECK(r.failed_at == 0);
}

TEST_CASE("analysis heap orders by fom then insertion") {
    AnalysisHeap h;
    PartialAnalysis a;
    a.fom = -2.0;
    a.steps = 1;
    h.push(a);
    a.fom = -1.0;
    a.steps = 2;
    h.push(a);
    a.fom = -2.0;
    a.steps = 3;
    h.push(a);
    CHECK(h.pop().steps == 2);
    CHECK(h.pop().steps == 1);
    CHECK(h.pop().steps == 3);
    CHECK(h.empty());
}

TEST_CASE("left-context model scores parses the way it scores trees") {
    const auto trees = read_bracketed(kToyTreebank);
    const Pcfg g = Pcfg::train(trees, PcfgOptions{1});
    const LeftContextModel model = LeftContextModel::train(trees, trees, g);
    const LeftCornerTable lc = LeftCornerTable::compute(g);
    const BeamParser parser(model, lc);
    int parsed = 0;
    for (int rep = 0; rep < 3; ++rep)
        for (const Tree& t : trees) {
            Sentence s = sentence_from_tree(t);
            if (rep == 1) std::reverse(s.begin(), s.end());
            if (rep == 2) s.push_back({"cat", std::nullopt});
            EventCounter c;
            const BrResult r = br_parse(parser, s, BeamConfig{}, c);
            if (r.failed) continue;
            ++parsed;
            CHECK(std::abs(r.logprob - model.score_tree(*r.tree)) <= 1e-9);
            CHECK(sentence_words(sentence_from_tree(*r.tree)) == sentence_words(s));
        }
    CHECK(parsed >= 8);

    // The root choice conditions on sentinels only.
    const std::vector<EventId> root_ctx = model.expansion_context({g.start(), g.start(), kNoSymbol, kNoSymbol});
    const auto& ms = model.symbols();
    CHECK(root_ctx == std::vector<EventId>{ms.id(kRootSentinel), ms.id(kRootSentinel), ms.id(kNoSibling),
                                           ms.id(kSentenceStart)});
}

TEST_CASE("left-context model round trip") {
    const auto trees = read_bracketed(kToyTreebank);
    const Pcfg g = Pcfg::train(trees, PcfgOptions{1});
    const LeftContextModel model = LeftContextModel::train(trees, trees, g);
    std::ostringstream a;
    model.write(a);
    std::istringstream in(a.str());
    const LeftContextModel back = LeftContextModel::read(in, g);
    std::ostringstream b;
    back.write(b);
    CHECK(a.str() == b.str());
    for (const Tree& t : trees) CHECK(back.score_tree(t) == model.score_tree(t));
}

TEST_CASE("beam parsing is deterministic and fully counted") {
    const auto trees = read_bracketed(kToyTreebank);
    const Pcfg g = Pcfg::train(trees, PcfgOptions{1});
    const LeftContextModel model = LeftContextModel::train(trees, trees, g);
    const LeftCornerTable lc = LeftCornerTable::compute(g);
    const BeamParser parser(model, lc);
    for (const Tree& t : trees) {
        const Sentence s = sentence_from_tree(t);
        ShadowCounter shadow;
        EventCounter c1, c2;
        BrResult r1, r2;
        {
            ScopedScoreProbe scope(shadow);
            r1 = br_parse(parser, s, BeamConfig{}, c1);
        }
        r2 = br_parse(parser, s, BeamConfig{}, c2);
        CHECK(c1 == c2);
        CHECK(r1.tree == r2.tree);
        for (EventCategory cat : kAllEventCategories) CHECK(shadow.count(cat) == c1.count(cat));
        CHECK(c1.count(EventCategory::Lookahead) > 0);
        CHECK(c1.count(EventCategory::Expansion) > 0);
    }
}

TEST_CASE("pre-tagged tokens restrict word generation") {
    const Pcfg g = Pcfg::from_counts({{Rule{"<ROOT>", {"S"}}, 1},
                                      {Rule{"S", {"N", "V"}}, 1},
                                      {Rule{"S", {"V", "N"}}, 1}},
                                     {{"N", "a", 1}, {"V", "a", 1}, {"N", "b", 1}, {"V", "b", 1}});
    const LeftCornerTable lc = LeftCornerTable::compute(g);
    const PcfgIncrementalModel model(g);
    const BeamParser parser(model, lc);
    EventCounter c;
    const BrResult r = br_parse(parser, parse_sentence("a_V b_N"), BeamConfig{}, c);
    REQUIRE_FALSE(r.failed);
    CHECK(print_bracketed(*r.tree) == "(S (V a) (N b))");
}
