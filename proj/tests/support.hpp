#pragma once

// Random toy grammars and independent reference parsers shared by the unit
// tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "effparse/eval.hpp"
#include "effparse/interpolation.hpp"
#include "effparse/pcfg.hpp"
#include "effparse/sentence.hpp"
#include "effparse/treebank.hpp"

namespace testsupport {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct ToyGrammarSpec {
    std::size_t max_nonterminals = 10;
    std::size_t max_rules = 20;
    std::size_t num_pos = 4;
    std::size_t num_words = 6;
    std::size_t max_rhs = 3;
    /// Unary rules between nonterminals only point to a higher index.
    bool acyclic_unaries = false;
};

/// Rule and lexicon counts for a random grammar over N0..Nk, P0..Pm, w0..wn.
/// N0 is the only root label. Every nonterminal gets at least one rule.
struct ToyGrammar {
    std::vector<effparse::Pcfg::RuleCount> rules;
    std::vector<effparse::Pcfg::LexicalCount> lexicon;
    std::size_t num_nonterminals = 0;
    std::size_t num_pos = 0;

    effparse::Pcfg pcfg() const { return effparse::Pcfg::from_counts(rules, lexicon); }
};

inline std::string nt_name(std::size_t i) { return "N" + std::to_string(i); }
inline std::string pos_name(std::size_t i) { return "P" + std::to_string(i); }
inline std::string word_name(std::size_t i) { return "w" + std::to_string(i); }

inline ToyGrammar random_grammar(std::mt19937_64& rng, const ToyGrammarSpec& spec = {}) {
    auto pick = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };
    ToyGrammar g;
    g.num_nonterminals = pick(2, spec.max_nonterminals);
    g.num_pos = spec.num_pos;
    const std::size_t nrules = pick(g.num_nonterminals, std::max(g.num_nonterminals, spec.max_rules));
    auto random_symbol = [&](std::size_t lhs, bool unary) {
        // Keep right-hand sides biased towards POS tags so derivations end.
        if (pick(0, 2) == 0) return pos_name(pick(0, g.num_pos - 1));
        if (unary && spec.acyclic_unaries) {
            if (lhs + 1 >= g.num_nonterminals) return pos_name(pick(0, g.num_pos - 1));
            return nt_name(pick(lhs + 1, g.num_nonterminals - 1));
        }
        return nt_name(pick(0, g.num_nonterminals - 1));
    };
    std::map<std::pair<std::string, std::vector<std::string>>, std::uint64_t> seen;
    for (std::size_t r = 0; r < nrules; ++r) {
        const std::size_t lhs = r < g.num_nonterminals ? r : pick(0, g.num_nonterminals - 1);
        const std::size_t len = pick(1, spec.max_rhs);
        std::vector<std::string> rhs;
        for (std::size_t k = 0; k < len; ++k) rhs.push_back(random_symbol(lhs, len == 1));
        seen[{nt_name(lhs), rhs}] += pick(1, 5);
    }
    for (const auto& [rule, count] : seen) g.rules.push_back({effparse::Rule{rule.first, rule.second}, count});
    g.rules.push_back({effparse::Rule{std::string(effparse::kRootSentinel), {nt_name(0)}}, 1});
    for (std::size_t w = 0; w < spec.num_words; ++w) {
        const std::size_t ntags = pick(1, 2);
        const std::size_t first = pick(0, g.num_pos - 1);
        for (std::size_t t = 0; t < ntags; ++t)
            g.lexicon.push_back({pos_name((first + t) % g.num_pos), word_name(w), pick(1, 4)});
    }
    // Every POS emits something.
    for (std::size_t p = 0; p < g.num_pos; ++p) g.lexicon.push_back({pos_name(p), word_name(p % spec.num_words), 1});
    return g;
}

/// Samples a sentence by random top-down expansion from N0; nullopt if the
/// expansion grows past `max_words` or `max_depth`.
inline std::optional<effparse::Sentence> sample_sentence(std::mt19937_64& rng, const effparse::Pcfg& pcfg,
                                                          std::size_t max_words, std::size_t max_depth = 14) {
    using effparse::SymbolId;
    std::vector<std::string> words;
    bool ok = true;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto expand = [&](auto&& self, SymbolId sym, std::size_t depth) -> void {
        if (!ok) return;
        if (pcfg.is_pos(sym)) {
            std::vector<std::string> vocab = pcfg.vocabulary();
            std::vector<std::string> emits;
            for (const auto& w : vocab)
                if (pcfg.lexical_prob(sym, w) > 0.0) emits.push_back(w);
            words.push_back(emits[std::uniform_int_distribution<std::size_t>(0, emits.size() - 1)(rng)]);
            if (words.size() > max_words) ok = false;
            return;
        }
        const auto rules = pcfg.rules_for(sym);
        if (rules.empty() || depth > max_depth) {
            ok = false;
            return;
        }
        double u = unit(rng);
        std::size_t chosen = rules.back();
        for (std::size_t r : rules) {
            u -= pcfg.rules()[r].prob;
            if (u <= 0.0) {
                chosen = r;
                break;
            }
        }
        for (SymbolId child : pcfg.rules()[chosen].rhs) self(self, child, depth + 1);
    };
    expand(expand, pcfg.start(), 0);
    if (!ok || words.empty()) return std::nullopt;
    effparse::Sentence s;
    for (auto& w : words) s.push_back({w, std::nullopt});
    return s;
}

/// Exhaustive Viterbi over all spans, applying n-ary rules directly (no
/// binarization) and closing unary chains by relaxation. Returns the log
/// probability of the best tree rooted in the start symbol, or -inf.
inline double cky_viterbi(const effparse::Pcfg& pcfg, const effparse::Sentence& sentence) {
    const std::size_t n = sentence.size();
    const std::size_t nsym = pcfg.symbols().size();
    std::vector<double> best((n + 1) * (n + 1) * nsym, kNegInf);
    auto at = [&](std::size_t i, std::size_t j, std::size_t s) -> double& { return best[(i * (n + 1) + j) * nsym + s]; };

    for (std::size_t len = 1; len <= n; ++len) {
        for (std::size_t i = 0; i + len <= n; ++i) {
            const std::size_t j = i + len;
            if (len == 1)
                for (effparse::SymbolId p : pcfg.pos_tags()) {
                    const double q = pcfg.lexical_prob(p, sentence[i].word);
                    if (q > 0.0) at(i, j, p) = std::log(q);
                }
            bool changed = true;
            for (std::size_t round = 0; changed && round <= nsym + 1; ++round) {
                changed = false;
                for (const effparse::PcfgRule& r : pcfg.rules()) {
                    const std::size_t m = r.rhs.size();
                    if (m > len) continue;
                    // reach[k][p]: best log prob of rhs[0..k) covering i..p
                    std::vector<std::vector<double>> reach(m + 1, std::vector<double>(n + 1, kNegInf));
                    reach[0][i] = 0.0;
                    for (std::size_t k = 0; k < m; ++k)
                        for (std::size_t p = i; p <= j; ++p) {
                            if (reach[k][p] == kNegInf) continue;
                            for (std::size_t q = p + 1; q <= j; ++q) {
                                const double v = at(p, q, r.rhs[k]);
                                if (v == kNegInf) continue;
                                reach[k + 1][q] = std::max(reach[k + 1][q], reach[k][p] + v);
                            }
                        }
                    const double v = reach[m][j] + r.logprob;
                    if (v > at(i, j, r.lhs) + 1e-12) {
                        at(i, j, r.lhs) = v;
                        changed = true;
                    }
                }
            }
        }
    }
    return at(0, n, pcfg.start());
}

/// Maximum log probability over every leftmost top-down derivation of the
/// sentence, by depth-first enumeration. The stack never holds more symbols
/// than words remain, which bounds the search for grammars without unary
/// cycles.
inline double topdown_enumeration_max(const effparse::Pcfg& pcfg, const effparse::Sentence& sentence) {
    using effparse::SymbolId;
    const std::size_t n = sentence.size();
    double best = kNegInf;
    std::vector<SymbolId> stack{pcfg.start()};
    auto dfs = [&](auto&& self, std::size_t pos, double lp) -> void {
        if (stack.empty()) {
            if (pos == n) best = std::max(best, lp);
            return;
        }
        if (stack.size() > n - pos) return;
        const SymbolId top = stack.back();
        stack.pop_back();
        if (pcfg.is_pos(top)) {
            const double q = pcfg.lexical_prob(top, sentence[pos].word);
            if (q > 0.0) self(self, pos + 1, lp + std::log(q));
        } else {
            for (std::size_t r : pcfg.rules_for(top)) {
                const auto& rhs = pcfg.rules()[r].rhs;
                for (auto it = rhs.rbegin(); it != rhs.rend(); ++it) stack.push_back(*it);
                self(self, pos, lp + pcfg.rules()[r].logprob);
                stack.resize(stack.size() - rhs.size());
            }
        }
        stack.push_back(top);
    };
    dfs(dfs, 0, 0.0);
    return best;
}

// Six outcomes (0..5), contexts over symbols 10..13, order 2.
inline std::vector<effparse::EventTuple> six_event_corpus() {
    std::vector<effparse::EventTuple> t;
    const int data[][3] = {{0, 10, 12}, {1, 10, 12}, {0, 10, 12}, {2, 10, 13}, {3, 11, 12}, {4, 11, 12},
                           {5, 11, 13}, {0, 11, 13}, {1, 10, 13}, {2, 10, 12}, {3, 10, 12}, {0, 11, 12},
                           {4, 10, 13}, {5, 10, 12}, {1, 11, 13}, {0, 10, 12}, {2, 11, 12}};
    for (const auto& d : data) t.push_back({static_cast<effparse::EventId>(d[0]), {static_cast<effparse::EventId>(d[1]), static_cast<effparse::EventId>(d[2])}});
    return t;
}

inline std::vector<effparse::EventTuple> six_event_heldout() {
    std::vector<effparse::EventTuple> t;
    const int data[][3] = {{0, 10, 12}, {1, 10, 13}, {3, 11, 12}, {2, 10, 12}, {0, 11, 13}, {5, 11, 12},
                           {4, 10, 12}, {0, 10, 13}, {1, 11, 12}, {2, 11, 13}};
    for (const auto& d : data) t.push_back({static_cast<effparse::EventId>(d[0]), {static_cast<effparse::EventId>(d[1]), static_cast<effparse::EventId>(d[2])}});
    return t;
}

/// Relative frequency of `outcome` after the first k context symbols,
/// counted straight from the tuples.
inline double hand_phat(const std::vector<effparse::EventTuple>& corpus, std::size_t k, effparse::EventId outcome,
                 const std::vector<effparse::EventId>& ctx) {
    double joint = 0, total = 0;
    for (const effparse::EventTuple& t : corpus) {
        if (!std::equal(ctx.begin(), ctx.begin() + static_cast<long>(k), t.context.begin())) continue;
        ++total;
        if (t.outcome == outcome) ++joint;
    }
    return total == 0 ? 0.0 : joint / total;
}

inline double hand_base(const std::vector<effparse::EventTuple>& corpus, effparse::EventId outcome, const effparse::InterpolationOptions& o) {
    std::map<effparse::EventId, double> counts;
    for (const effparse::EventTuple& t : corpus) counts[t.outcome] += 1;
    if (!counts.count(outcome)) return o.unknown_mass;
    const double n = static_cast<double>(corpus.size());
    return (1 - o.unknown_mass) * (o.unigram_weight * counts[outcome] / n + (1 - o.unigram_weight) / counts.size());
}

struct GoldenPair {
    effparse::Tree gold;
    std::optional<effparse::Tree> test;
    std::size_t matched = 0, proposed = 0, gold_count = 0;
    double precision = 0.0, recall = 0.0;
    bool failed = false;
};

/// Records of three non-comment lines: gold tree, test tree or (FAIL),
/// expected "matched proposed gold precision recall failed".
inline std::vector<GoldenPair> load_golden(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        if (!line.empty() && line[0] != '#') lines.push_back(line);
    if (lines.size() % 3 != 0) throw std::runtime_error("golden file: incomplete record");
    std::vector<GoldenPair> out;
    for (std::size_t i = 0; i < lines.size(); i += 3) {
        GoldenPair p;
        p.gold = effparse::read_one_bracketed(lines[i]);
        if (lines[i + 1] != "(FAIL)") p.test = effparse::read_one_bracketed(lines[i + 1]);
        std::istringstream expect(lines[i + 2]);
        int failed = 0;
        expect >> p.matched >> p.proposed >> p.gold_count >> p.precision >> p.recall >> failed;
        if (!expect) throw std::runtime_error("golden file: bad expectation line: " + lines[i + 2]);
        p.failed = failed != 0;
        out.push_back(std::move(p));
    }
    return out;
}

/// Exact agreement of counts and flags; percentages to 1e-12.
inline bool golden_matches(const effparse::EvalResult& r, const GoldenPair& p) {
    return r.matched == p.matched && r.proposed == p.proposed && r.gold == p.gold_count && r.failed == p.failed &&
           std::abs(r.precision - p.precision) <= 1e-12 && std::abs(r.recall - p.recall) <= 1e-12 &&
           std::abs(r.average - (p.precision + p.recall) / 2) <= 1e-12;
}

}  // namespace testsupport
