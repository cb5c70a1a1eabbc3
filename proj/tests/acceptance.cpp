// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Trains on the bundled mini-treebank in a scratch
// directory and runs two full sweeps.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "effparse/errors.hpp"
#include "effparse/harness.hpp"
#include "support.hpp"

using namespace effparse;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

struct Fixture {
    fs::path root;
    RunConfig config;
    std::unique_ptr<ModelBundle> models;
    std::vector<Tree> corpus;
    std::vector<SweepRow> sweep1, sweep2;
    fs::path out1, out2;
};

// 1
Verdict beam_threshold_exactness() {
    double worst = 0.0;
    for (double p : {0.0, -1.0, -17.25, -123.456, -1e4}) {
        for (auto [k, factor] : {std::pair<std::size_t, double>{100, 1e-6}, {1000, 1e-3}}) {
            const double want = std::log(factor) + p;
            const double got = beam_threshold(1e-12, p, k);
            worst = std::max(worst, std::abs(got - want) / std::abs(want));
        }
    }
    return {worst <= 1e-12, "max relative log error " + fmt("%.3g", worst) + " (tol 1e-12)"};
}

// 2
Verdict chart_vs_cky() {
    std::mt19937_64 rng(20240601);
    const BoundaryModel neutral = BoundaryModel::neutral();
    std::size_t grammars = 0, sentences = 0, mismatches = 0;
    double worst = 0.0;
    while (grammars < 100) {
        const Pcfg g = testsupport::random_grammar(rng).pcfg();
        std::vector<Sentence> batch;
        for (int tries = 0; tries < 500 && batch.size() < 10; ++tries)
            if (auto s = testsupport::sample_sentence(rng, g, 8)) batch.push_back(*s);
        if (batch.size() < 10) continue;
        ++grammars;
        const ChartParser parser(g, neutral);
        for (const Sentence& s : batch) {
            ++sentences;
            const double oracle = testsupport::cky_viterbi(g, s);
            EventCounter c;
            const PackedChart chart = parser.best_first_parse(s, 1e12, c);
            const auto cands = parser.extract_candidates(chart, 1.0, 1);
            const double err = cands.empty() ? INFINITY : std::abs(cands[0].pcfg_logprob - oracle);
            worst = std::max(worst, err);
            if (!(err <= 1e-9)) ++mismatches;
        }
    }
    return {mismatches == 0, std::to_string(grammars) + " grammars, " + std::to_string(sentences) +
                                 " sentences, max |dlogp| " + fmt("%.3g", worst) + " (tol 1e-9)"};
}

// 3
Verdict beam_vs_enumeration() {
    std::mt19937_64 rng(424242);
    testsupport::ToyGrammarSpec spec;
    spec.max_nonterminals = 6;
    spec.max_rules = 14;
    spec.acyclic_unaries = true;
    BeamConfig exhaustive;
    exhaustive.base_beam_factor = 1e-300;
    exhaustive.enough = 1'000'000;
    exhaustive.max_pops = 10'000'000;
    std::size_t checked = 0, mismatches = 0;
    double worst = 0.0;
    while (checked < 50) {
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
        const PcfgIncrementalModel model(g);
        const BeamParser parser(model, *lc);
        EventCounter c;
        const BrResult r = br_parse(parser, *s, exhaustive, c);
        const double err = r.failed ? INFINITY : std::abs(r.logprob - oracle);
        worst = std::max(worst, err);
        if (!(err <= 1e-9)) ++mismatches;
    }
    return {mismatches == 0,
            std::to_string(checked) + " sentences, max |dlogp| " + fmt("%.3g", worst) + " (tol 1e-9)"};
}

// 4
Verdict normalization(const Fixture& fx) {
    const Pcfg& g = fx.models->pcfg;
    double worst_rule = 0.0;
    std::map<SymbolId, double> sums;
    for (const PcfgRule& r : g.rules()) sums[r.lhs] += r.prob;
    for (const auto& [lhs, s] : sums) worst_rule = std::max(worst_rule, std::abs(s - 1.0));
    const auto vocab = g.vocabulary();
    for (SymbolId p : g.pos_tags()) {
        double s = g.unknown_mass(p);
        for (const auto& w : vocab) s += g.lexical_prob(p, w);
        worst_rule = std::max(worst_rule, std::abs(s - 1.0));
    }

    const std::vector<const InterpolatedModel*> interp{
        &fx.models->full.head_pos_model(), &fx.models->full.head_word_model(),
        &fx.models->full.expansion_model(), &fx.models->left_context->expansion_model(),
        &fx.models->left_context->word_model()};
    // The closed space is every training outcome plus one pooled outcome for
    // everything unseen, which takes the base distribution's reserved mass.
    std::mt19937_64 rng(17);
    double worst_interp = 0.0, worst_seen = 0.0;
    for (int q = 0; q < 1000; ++q) {
        const InterpolatedModel& m = *interp[static_cast<std::size_t>(q) % interp.size()];
        const EventId top = *std::max_element(m.event_space().begin(), m.event_space().end());
        std::uniform_int_distribution<EventId> sym(0, top + 2);
        std::vector<EventId> ctx(m.order());
        for (EventId& c : ctx) c = sym(rng);
        double seen = 0.0;
        for (EventId e : m.event_space()) seen += m.prob_uncounted(e, ctx);
        const double s = seen + m.prob_uncounted(top + 1, ctx);
        worst_interp = std::max(worst_interp, std::abs(s - 1.0));
        worst_seen = std::max(worst_seen, 1.0 - seen);
    }
    return {worst_rule <= 1e-9 && worst_interp <= 1e-6,
            std::to_string(sums.size()) + " LHS + " + std::to_string(g.pos_tags().size()) +
                " POS distributions, max |sum-1| " + fmt("%.3g", worst_rule) + " (tol 1e-9); 1000 contexts, max |sum-1| " +
                fmt("%.3g", worst_interp) + " (tol 1e-6), mass outside training outcomes at most " +
                fmt("%.3g", worst_seen)};
}

// 5
Verdict interpolation_oracle() {
    const auto corpus = testsupport::six_event_corpus();
    const InterpolatedModel m = InterpolatedModel::train(corpus, testsupport::six_event_heldout(), 2);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<EventId> outcome(0, 6), sym(10, 14);
    double worst = 0.0;
    for (int q = 0; q < 1000; ++q) {
        const EventId e = outcome(rng);
        const std::vector<EventId> ctx{sym(rng), sym(rng)};
        double expected = 0.0;
        for (std::size_t k = 0; k <= 2; ++k) {
            double w = k == 0 ? 1.0 : m.lambda_value(k, ctx);
            for (std::size_t j = k + 1; j <= 2; ++j) w *= 1.0 - m.lambda_value(j, ctx);
            const double phat = k == 0 ? testsupport::hand_base(corpus, e, m.options())
                                       : testsupport::hand_phat(corpus, k, e, ctx);
            expected += w * phat;
        }
        EventCounter c;
        worst = std::max(worst, std::abs(m.prob(e, ctx, c, EventCategory::Other) - expected));
    }
    return {worst <= 1e-12, "1000 queries, max |dp| " + fmt("%.3g", worst) + " (tol 1e-12)"};
}

std::vector<std::pair<ParserKind, double>> settings(const RunConfig& c) {
    std::vector<std::pair<ParserKind, double>> out;
    for (double f : c.ec_factors) out.emplace_back(ParserKind::EC, f);
    for (double b : c.br_betas) out.emplace_back(ParserKind::BR, b);
    return out;
}

std::map<std::string, std::vector<const SweepRow*>> by_parser(const std::vector<SweepRow>& rows) {
    std::map<std::string, std::vector<const SweepRow*>> out;
    for (const SweepRow& r : rows) out[r.parser].push_back(&r);
    return out;
}

// 6
Verdict counting_completeness(const Fixture& fx) {
    std::uint64_t discrepancy = 0, events = 0, parses = 0;
    for (const auto& [kind, param] : settings(fx.config)) {
        for (const Tree& t : fx.corpus) {
            const Sentence s = sentence_from_tree(t);
            ShadowCounter shadow;
            ParseOutcome o;
            {
                ScopedScoreProbe scope(shadow);
                o = parse_sentence_with(*fx.models, kind, param, s, fx.config);
            }
            for (EventCategory cat : kAllEventCategories) {
                const std::uint64_t a = shadow.count(cat), b = o.counter.count(cat);
                discrepancy += a > b ? a - b : b - a;
            }
            events += o.counter.total();
            ++parses;
        }
    }
    return {discrepancy == 0, std::to_string(parses) + " parses, " + std::to_string(events) +
                                  " events, discrepancy " + std::to_string(discrepancy) + " (tol 0)"};
}

// 7
Verdict ec_monotone(const Fixture& fx) {
    const ChartParser& parser = *fx.models->chart_parser;
    std::size_t decreasing = 0, not_superset = 0, full_decreasing = 0;
    const EcConfig ec = [&] {
        EcConfig c;
        c.max_candidates = fx.config.max_candidates;
        c.threshold_ratio = fx.config.threshold_ratio;
        return c;
    }();
    for (const Tree& t : fx.corpus) {
        const Sentence s = sentence_from_tree(t);
        std::uint64_t prev = 0;
        std::set<std::tuple<std::string, std::size_t, std::size_t>> prev_keys;
        for (double factor : {1.0, 2.0, 4.0}) {
            EventCounter c;
            std::set<std::tuple<std::string, std::size_t, std::size_t>> keys;
            try {
                keys = parser.best_first_parse(s, factor, c).chart_keys();
            } catch (const NoParseError& e) {
                keys = e.chart()->chart_keys();
            }
            if (c.total() < prev) ++decreasing;
            if (factor == 4.0 && !std::includes(keys.begin(), keys.end(), prev_keys.begin(), prev_keys.end()))
                ++not_superset;
            prev = c.total();
            prev_keys = std::move(keys);
        }
        std::uint64_t full_prev = 0;
        for (double factor : {1.0, 2.0, 4.0}) {
            EcConfig cfg = ec;
            cfg.overparse_factor = factor;
            EventCounter c;
            try {
                ec_parse(parser, fx.models->full, s, cfg, c);
            } catch (const NoParseError&) {
            }
            if (c.total() < full_prev) ++full_decreasing;
            full_prev = c.total();
        }
    }
    // Sweep rows average the whole pipeline over the test split.
    std::vector<const SweepRow*> rows = by_parser(fx.sweep1)["EC"];
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SweepRow* a, const SweepRow* b) { return a->parameter < b->parameter; });
    std::size_t row_drops = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i]->events_per_sentence < rows[i - 1]->events_per_sentence) ++row_drops;
    return {decreasing == 0 && not_superset == 0 && row_drops == 0 && !rows.empty(),
            std::to_string(fx.corpus.size()) + " sentences; chart events decreasing: " + std::to_string(decreasing) +
                ", factor-4 chart missing factor-2 edges: " + std::to_string(not_superset) +
                ", sweep rows decreasing: " + std::to_string(row_drops) +
                " (tol 0); sentences whose total with rescoring decreases: " + std::to_string(full_decreasing)};
}

// 8
Verdict time_correlation(const Fixture& fx) {
    bool ok = true;
    std::string detail;
    for (const auto& [parser, rows] : by_parser(fx.sweep1)) {
        std::vector<std::pair<double, double>> points;
        for (const SweepRow* r : rows) points.emplace_back(r->events_per_sentence, r->seconds_per_sentence);
        double r2 = NAN;
        try {
            r2 = linear_fit(points).r_squared;
        } catch (const DegenerateFitError&) {
        }
        ok = ok && r2 >= 0.9;
        detail += parser + " R^2 " + fmt("%.4f", r2) + "; ";
    }
    return {ok, detail + "(min 0.9)"};
}

// 9
Verdict convergence(const Fixture& fx) {
    bool ok = true;
    std::string detail;
    for (const auto& [parser, rows] : by_parser(fx.sweep1)) {
        std::vector<const SweepRow*> sorted = rows;
        std::stable_sort(sorted.begin(), sorted.end(), [](const SweepRow* a, const SweepRow* b) {
            return a->events_per_sentence < b->events_per_sentence;
        });
        double worst_drop = 0.0;
        for (std::size_t i = 1; i < sorted.size(); ++i)
            worst_drop = std::max(worst_drop, sorted[i - 1]->avg_pr - sorted[i]->avg_pr);
        ok = ok && worst_drop <= 0.5;
        detail += parser + " largest drop " + fmt("%.3f", worst_drop) + "; ";
    }

    // Widest setting: largest overparse factor, smallest beam factor.
    const auto fig4 = lines_of(slurp(fx.out1 / "fig4_convergence.csv"));
    std::map<std::string, std::pair<double, double>> widest;  // parser -> (parameter, pct)
    for (std::size_t i = 1; i < fig4.size(); ++i) {
        const auto f = split_csv(fig4[i]);
        const double param = std::stod(f[1]), pct = std::stod(f[3]);
        auto it = widest.find(f[0]);
        const bool wider = it == widest.end() || (f[0] == "BR" ? param < it->second.first : param > it->second.first);
        if (wider) widest[f[0]] = {param, pct};
    }
    for (const auto& [parser, wp] : widest) {
        ok = ok && std::abs(wp.second - 100.0) <= 1e-9;
        detail += parser + " widest " + format_parameter(wp.first) + " at " + fmt("%.4f", wp.second) + "%; ";
    }
    ok = ok && widest.size() == by_parser(fx.sweep1).size();
    return {ok, detail + "(drop tol 0.5, widest must be 100%)"};
}

// 10
Verdict failure_trend(const Fixture& fx) {
    auto groups = by_parser(fx.sweep1);
    std::vector<const SweepRow*> br = groups["BR"];
    if (br.empty()) return {false, "no BR rows"};
    std::stable_sort(br.begin(), br.end(),
                     [](const SweepRow* a, const SweepRow* b) { return a->parameter > b->parameter; });
    bool ok = true;
    std::string detail = "pct_failed by decreasing beta:";
    for (std::size_t i = 0; i < br.size(); ++i) {
        if (i > 0 && br[i]->pct_failed > br[i - 1]->pct_failed) ok = false;
        detail += " " + format_parameter(br[i]->parameter) + "=" + fmt("%.2f", br[i]->pct_failed);
    }
    return {ok, detail};
}

// 11
Verdict parseval_golden() {
    const auto pairs = testsupport::load_golden(std::string(EFFPARSE_TEST_DATA_DIR) + "/parseval_golden.txt");
    std::vector<EvalResult> results;
    std::size_t mismatches = 0;
    for (const auto& p : pairs) {
        const EvalResult r = parseval(p.gold, p.test);
        if (!testsupport::golden_matches(r, p)) ++mismatches;
        results.push_back(r);
    }
    const CorpusEval ce = aggregate(results);
    const bool agg = ce.matched == 27 && ce.proposed == 33 && ce.gold == 38 && ce.pct_failed == 10.0;
    return {pairs.size() == 10 && mismatches == 0 && agg,
            std::to_string(pairs.size()) + " pairs, " + std::to_string(mismatches) + " mismatches, aggregate " +
                std::to_string(ce.matched) + "/" + std::to_string(ce.proposed) + "/" + std::to_string(ce.gold)};
}

// Columns holding wall-clock measurements or quantities derived from them.
// `compared` columns are checked within tolerance; the rest are only masked.
struct TimingColumns {
    std::set<std::string> compared;
    std::set<std::string> masked;
};

// 12
Verdict determinism(const Fixture& fx) {
    const std::map<std::string, TimingColumns> timing{
        {"sweep.csv", {{"seconds_per_sentence"}, {}}},
        {"fig1_events_per_second.csv", {{"events_per_second"}, {}}},
        {"fig2_time_vs_events.csv", {{"seconds_per_sentence"}, {"slope", "intercept", "r_squared"}}},
        {"fig3_error_vs_events.csv", {}},
        {"fig4_convergence.csv", {}},
    };
    std::vector<std::string> files;
    for (const auto& [name, cols] : timing) files.push_back(name);
    for (const auto& entry : fs::directory_iterator(fx.out1))
        if (entry.path().extension() == ".mrg") files.push_back(entry.path().filename().string());
    std::sort(files.begin(), files.end());

    std::size_t differing = 0, timed = 0;
    double worst = 0.0;
    std::string where;
    for (const std::string& name : files) {
        const std::string a = slurp(fx.out1 / name), b = slurp(fx.out2 / name);
        const auto it = timing.find(name);
        if (it == timing.end()) {
            if (a != b || a.empty()) ++differing, where += " " + name;
            continue;
        }
        const auto la = lines_of(a), lb = lines_of(b);
        if (la.size() != lb.size() || la.empty()) {
            ++differing, where += " " + name;
            continue;
        }
        const auto header = split_csv(la[0]);
        bool same = la[0] == lb[0];
        for (std::size_t i = 1; i < la.size() && same; ++i) {
            auto fa = split_csv(la[i]), fb = split_csv(lb[i]);
            if (fa.size() != header.size() || fb.size() != header.size()) {
                same = false;
                break;
            }
            for (std::size_t j = 0; j < header.size(); ++j) {
                const bool cmp = it->second.compared.count(header[j]) != 0;
                const bool mask = it->second.masked.count(header[j]) != 0;
                if (!(cmp || mask) || fa[j].empty() || fb[j].empty()) continue;
                if (cmp) {
                    const double x = std::stod(fa[j]), y = std::stod(fb[j]);
                    const double rel = std::abs(y - x) / std::abs(x);
                    ++timed;
                    if (rel > worst) worst = rel;
                }
                fa[j] = fb[j] = "*";
            }
            same = fa == fb;
        }
        if (!same) ++differing, where += " " + name;
    }
    return {differing == 0 && worst <= 0.2,
            std::to_string(files.size()) + " files, " + std::to_string(differing) + " differ outside timing" + where +
                "; " + std::to_string(timed) + " timing values, max relative difference " + fmt("%.3f", worst) +
                " (tol 0.2)"};
}

}  // namespace

int main() {
    Fixture fx;
    fx.root = fs::temp_directory_path() / ("effparse_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(fx.root);
    fs::create_directories(fx.root);
    fx.config.corpus = (fs::path(EFFPARSE_SOURCE_DIR) / "data" / "minitreebank.mrg").string();
    fx.config.model_dir = (fx.root / "model").string();

    int failures = 0;
    const auto report = [&](int id, const char* name, const std::function<Verdict()>& run) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!v.pass) ++failures;
        std::printf("%s criterion %2d  %-28s %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(),
                    secs);
        std::fflush(stdout);
    };

    try {
        cmd_train(fx.config);
        fx.models = load_models(fx.config.model_dir);
        fx.corpus = load_treebank(fx.config.corpus).trees;
        fx.out1 = fx.root / "sweep1";
        fx.out2 = fx.root / "sweep2";
        RunConfig c = fx.config;
        c.output_dir = fx.out1.string();
        fx.sweep1 = cmd_sweep(c);
        c.output_dir = fx.out2.string();
        fx.sweep2 = cmd_sweep(c);
    } catch (const std::exception& e) {
        std::printf("FAIL setup: %s\n", e.what());
        fs::remove_all(fx.root);
        return 1;
    }

    report(1, "beam threshold exactness", beam_threshold_exactness);
    report(2, "chart parse vs CKY oracle", chart_vs_cky);
    report(3, "beam parse vs enumeration", beam_vs_enumeration);
    report(4, "normalization", [&] { return normalization(fx); });
    report(5, "interpolation oracle", interpolation_oracle);
    report(6, "counting completeness", [&] { return counting_completeness(fx); });
    report(7, "EC monotone continuation", [&] { return ec_monotone(fx); });
    report(8, "time correlation", [&] { return time_correlation(fx); });
    report(9, "convergence shape", [&] { return convergence(fx); });
    report(10, "BR failure trend", [&] { return failure_trend(fx); });
    report(11, "PARSEVAL golden file", parseval_golden);
    report(12, "sweep determinism", [&] { return determinism(fx); });

    std::printf("%d of 12 criteria failed\n", failures);
    fs::remove_all(fx.root);
    return failures == 0 ? 0 : 1;
}
