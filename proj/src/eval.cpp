#include "effparse/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>

#include "effparse/errors.hpp"

namespace effparse {

namespace {

std::size_t collect(const Tree& t, std::size_t start, std::vector<LabeledSpan>& out) {
    if (t.is_preterminal()) return start + 1;
    std::size_t end = start;
    for (const Tree& c : t.children) end = collect(c, end, out);
    out.emplace_back(t.label, start, end);
    return end;
}

double pct(std::size_t num, std::size_t den) { return den == 0 ? 0.0 : 100.0 * num / den; }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<LabeledSpan> labeled_constituents(const Tree& tree) {
    std::vector<LabeledSpan> out;
    collect(tree, 0, out);
    std::sort(out.begin(), out.end());
    return out;
}

EvalResult parseval(const Tree& gold, const std::optional<Tree>& test) {
    EvalResult r;
    const auto g = labeled_constituents(gold);
    r.gold = g.size();
    if (!test) {
        r.failed = true;
    } else {
        if (gold.num_words() != test->num_words())
            throw EvalDomainError("gold and test trees have different lengths", 0);
        const auto t = labeled_constituents(*test);
        r.proposed = t.size();
        std::vector<LabeledSpan> common;
        std::set_intersection(g.begin(), g.end(), t.begin(), t.end(), std::back_inserter(common));
        r.matched = common.size();
    }
    r.precision = r.proposed == 0 ? 0.0 : pct(r.matched, r.proposed);
    r.recall = pct(r.matched, r.gold);
    r.average = (r.precision + r.recall) / 2.0;
    return r;
}

CorpusEval aggregate(const std::vector<EvalResult>& results, const EvalOptions& options) {
    CorpusEval c;
    c.sentences = results;
    if (results.empty()) return c;
    double p_sum = 0.0, r_sum = 0.0;
    std::size_t macro_n = 0;
    for (const EvalResult& r : results) {
        if (r.failed) ++c.failures;
        if (r.failed && !options.failures_in_recall) continue;
        c.matched += r.matched;
        c.proposed += r.proposed;
        c.gold += r.gold;
        p_sum += r.precision;
        r_sum += r.recall;
        ++macro_n;
    }
    if (options.averaging == Averaging::Micro) {
        c.precision = pct(c.matched, c.proposed);
        c.recall = pct(c.matched, c.gold);
    } else if (macro_n > 0) {
        c.precision = p_sum / static_cast<double>(macro_n);
        c.recall = r_sum / static_cast<double>(macro_n);
    }
    c.average = (c.precision + c.recall) / 2.0;
    c.pct_failed = pct(c.failures, results.size());
    return c;
}

CorpusEval evaluate_files(std::istream& gold, std::istream& test, const EvalOptions& options) {
    std::vector<EvalResult> results;
    std::string gline, tline;
    std::size_t line = 0;
    while (std::getline(gold, gline)) {
        ++line;
        gline = trim(gline);
        if (!std::getline(test, tline)) throw EvalDomainError("test file has no line for gold sentence", line);
        tline = trim(tline);
        if (gline.empty()) {
            if (!tline.empty()) throw EvalDomainError("test line present where gold line is empty", line);
            continue;
        }
        Tree g;
        try {
            g = read_one_bracketed(gline);
        } catch (const ParseFormatError& e) {
            throw EvalDomainError(std::string("bad gold tree: ") + e.what(), line);
        }
        if (g.num_words() > options.max_length) continue;
        std::optional<Tree> t;
        if (!tline.empty() && tline != "(FAIL)") {
            try {
                t = read_one_bracketed(tline);
            } catch (const ParseFormatError& e) {
                throw EvalDomainError(std::string("bad test tree: ") + e.what(), line);
            }
        }
        try {
            results.push_back(parseval(g, t));
        } catch (const EvalDomainError& e) {
            throw EvalDomainError(e.what(), line);
        }
    }
    if (std::getline(test, tline)) throw EvalDomainError("test file has extra lines", line + 1);
    return aggregate(results, options);
}

void write_report(std::ostream& out, const CorpusEval& eval, const std::string& name) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-12s %10s %10s %10s %10s %12s\n", "Parser", "Precision", "Recall",
                  "Avg P/R", "Sentences", "Pct. failed");
    out << buf;
    std::snprintf(buf, sizeof buf, "%-12s %10.2f %10.2f %10.2f %10zu %12.2f\n", name.c_str(), eval.precision,
                  eval.recall, eval.average, eval.sentences.size(), eval.pct_failed);
    out << buf;
}

void write_sentence_csv(std::ostream& out, const CorpusEval& eval) {
    out << "sentence,matched,proposed,gold,precision,recall,failed\n";
    char buf[160];
    for (std::size_t i = 0; i < eval.sentences.size(); ++i) {
        const EvalResult& r = eval.sentences[i];
        std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%zu,%.4f,%.4f,%d\n", i + 1, r.matched, r.proposed, r.gold,
                      r.precision, r.recall, r.failed ? 1 : 0);
        out << buf;
    }
}

}  // namespace effparse
