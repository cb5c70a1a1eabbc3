#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "effparse/tree.hpp"

namespace effparse {

using LabeledSpan = std::tuple<std::string, std::size_t, std::size_t>;

/// Labeled spans of every internal non-preterminal node (root included),
/// sorted; duplicates kept.
std::vector<LabeledSpan> labeled_constituents(const Tree& tree);

struct EvalResult {
    std::size_t matched = 0;
    std::size_t proposed = 0;
    std::size_t gold = 0;
    double precision = 0.0;
    double recall = 0.0;
    double average = 0.0;
    bool failed = false;
};

/// Labeled precision/recall. A missing test tree is a failed parse with
/// nothing proposed. Throws EvalDomainError if the word counts differ.
EvalResult parseval(const Tree& gold, const std::optional<Tree>& test);

enum class Averaging { Micro, Macro };

struct EvalOptions {
    Averaging averaging = Averaging::Micro;
    /// Count failed sentences' gold constituents in the recall denominator.
    bool failures_in_recall = true;
    /// Sentences longer than this are left out of the aggregate.
    std::size_t max_length = 100;
};

struct CorpusEval {
    std::vector<EvalResult> sentences;
    std::size_t matched = 0;
    std::size_t proposed = 0;
    std::size_t gold = 0;
    double precision = 0.0;
    double recall = 0.0;
    double average = 0.0;
    double pct_failed = 0.0;
    std::size_t failures = 0;
};

/// Precision and recall over summed counts (or the mean of per-sentence
/// scores under Averaging::Macro); pct_failed over all sentences given.
CorpusEval aggregate(const std::vector<EvalResult>& results, const EvalOptions& options = {});

/// Scores aligned gold/test lines, skipping gold sentences longer than
/// options.max_length. Test lines "(FAIL)" or empty are failures.
/// Throws EvalDomainError carrying the 1-based line on misalignment.
CorpusEval evaluate_files(std::istream& gold, std::istream& test, const EvalOptions& options = {});

/// Text report: one header row and one value row.
void write_report(std::ostream& out, const CorpusEval& eval, const std::string& name);
/// Per-sentence CSV: sentence,matched,proposed,gold,precision,recall,failed
void write_sentence_csv(std::ostream& out, const CorpusEval& eval);

}  // namespace effparse
