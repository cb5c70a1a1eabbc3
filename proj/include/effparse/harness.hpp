#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "effparse/beam_parser.hpp"
#include "effparse/boundary.hpp"
#include "effparse/chart_parser.hpp"
#include "effparse/eval.hpp"
#include "effparse/events.hpp"
#include "effparse/full_model.hpp"
#include "effparse/left_context_model.hpp"
#include "effparse/left_corner.hpp"
#include "effparse/pcfg.hpp"
#include "effparse/treebank.hpp"

namespace effparse {

/// Everything that determines a run. Stored as key=value lines.
struct RunConfig {
    std::string corpus = "data/minitreebank.mrg";
    std::string heads;  // empty: builtin head table
    std::string model_dir = "model";
    std::string output_dir = "out";
    double heldout_fraction = 0.1;
    double test_fraction = 0.1;
    std::uint64_t seed = 1;

    std::vector<std::string> parsers = {"EC", "BR"};
    std::vector<double> ec_factors = {1, 1.25, 1.5, 2, 3};
    std::vector<double> br_betas = {1e-6, 1e-8, 1e-10, 1e-11, 1e-12};

    std::size_t buckets = 12;
    double max_lambda = 0.99;
    std::size_t rare_threshold = 5;
    std::size_t enough = 100;
    std::size_t max_pops = 1'000'000;
    std::size_t max_candidates = 50;
    double threshold_ratio = 1e-2;
    std::size_t max_length = 100;
    std::size_t max_test_sentences = 0;  // 0: the whole test split
    std::size_t jobs = 1;
    /// Number of timing passes over the test set; the fastest wall time per
    /// sentence and setting is kept. Events and parses come from the first pass.
    std::size_t timing_repeats = 3;

    /// Throws ConfigError for an unknown key or a malformed value.
    void set(const std::string& key, const std::string& value);
    std::string to_text() const;
    static RunConfig from_text(std::istream& in);
    static RunConfig load(const std::string& path);

    InterpolationOptions interpolation() const;
};

/// Models and test data loaded from a model directory. Not movable: the
/// left-context model refers to the grammar.
struct ModelBundle {
    ModelBundle() = default;
    ModelBundle(const ModelBundle&) = delete;
    ModelBundle& operator=(const ModelBundle&) = delete;

    Pcfg pcfg;
    BoundaryModel boundary;
    FullModel full;
    std::optional<LeftContextModel> left_context;
    LeftCornerTable left_corner;
    std::vector<Tree> test;
    std::optional<ChartParser> chart_parser;
    std::optional<BeamParser> beam_parser;
};

/// Throws ConfigError if the directory or a model file is missing.
std::unique_ptr<ModelBundle> load_models(const std::string& dir);

/// Trains every model and writes the model directory.
void cmd_train(const RunConfig& config);

enum class ParserKind { EC, BR };
ParserKind parse_parser_kind(const std::string& name);
std::string parser_name(ParserKind kind);

struct ParseOutcome {
    std::optional<Tree> tree;
    EventCounter counter;
    double seconds = 0.0;
};

/// One sentence with one parser setting; the counter is local to the call.
ParseOutcome parse_sentence_with(const ModelBundle& models, ParserKind kind, double parameter,
                                 const Sentence& sentence, const RunConfig& config);

struct SweepRow {
    std::string parser;
    double parameter = 0.0;
    double avg_pr = 0.0;
    double events_per_sentence = 0.0;
    double seconds_per_sentence = 0.0;
    double pct_failed = 0.0;
    std::size_t sentences = 0;
    EventCounter counter;
    std::vector<std::optional<Tree>> parses;
};

/// Parses the test sentences for every (parser, parameter) pair.
std::vector<SweepRow> run_sweep(const RunConfig& config, const ModelBundle& models);
/// run_sweep plus sweep.csv, the four figure files and per-row parses in
/// config.output_dir.
std::vector<SweepRow> cmd_sweep(const RunConfig& config);

std::string format_parameter(double value);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
/// fig1_events_per_second.csv, fig2_time_vs_events.csv,
/// fig3_error_vs_events.csv, fig4_convergence.csv.
void write_figures(const std::string& dir, const std::vector<SweepRow>& rows);

/// Parses one sentence per input line; writes a bracketed tree or "(FAIL)"
/// per line and, if `counters` is set, a counter dump per sentence.
/// Returns the number of failed sentences.
std::size_t cmd_parse(const RunConfig& config, ParserKind kind, double parameter, std::istream& in,
                      std::ostream& out, std::ostream* counters);

/// Writes the report to `report` and the per-sentence CSV to `csv_path`
/// when non-empty.
CorpusEval cmd_eval(const std::string& gold_path, const std::string& test_path, std::ostream& report,
                    const std::string& csv_path, const EvalOptions& options = {});

}  // namespace effparse
