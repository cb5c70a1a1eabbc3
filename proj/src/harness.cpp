#include "effparse/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "effparse/errors.hpp"

namespace effparse {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    for (std::string item; std::getline(ss, item, ',');) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError(key + ": not a number: '" + value + "'");
    }
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        if (!value.empty() && value[0] == '-') throw std::invalid_argument(value);
        const auto v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError(key + ": not a non-negative integer: '" + value + "'");
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
    return out;
}

std::string join(const std::vector<double>& items) {
    std::vector<std::string> s;
    for (double v : items) s.push_back(format_parameter(v));
    return join(s);
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("missing model file: " + path.string());
    return in;
}

void write_trees(const fs::path& path, const std::vector<Tree>& trees) {
    auto out = open_out(path);
    for (const Tree& t : trees) out << print_bracketed(t) << '\n';
}

std::vector<Tree> read_tree_lines(std::istream& in) {
    std::vector<Tree> out;
    for (std::string line; std::getline(in, line);) {
        line = trim(line);
        if (!line.empty()) out.push_back(read_one_bracketed(line));
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    auto positive_fraction = [&](double v) {
        if (!(v >= 0.0 && v < 1.0)) throw ConfigError(key + ": must lie in [0, 1)");
        return v;
    };
    if (key == "corpus") {
        corpus = value;
    } else if (key == "heads") {
        heads = value;
    } else if (key == "model_dir") {
        model_dir = value;
    } else if (key == "output_dir") {
        output_dir = value;
    } else if (key == "heldout_fraction") {
        heldout_fraction = positive_fraction(to_double(key, value));
    } else if (key == "test_fraction") {
        test_fraction = positive_fraction(to_double(key, value));
    } else if (key == "seed") {
        seed = to_uint(key, value);
    } else if (key == "parsers") {
        parsers.clear();
        for (const auto& p : split_list(value)) parsers.push_back(parser_name(parse_parser_kind(p)));
    } else if (key == "ec_factors") {
        ec_factors.clear();
        for (const auto& v : split_list(value)) {
            const double f = to_double(key, v);
            if (f < 1.0) throw ConfigError("ec_factors: factors must be >= 1");
            ec_factors.push_back(f);
        }
    } else if (key == "br_betas") {
        br_betas.clear();
        for (const auto& v : split_list(value)) {
            const double b = to_double(key, v);
            if (!(b > 0.0 && b <= 1.0)) throw ConfigError("br_betas: values must lie in (0, 1]");
            br_betas.push_back(b);
        }
    } else if (key == "buckets") {
        buckets = to_uint(key, value);
        if (buckets < 2) throw ConfigError("buckets: at least 2");
    } else if (key == "max_lambda") {
        max_lambda = to_double(key, value);
        if (!(max_lambda > 0.0 && max_lambda < 1.0)) throw ConfigError("max_lambda: must lie in (0, 1)");
    } else if (key == "rare_threshold") {
        rare_threshold = to_uint(key, value);
    } else if (key == "enough") {
        enough = to_uint(key, value);
        if (enough == 0) throw ConfigError("enough: at least 1");
    } else if (key == "max_pops") {
        max_pops = to_uint(key, value);
    } else if (key == "max_candidates") {
        max_candidates = to_uint(key, value);
        if (max_candidates == 0) throw ConfigError("max_candidates: at least 1");
    } else if (key == "threshold_ratio") {
        threshold_ratio = to_double(key, value);
        if (!(threshold_ratio > 0.0 && threshold_ratio <= 1.0)) throw ConfigError("threshold_ratio: must lie in (0, 1]");
    } else if (key == "max_length") {
        max_length = to_uint(key, value);
    } else if (key == "max_test_sentences") {
        max_test_sentences = to_uint(key, value);
    } else if (key == "timing_repeats") {
        timing_repeats = to_uint(key, value);
        if (timing_repeats == 0) throw ConfigError("timing_repeats: at least 1");
    } else if (key == "jobs") {
        jobs = to_uint(key, value);
        if (jobs == 0) throw ConfigError("jobs: at least 1");
    } else {
        throw ConfigError("unknown configuration key: " + key);
    }
}

std::string RunConfig::to_text() const {
    std::ostringstream out;
    out << "corpus=" << corpus << '\n'
        << "heads=" << heads << '\n'
        << "model_dir=" << model_dir << '\n'
        << "output_dir=" << output_dir << '\n'
        << "heldout_fraction=" << fmt(heldout_fraction) << '\n'
        << "test_fraction=" << fmt(test_fraction) << '\n'
        << "seed=" << seed << '\n'
        << "parsers=" << join(parsers) << '\n'
        << "ec_factors=" << join(ec_factors) << '\n'
        << "br_betas=" << join(br_betas) << '\n'
        << "buckets=" << buckets << '\n'
        << "max_lambda=" << fmt(max_lambda) << '\n'
        << "rare_threshold=" << rare_threshold << '\n'
        << "enough=" << enough << '\n'
        << "max_pops=" << max_pops << '\n'
        << "max_candidates=" << max_candidates << '\n'
        << "threshold_ratio=" << fmt(threshold_ratio) << '\n'
        << "max_length=" << max_length << '\n'
        << "max_test_sentences=" << max_test_sentences << '\n'
        << "timing_repeats=" << timing_repeats << '\n';
    return out.str();
}

RunConfig RunConfig::from_text(std::istream& in) {
    RunConfig c;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
        c.set(t.substr(0, eq), t.substr(eq + 1));
    }
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return from_text(in);
}

InterpolationOptions RunConfig::interpolation() const {
    InterpolationOptions o;
    o.buckets.num_buckets = buckets;
    o.max_lambda = max_lambda;
    return o;
}

// ---------------------------------------------------------------------------
// Training and loading

void cmd_train(const RunConfig& config) {
    const NormalizedCorpus corpus = load_treebank(config.corpus);
    if (corpus.trees.empty()) throw TrainingError("no usable trees in " + config.corpus);
    const CorpusSplit split = split_corpus(corpus.trees, config.heldout_fraction, config.test_fraction, config.seed);
    const HeadFinder heads = config.heads.empty() ? HeadFinder::builtin() : HeadFinder::load(config.heads);
    const InterpolationOptions interp = config.interpolation();

    PcfgOptions pcfg_options;
    pcfg_options.rare_threshold = config.rare_threshold;
    const Pcfg pcfg = Pcfg::train(split.train, pcfg_options);
    BoundaryModel boundary = BoundaryModel::train(split.train);
    boundary.set_word_cost(BoundaryModel::estimate_word_cost(pcfg, split.train));
    const FullModel full = FullModel::train(split.train, split.heldout, pcfg, heads, interp);
    const LeftContextModel left = LeftContextModel::train(split.train, split.heldout, pcfg, interp);
    const LeftCornerTable corner = LeftCornerTable::compute(pcfg);

    const fs::path dir(config.model_dir);
    fs::create_directories(dir);
    {
        auto out = open_out(dir / "pcfg.txt");
        pcfg.write(out);
    }
    {
        auto out = open_out(dir / "boundary.txt");
        boundary.write(out);
    }
    {
        auto out = open_out(dir / "full_model.txt");
        full.write(out);
    }
    {
        auto out = open_out(dir / "left_context_model.txt");
        left.write(out);
    }
    {
        auto out = open_out(dir / "left_corner.txt");
        corner.write(out);
    }
    {
        auto out = open_out(dir / "heads.txt");
        heads.write(out);
    }
    write_trees(dir / "train.mrg", split.train);
    write_trees(dir / "heldout.mrg", split.heldout);
    write_trees(dir / "test.mrg", split.test);
    {
        auto out = open_out(dir / "run_config.txt");
        out << config.to_text();
    }
    auto out = open_out(dir / "manifest.txt");
    out << "corpus " << config.corpus << '\n'
        << "trees " << corpus.trees.size() << '\n'
        << "skipped " << corpus.skipped << '\n'
        << "seed " << config.seed << '\n'
        << "train " << split.train.size() << '\n'
        << "heldout " << split.heldout.size() << '\n'
        << "test " << split.test.size() << '\n'
        << "buckets " << interp.buckets.describe() << '\n';
    auto lambdas = [&](const std::string& name, const InterpolatedModel& m) {
        out << "model " << name << " order " << m.order() << " heldout_estimated " << (m.heldout_estimated() ? 1 : 0)
            << '\n';
        for (std::size_t k = 1; k <= m.order(); ++k) {
            out << "  lambdas " << k;
            for (double l : m.bucket_lambdas(k)) out << ' ' << fmt(l);
            out << '\n';
        }
    };
    lambdas("head_pos", full.head_pos_model());
    lambdas("head_word", full.head_word_model());
    lambdas("expansion", full.expansion_model());
    lambdas("left_context_expansion", left.expansion_model());
    lambdas("left_context_word", left.word_model());
    out << "files pcfg.txt boundary.txt full_model.txt left_context_model.txt left_corner.txt heads.txt"
           " train.mrg heldout.mrg test.mrg run_config.txt\n";
}

std::unique_ptr<ModelBundle> load_models(const std::string& dir_name) {
    const fs::path dir(dir_name);
    if (!fs::is_directory(dir)) throw ConfigError("model directory not found: " + dir_name);
    auto m = std::make_unique<ModelBundle>();
    {
        auto in = open_in(dir / "pcfg.txt");
        m->pcfg = Pcfg::read(in);
    }
    {
        auto in = open_in(dir / "boundary.txt");
        m->boundary = BoundaryModel::read(in);
    }
    {
        auto in = open_in(dir / "full_model.txt");
        m->full = FullModel::read(in);
    }
    {
        auto in = open_in(dir / "left_context_model.txt");
        m->left_context.emplace(LeftContextModel::read(in, m->pcfg));
    }
    {
        auto in = open_in(dir / "left_corner.txt");
        m->left_corner = LeftCornerTable::read(in);
    }
    m->chart_parser.emplace(m->pcfg, m->boundary);
    m->beam_parser.emplace(*m->left_context, m->left_corner);
    if (fs::exists(dir / "test.mrg")) {
        auto in = open_in(dir / "test.mrg");
        m->test = read_tree_lines(in);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Parsing

ParserKind parse_parser_kind(const std::string& name) {
    if (name == "EC" || name == "ec") return ParserKind::EC;
    if (name == "BR" || name == "br") return ParserKind::BR;
    throw ConfigError("unknown parser '" + name + "' (expected EC or BR)");
}

std::string parser_name(ParserKind kind) { return kind == ParserKind::EC ? "EC" : "BR"; }

ParseOutcome parse_sentence_with(const ModelBundle& models, ParserKind kind, double parameter,
                                 const Sentence& sentence, const RunConfig& config) {
    ParseOutcome out;
    Stopwatch clock;
    if (kind == ParserKind::EC) {
        const ChartParser& parser = *models.chart_parser;
        EcConfig ec;
        ec.overparse_factor = parameter;
        ec.threshold_ratio = config.threshold_ratio;
        ec.max_candidates = config.max_candidates;
        try {
            out.tree = ec_parse(parser, models.full, sentence, ec, out.counter).tree;
        } catch (const NoParseError&) {
        }
    } else {
        const BeamParser& parser = *models.beam_parser;
        BeamConfig br;
        br.base_beam_factor = parameter;
        br.enough = config.enough;
        br.max_pops = config.max_pops;
        out.tree = br_parse(parser, sentence, br, out.counter).tree;
    }
    out.seconds = clock.seconds();
    out.counter.add_wall_seconds(out.seconds);
    out.counter.add_sentences(1);
    return out;
}

namespace {

template <typename Fn>
void for_each_parallel(std::size_t n, std::size_t jobs, Fn fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    for (std::size_t j = 0; j < jobs; ++j) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

std::vector<Tree> test_sentences(const RunConfig& config, const ModelBundle& models) {
    std::vector<Tree> out;
    for (const Tree& t : models.test) {
        if (t.num_words() > config.max_length) continue;
        out.push_back(t);
        if (config.max_test_sentences && out.size() >= config.max_test_sentences) break;
    }
    return out;
}

}  // namespace

std::vector<SweepRow> run_sweep(const RunConfig& config, const ModelBundle& models) {
    const std::vector<Tree> gold = test_sentences(config, models);
    if (gold.empty()) throw ConfigError("no test sentences to parse");

    struct Setting {
        ParserKind kind;
        double parameter;
    };
    std::vector<Setting> settings;
    for (const auto& name : config.parsers) {
        const ParserKind kind = parse_parser_kind(name);
        for (double param : kind == ParserKind::EC ? config.ec_factors : config.br_betas)
            settings.push_back({kind, param});
    }

    // Untimed warm-up so the first timed sentences do not pay for cold caches.
    for (std::size_t i = 0; i < std::min<std::size_t>(gold.size(), 5); ++i)
        for (const Setting& s : settings)
            parse_sentence_with(models, s.kind, s.parameter, sentence_from_tree(gold[i]), config);

    // Each pass parses every sentence at every setting back to back, so drift
    // in machine speed lands on all rows alike. Repeats are whole passes and
    // the fastest time per sentence and setting is kept, which keeps a slow
    // stretch of the machine from owning every sample of a row.
    std::vector<std::vector<ParseOutcome>> outcomes(settings.size(), std::vector<ParseOutcome>(gold.size()));
    for (std::size_t r = 0; r < config.timing_repeats; ++r) {
        for_each_parallel(gold.size(), config.jobs, [&](std::size_t i) {
            const Sentence sentence = sentence_from_tree(gold[i]);
            for (std::size_t k = 0; k < settings.size(); ++k) {
                ParseOutcome out = parse_sentence_with(models, settings[k].kind, settings[k].parameter, sentence, config);
                if (r == 0)
                    outcomes[k][i] = std::move(out);
                else
                    outcomes[k][i].seconds = std::min(outcomes[k][i].seconds, out.seconds);
            }
        });
    }

    std::vector<SweepRow> rows;
    for (std::size_t k = 0; k < settings.size(); ++k) {
        SweepRow row;
        row.parser = parser_name(settings[k].kind);
        row.parameter = settings[k].parameter;
        std::vector<EvalResult> evals;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            EventCounter& timed = outcomes[k][i].counter;
            timed.add_wall_seconds(outcomes[k][i].seconds - timed.wall_seconds());
            row.counter.merge_in(timed);
            evals.push_back(parseval(gold[i], outcomes[k][i].tree));
            row.parses.push_back(std::move(outcomes[k][i].tree));
        }
        const CorpusEval ce = aggregate(evals);
        row.sentences = gold.size();
        row.avg_pr = ce.average;
        row.pct_failed = ce.pct_failed;
        const auto n = static_cast<double>(gold.size());
        row.events_per_sentence = static_cast<double>(row.counter.total()) / n;
        row.seconds_per_sentence = row.counter.wall_seconds() / n;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_parameter(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", value);
    return buf;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "parser,parameter,avg_pr,events_per_sentence,seconds_per_sentence,pct_failed\n";
    for (const SweepRow& r : rows) {
        out << r.parser << ',' << format_parameter(r.parameter) << ',' << fmt_fixed(r.avg_pr, 4) << ','
            << fmt_fixed(r.events_per_sentence, 2) << ',' << fmt_fixed(r.seconds_per_sentence, 6) << ','
            << fmt_fixed(r.pct_failed, 4) << '\n';
    }
}

void write_figures(const std::string& dir_name, const std::vector<SweepRow>& rows) {
    const fs::path dir(dir_name);
    fs::create_directories(dir);
    std::vector<std::string> parsers;
    for (const SweepRow& r : rows)
        if (std::find(parsers.begin(), parsers.end(), r.parser) == parsers.end()) parsers.push_back(r.parser);

    {
        auto out = open_out(dir / "fig1_events_per_second.csv");
        out << "parser,parameter,events_per_second\n";
        for (const SweepRow& r : rows) {
            const double eps = r.seconds_per_sentence > 0 ? r.events_per_sentence / r.seconds_per_sentence : 0.0;
            out << r.parser << ',' << format_parameter(r.parameter) << ',' << fmt_fixed(eps, 1) << '\n';
        }
    }
    {
        auto out = open_out(dir / "fig2_time_vs_events.csv");
        out << "kind,parser,events_per_sentence,seconds_per_sentence,slope,intercept,r_squared\n";
        for (const SweepRow& r : rows)
            out << "point," << r.parser << ',' << fmt_fixed(r.events_per_sentence, 2) << ','
                << fmt_fixed(r.seconds_per_sentence, 6) << ",,,\n";
        for (const auto& p : parsers) {
            std::vector<std::pair<double, double>> pts;
            for (const SweepRow& r : rows)
                if (r.parser == p) pts.emplace_back(r.events_per_sentence, r.seconds_per_sentence);
            try {
                const FitResult fit = linear_fit(pts);
                char buf[160];
                std::snprintf(buf, sizeof buf, "fit,%s,,,%.6e,%.6e,%.6f\n", p.c_str(), fit.slope, fit.intercept,
                              fit.r_squared);
                out << buf;
            } catch (const DegenerateFitError&) {
                out << "fit," << p << ",,,,,\n";
            }
        }
    }
    std::map<std::string, double> best;
    for (const SweepRow& r : rows) best[r.parser] = std::max(best[r.parser], r.avg_pr);
    {
        auto out = open_out(dir / "fig3_error_vs_events.csv");
        out << "parser,parameter,events_per_sentence,error\n";
        for (const SweepRow& r : rows)
            out << r.parser << ',' << format_parameter(r.parameter) << ',' << fmt_fixed(r.events_per_sentence, 2)
                << ',' << fmt_fixed(100.0 - r.avg_pr, 4) << '\n';
    }
    {
        auto out = open_out(dir / "fig4_convergence.csv");
        out << "parser,parameter,events_per_sentence,pct_of_best\n";
        for (const SweepRow& r : rows) {
            const double b = best[r.parser];
            out << r.parser << ',' << format_parameter(r.parameter) << ',' << fmt_fixed(r.events_per_sentence, 2)
                << ',' << fmt_fixed(b > 0 ? 100.0 * r.avg_pr / b : 0.0, 4) << '\n';
        }
    }
}

std::vector<SweepRow> cmd_sweep(const RunConfig& config) {
    const auto models = load_models(config.model_dir);
    auto rows = run_sweep(config, *models);
    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    {
        auto out = open_out(dir / "sweep.csv");
        write_sweep_csv(out, rows);
    }
    write_figures(config.output_dir, rows);
    {
        auto out = open_out(dir / "run_config.txt");
        out << config.to_text();
    }
    for (const SweepRow& r : rows) {
        auto out = open_out(dir / ("parses_" + r.parser + "_" + format_parameter(r.parameter) + ".mrg"));
        for (const auto& t : r.parses) out << (t ? print_bracketed(*t) : std::string("(FAIL)")) << '\n';
    }
    return rows;
}

std::size_t cmd_parse(const RunConfig& config, ParserKind kind, double parameter, std::istream& in,
                      std::ostream& out, std::ostream* counters) {
    const auto models = load_models(config.model_dir);
    std::vector<Sentence> sentences;
    for (std::string line; std::getline(in, line);) {
        const std::string t = trim(line);
        if (!t.empty()) sentences.push_back(parse_sentence(t, true));
    }
    std::vector<ParseOutcome> outcomes(sentences.size());
    for_each_parallel(sentences.size(), config.jobs, [&](std::size_t i) {
        outcomes[i] = parse_sentence_with(*models, kind, parameter, sentences[i], config);
    });
    std::size_t failed = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].tree) {
            out << print_bracketed(*outcomes[i].tree) << '\n';
        } else {
            out << "(FAIL)\n";
            ++failed;
        }
        if (counters) *counters << "sentence " << (i + 1) << '\n' << outcomes[i].counter.dump();
    }
    return failed;
}

CorpusEval cmd_eval(const std::string& gold_path, const std::string& test_path, std::ostream& report,
                    const std::string& csv_path, const EvalOptions& options) {
    std::ifstream gold(gold_path), test(test_path);
    if (!gold) throw ConfigError("cannot open " + gold_path);
    if (!test) throw ConfigError("cannot open " + test_path);
    const CorpusEval eval = evaluate_files(gold, test, options);
    write_report(report, eval, fs::path(test_path).stem().string());
    if (!csv_path.empty()) {
        auto out = open_out(csv_path);
        write_sentence_csv(out, eval);
    }
    return eval;
}

}  // namespace effparse
