// effparse: train models, parse, sweep parser settings, evaluate.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "effparse/errors.hpp"
#include "effparse/harness.hpp"

using namespace effparse;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNoParse = 3;

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::string model_dir;
    std::string output_dir;
    std::string corpus;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_path, "key=value configuration file");
    app->add_option("--set", c.overrides, "override a configuration key (key=value), repeatable");
    app->add_option("--seed", c.seed, "split seed");
    app->add_option("--jobs", c.jobs, "sentences parsed in parallel");
    app->add_option("--model-dir", c.model_dir, "model directory");
    app->add_option("--output-dir", c.output_dir, "output directory");
    app->add_option("--corpus", c.corpus, "bracketed treebank file");
}

RunConfig build_config(const Common& c) {
    RunConfig config = c.config_path.empty() ? RunConfig{} : RunConfig::load(c.config_path);
    for (const auto& kv : c.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (c.seed) config.seed = *c.seed;
    if (c.jobs) config.set("jobs", std::to_string(*c.jobs));
    if (!c.model_dir.empty()) config.model_dir = c.model_dir;
    if (!c.output_dir.empty()) config.output_dir = c.output_dir;
    if (!c.corpus.empty()) config.corpus = c.corpus;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Statistical parsing efficiency workbench"};
    app.require_subcommand(1);

    Common train_opts, parse_opts, sweep_opts;
    auto* train = app.add_subcommand("train", "train all models into the model directory");
    add_common(train, train_opts);

    auto* parse = app.add_subcommand("parse", "parse sentences, one per line");
    add_common(parse, parse_opts);
    std::string parser = "EC", input = "-", output = "-", counters;
    double parameter = 0.0;
    bool require_parse = false;
    parse->add_option("--parser", parser, "EC or BR")->capture_default_str();
    parse->add_option("--param", parameter, "overparse factor (EC) or base beam factor (BR)");
    parse->add_option("--input", input, "input file, '-' for stdin")->capture_default_str();
    parse->add_option("--output", output, "output file, '-' for stdout")->capture_default_str();
    parse->add_option("--counters", counters, "write per-sentence event counter dumps here");
    parse->add_flag("--require-parse", require_parse, "exit with status 3 if any sentence fails");

    auto* sweep = app.add_subcommand("sweep", "parse the test split at every configured parameter value");
    add_common(sweep, sweep_opts);

    auto* eval = app.add_subcommand("eval", "labeled precision/recall of test parses against gold");
    std::string gold_path, test_path, csv_path;
    bool macro = false, exclude_failed = false;
    eval->add_option("gold", gold_path, "gold trees, one per line")->required();
    eval->add_option("test", test_path, "test trees, one per line, (FAIL) for failures")->required();
    eval->add_option("--csv", csv_path, "per-sentence CSV output");
    eval->add_flag("--macro", macro, "macro-average over sentences");
    eval->add_flag("--exclude-failed", exclude_failed, "leave failed sentences out of recall");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*train) {
            const RunConfig config = build_config(train_opts);
            cmd_train(config);
            std::cout << "models written to " << config.model_dir << '\n';
        } else if (*parse) {
            const RunConfig config = build_config(parse_opts);
            const ParserKind kind = parse_parser_kind(parser);
            if (parameter == 0.0) parameter = kind == ParserKind::EC ? 2.0 : 1e-11;
            std::ifstream in_file;
            std::ofstream out_file, counter_file;
            if (input != "-") {
                in_file.open(input);
                if (!in_file) throw ConfigError("cannot open " + input);
            }
            if (output != "-") {
                out_file.open(output);
                if (!out_file) throw ConfigError("cannot write " + output);
            }
            if (!counters.empty()) {
                counter_file.open(counters);
                if (!counter_file) throw ConfigError("cannot write " + counters);
            }
            const std::size_t failed =
                cmd_parse(config, kind, parameter, input == "-" ? std::cin : in_file,
                          output == "-" ? std::cout : out_file, counters.empty() ? nullptr : &counter_file);
            if (failed > 0) {
                std::cerr << failed << " sentence(s) failed to parse\n";
                if (require_parse) return kExitNoParse;
            }
        } else if (*sweep) {
            const RunConfig config = build_config(sweep_opts);
            const auto rows = cmd_sweep(config);
            write_sweep_csv(std::cout, rows);
        } else if (*eval) {
            EvalOptions options;
            options.averaging = macro ? Averaging::Macro : Averaging::Micro;
            options.failures_in_recall = !exclude_failed;
            cmd_eval(gold_path, test_path, std::cout, csv_path, options);
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
