// regimeval command-line interface.
//
// Exit codes: 0 success, 1 validation/config error, 2 runtime failure.
// Diagnostics go to stderr; result data goes to files under the run's
// output directory. Summaries print to stdout (tables, or JSON with
// --json).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "regimeval/common.hpp"
#include "regimeval/embed.hpp"
#include "regimeval/pipeline.hpp"
#include "regimeval/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace regimeval;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string output_dir;  // overrides config when set
    std::optional<std::uint64_t> seed;
    bool as_json = false;
    int verbosity = 0;
};

RunConfig load_config(const GlobalOptions& options) {
    RunConfig config = load_run_config(options.config_path);
    if (!options.output_dir.empty()) config.output_dir = options.output_dir;
    if (options.seed) config.seed = *options.seed;
    return config;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

void add_common(CLI::App* cmd, GlobalOptions& options, bool with_json = true) {
    cmd->add_option("--config", options.config_path, "Run configuration file (JSON)")
        ->required();
    cmd->add_option("--output-dir,-o", options.output_dir,
                    "Override the config's output directory");
    cmd->add_option("--seed", options.seed, "Override the config's seed");
    if (with_json) cmd->add_flag("--json", options.as_json, "Machine-readable summary");
    cmd->add_flag("-v,--verbose", options.verbosity, "More diagnostics on stderr");
}

int cmd_ingest(const GlobalOptions& options) {
    RunConfig config = load_config(options);
    fs::create_directories(config.output_dir);
    RejectionReport report;
    const auto articles =
        ingest_news(config.news_path, config.news_format, config.date_range, &report);

    const std::string out_name =
        config.news_format == NewsFormat::Csv ? "articles.csv" : "articles.jsonl";
    const std::string out_path = (fs::path(config.output_dir) / out_name).string();
    emit_news(out_path, config.news_format, articles);

    json rejections = json::array();
    for (const auto& r : report.rejections)
        rejections.push_back({{"row", r.row}, {"reason", r.reason}});
    {
        std::ofstream rej((fs::path(config.output_dir) / "rejections.json").string(),
                          std::ios::binary);
        rej << json{{"rejections", rejections}}.dump(2) << '\n';
    }
    for (const auto& r : report.rejections)
        std::cerr << "warning: row " << r.row << " rejected: " << r.reason << '\n';

    json summary{{"accepted", report.accepted},
                 {"rejected", report.rejections.size()},
                 {"total_rows", report.total},
                 {"articles_file", out_path}};
    if (options.as_json)
        std::cout << summary.dump(2) << '\n';
    else
        std::cout << "accepted " << report.accepted << " of " << report.total
                  << " rows (" << report.rejections.size() << " rejected); wrote " << out_path
                  << '\n';
    return 0;
}

int cmd_drift(const GlobalOptions& options) {
    RunConfig config = load_config(options);
    fs::create_directories(config.output_dir);
    PreparedData data = prepare_data(config);
    print_warnings(data.warnings);

    std::vector<std::string> texts;
    for (const auto& sample : data.samples) texts.push_back(sample.article.text);
    const Vocabulary vocab = fit_vocabulary(texts, config.max_features);

    std::vector<std::pair<std::string, TermDistribution>> distributions;
    for (const auto& window : config.regimes) {
        std::vector<std::string> slice;
        for (const auto& sample : data.samples)
            if (assign_regime(sample.article.timestamp.date(), config.regimes) == window.name)
                slice.push_back(sample.article.text);
        if (slice.empty()) {
            std::cerr << "warning: regime '" << window.name << "' has no samples\n";
            continue;
        }
        distributions.emplace_back(window.name, term_distribution(slice, vocab));
    }
    const DriftMatrix matrix = drift_matrix(distributions);
    matrix.write_csv((fs::path(config.output_dir) / "drift_matrix.csv").string());
    matrix.write_json((fs::path(config.output_dir) / "drift_matrix.json").string());

    if (options.as_json) {
        std::cout << json{{"regimes", matrix.regime_names}, {"values", matrix.values}}.dump(2)
                  << '\n';
    } else {
        std::cout << "jensen-shannon drift (log base 2)\n";
        for (std::size_t i = 0; i < matrix.regime_names.size(); ++i) {
            std::cout << matrix.regime_names[i] << ":";
            for (std::size_t j = 0; j < matrix.regime_names.size(); ++j)
                std::cout << ' ' << format_double(matrix.at(i, j));
            std::cout << '\n';
        }
    }
    return 0;
}

int cmd_train(const GlobalOptions& options, const std::string& only_model) {
    RunConfig config = load_config(options);
    fs::create_directories(config.output_dir);
    PreparedData data = prepare_data(config);
    print_warnings(data.warnings);

    std::vector<std::string> texts;
    for (const auto& sample : data.samples) texts.push_back(sample.article.text);
    const Vocabulary vocab = fit_vocabulary(texts, config.max_features);
    vocab.save((fs::path(config.output_dir) / "vocabulary.json").string());
    auto embedder = make_embedding_provider(config);

    SplitSet split = chrono_split(data.samples);
    split.check_chronology();

    auto to_training = [&](std::span<const AlignedSample> samples, bool with_embeddings) {
        std::vector<TrainExample> examples;
        for (const auto& sample : samples) {
            TrainExample example;
            example.id = sample.article.id;
            example.features = transform(sample.article.text, vocab);
            if (with_embeddings)
                example.embedding = embedder->embed(sample.article.id, sample.article.text);
            example.target = sample.next_day_return;
            examples.push_back(std::move(example));
        }
        return examples;
    };
    auto eval_mse = [&](const BaselineModel& model, std::span<const AlignedSample> samples) {
        std::vector<double> preds;
        std::vector<double> targets;
        for (const auto& sample : samples) {
            std::optional<Embedding> embedding;
            if (model.uses_embeddings())
                embedding = embedder->embed(sample.article.id, sample.article.text);
            preds.push_back(model.predict(transform(sample.article.text, vocab), embedding));
            targets.push_back(sample.next_day_return);
        }
        return mse(preds, targets);
    };

    json summary = json::array();
    bool trained_any = false;
    for (const auto& spec : config.models) {
        if (spec.kind != ModelSpec::Kind::Baseline) continue;
        if (!only_model.empty() && spec.name != only_model) continue;
        trained_any = true;
        BaselineConfig train_config = spec.baseline;
        train_config.seed = config.seed;
        BaselineModel model =
            train_baseline(to_training(split.train, train_config.use_embeddings), vocab.size(),
                           train_config, spec.name);
        const std::string model_path =
            (fs::path(config.output_dir) / (spec.name + ".model.json")).string();
        model.save(model_path);
        json row{{"model", spec.name},
                 {"train_mse", eval_mse(model, split.train)},
                 {"validation_mse", eval_mse(model, split.validation)},
                 {"test_mse", eval_mse(model, split.test)},
                 {"file", model_path}};
        summary.push_back(row);
        if (!options.as_json)
            std::cout << spec.name << ": train " << row["train_mse"].get<double>() << ", val "
                      << row["validation_mse"].get<double>() << ", test "
                      << row["test_mse"].get<double>() << " -> " << model_path << '\n';
    }
    if (!trained_any)
        throw ValidationError(only_model.empty()
                                  ? "config has no baseline models to train"
                                  : "no baseline model named '" + only_model + "'");
    if (options.as_json) std::cout << summary.dump(2) << '\n';
    return 0;
}

int cmd_evaluate(const GlobalOptions& options) {
    RunConfig config = load_config(options);
    RunResult result = run(config);
    print_warnings(result.manifest.warnings);
    if (options.as_json)
        std::cout << summary_json(result.profiles).dump(2) << '\n';
    else
        std::cout << render_summary(result.profiles);
    std::cerr << "wrote profiles and manifest to " << config.output_dir << '\n';
    return 0;
}

int cmd_profile(const GlobalOptions& options, const std::string& regime,
                const std::string& model) {
    RunConfig config = load_config(options);
    bool regime_found = false;
    std::vector<RegimeWindow> kept;
    for (const auto& window : config.regimes) {
        if (window.name == regime) {
            kept.push_back(window);
            regime_found = true;
        }
    }
    if (!regime_found) throw ValidationError("no regime named '" + regime + "' in config");
    config.regimes = kept;

    std::vector<ModelSpec> kept_models;
    for (const auto& spec : config.models)
        if (spec.name == model) kept_models.push_back(spec);
    if (kept_models.empty()) throw ValidationError("no model named '" + model + "' in config");
    config.models = kept_models;

    config.output_dir =
        (fs::path(config.output_dir) / ("profile-" + regime + "-" + model)).string();
    RunResult result = run(config);
    print_warnings(result.manifest.warnings);
    if (result.profiles.empty())
        throw RuntimeFailure("regime '" + regime + "' produced no profile (see warnings)");
    if (options.as_json)
        std::cout << summary_json(result.profiles).dump(2) << '\n';
    else
        std::cout << render_summary(result.profiles);
    return 0;
}

int cmd_controls(const GlobalOptions& options) {
    RunConfig config = load_config(options);
    fs::create_directories(config.output_dir);
    ControlReport report = control_study(config);
    print_warnings(report.warnings);
    report.write_csv((fs::path(config.output_dir) / "controls.csv").string());
    report.write_json((fs::path(config.output_dir) / "controls.json").string());
    if (options.as_json) {
        std::ifstream in((fs::path(config.output_dir) / "controls.json").string());
        std::cout << in.rdbuf();
    } else {
        std::cout << "control study (model " << report.model_id << ")\n";
        for (const auto& row : report.rows) {
            std::cout << row.event_tag << " [" << row.scope << " " << row.regimes
                      << ", n=" << row.cohort_size << "] pcs="
                      << (row.pcs.value ? format_double(*row.pcs.value) : "N/A")
                      << " tsv=" << (row.tsv.value ? format_double(*row.tsv.value) : "N/A")
                      << '\n';
        }
    }
    return 0;
}

int cmd_cross_sector(const GlobalOptions& options, const std::string& train_sector,
                     const std::string& test_sector) {
    RunConfig config = load_config(options);
    fs::create_directories(config.output_dir);
    CrossSectorReport report = cross_sector(config, train_sector, test_sector);
    print_warnings(report.warnings);
    report.write_csv((fs::path(config.output_dir) / "cross_sector.csv").string());
    report.write_json((fs::path(config.output_dir) / "cross_sector.json").string());
    if (options.as_json) {
        std::ifstream in((fs::path(config.output_dir) / "cross_sector.json").string());
        std::cout << in.rdbuf();
    } else {
        std::cout << "cross-sector MSE (train " << train_sector << ", test " << test_sector
                  << ", " << report.train_size << "/" << report.test_size << " samples)\n";
        for (const auto& row : report.rows)
            std::cout << row.model << ": text-only " << format_double(row.text_only_mse)
                      << ", feature-based " << format_double(row.feature_based_mse) << '\n';
    }
    return 0;
}

int cmd_dump_embeddings(const GlobalOptions& options, std::string out_file) {
    RunConfig config = load_config(options);
    fs::create_directories(config.output_dir);
    PreparedData data = prepare_data(config);
    print_warnings(data.warnings);
    auto embedder = make_embedding_provider(config);

    if (out_file.empty())
        out_file = (fs::path(config.output_dir) / "embeddings.jsonl").string();
    std::vector<std::pair<std::string, std::vector<double>>> rows;
    rows.reserve(data.samples.size());
    for (const auto& sample : data.samples)
        rows.emplace_back(sample.article.id,
                          embedder->embed(sample.article.id, sample.article.text).values);
    write_embedding_jsonl(out_file, rows);
    if (options.as_json)
        std::cout << json{{"embeddings", rows.size()}, {"file", out_file}}.dump(2) << '\n';
    else
        std::cout << "wrote " << rows.size() << " embeddings to " << out_file << '\n';
    return 0;
}

int cmd_replay_nlics(const GlobalOptions& options, const std::string& log_path) {
    RunConfig config = load_config(options);
    if (!fs::exists(log_path)) throw ValidationError("replay log does not exist: " + log_path);
    config.entailment.kind = EntailmentSpec::Kind::Replay;
    config.entailment.replay_log = log_path;
    // Only NLICS is recomputed; everything else stays out of the way.
    config.toggles = MetricToggles{false, false, false, false, true};
    config.output_dir = (fs::path(config.output_dir) / "replay").string();

    RunResult result = run(config);
    print_warnings(result.manifest.warnings);
    json summary = json::array();
    for (const auto& profile : result.profiles) {
        summary.push_back({{"regime", profile.regime},
                           {"model", profile.model_id},
                           {"nlics", profile.nlics.value ? json(*profile.nlics.value)
                                                         : json("N/A")},
                           {"eligible", profile.nlics.eligible}});
        if (!options.as_json)
            std::cout << profile.regime << " / " << profile.model_id << ": nlics="
                      << (profile.nlics.value ? format_double(*profile.nlics.value) : "N/A")
                      << " (n=" << profile.nlics.eligible << ")\n";
    }
    if (options.as_json) std::cout << summary.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regimeval: regime-aware robustness evaluation for text-driven return "
                 "predictors"};
    app.require_subcommand(1);

    GlobalOptions options;
    std::string only_model;
    std::string profile_regime, profile_model;
    std::string train_sector, test_sector;
    std::string dump_out;
    std::string replay_log;

    auto* ingest = app.add_subcommand("ingest", "Validate news data and emit canonical files");
    add_common(ingest, options);
    auto* drift = app.add_subcommand("drift", "Regime vocabulary drift matrix (JS divergence)");
    add_common(drift, options);
    auto* train = app.add_subcommand("train", "Train baseline models on the global split");
    add_common(train, options);
    train->add_option("--model", only_model, "Train only this model");
    auto* evaluate =
        app.add_subcommand("evaluate", "Full regime-aware evaluation (profiles + drift)");
    add_common(evaluate, options);
    auto* profile = app.add_subcommand("profile", "One regime x model robustness profile");
    add_common(profile, options);
    profile->add_option("--regime", profile_regime, "Regime name")->required();
    profile->add_option("--model", profile_model, "Model name")->required();
    auto* controls =
        app.add_subcommand("controls", "Within- vs cross-regime matched-event study");
    add_common(controls, options);
    auto* cross = app.add_subcommand("cross-sector", "Train on one sector, test on another");
    add_common(cross, options);
    cross->add_option("--train-sector", train_sector, "Training sector")->required();
    cross->add_option("--test-sector", test_sector, "Evaluation sector")->required();
    auto* dump = app.add_subcommand("dump-embeddings",
                                    "Emit sample embeddings as JSONL for external projection");
    add_common(dump, options);
    dump->add_option("--out", dump_out, "Output file (default <output_dir>/embeddings.jsonl)");
    auto* replay = app.add_subcommand("replay-nlics",
                                      "Recompute NLICS offline from a recorded replay log");
    add_common(replay, options);
    replay->add_option("--log", replay_log, "Replay log (JSONL)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 1;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(options);
        if (drift->parsed()) return cmd_drift(options);
        if (train->parsed()) return cmd_train(options, only_model);
        if (evaluate->parsed()) return cmd_evaluate(options);
        if (profile->parsed()) return cmd_profile(options, profile_regime, profile_model);
        if (controls->parsed()) return cmd_controls(options);
        if (cross->parsed()) return cmd_cross_sector(options, train_sector, test_sector);
        if (dump->parsed()) return cmd_dump_embeddings(options, dump_out);
        if (replay->parsed()) return cmd_replay_nlics(options, replay_log);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const RuntimeFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
