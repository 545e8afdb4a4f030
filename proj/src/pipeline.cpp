#include "regimeval/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>

#include "regimeval/csv.hpp"
#include "regimeval/report.hpp"

namespace regimeval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve_path(const fs::path& base, const std::string& p) {
    if (p.empty()) return p;
    fs::path path(p);
    if (path.is_absolute()) return path.string();
    return (base / path).lexically_normal().string();
}

void require_file(const std::string& path, const std::string& what) {
    if (!fs::exists(path))
        throw ValidationError(what + " file does not exist: " + path);
}

std::string iso_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return std::string(buf);
}

std::string format_metric(const MetricValue& m) {
    return m.value ? format_double(*m.value) : "N/A";
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw ValidationError("config file " + path + ": invalid JSON");

    const fs::path base = fs::path(path).parent_path();
    RunConfig config;

    const json data = doc.value("data", json::object());
    config.news_path = resolve_path(base, data.value("news", ""));
    if (config.news_path.empty())
        throw ValidationError("config: data.news is required");
    const std::string format = data.value("news_format", "csv");
    auto parsed_format = parse_news_format(format);
    if (!parsed_format)
        throw ValidationError("config: unknown news_format '" + format + "' (csv|jsonl)");
    config.news_format = *parsed_format;
    config.prices_path = resolve_path(base, data.value("prices", ""));
    if (config.prices_path.empty())
        throw ValidationError("config: data.prices is required");
    if (data.contains("date_range")) {
        const json& range = data["date_range"];
        auto start = Date::parse(range.value("start", ""));
        auto end = Date::parse(range.value("end", ""));
        if (!start || !end)
            throw ValidationError("config: data.date_range needs start and end dates");
        config.date_range = DateRange{*start, *end};
    }

    if (doc.contains("regimes_file")) {
        config.regimes =
            load_regime_windows(resolve_path(base, doc["regimes_file"].get<std::string>()));
    } else if (doc.contains("regimes")) {
        for (const auto& item : doc["regimes"]) {
            auto start = Date::parse(item.value("start", ""));
            auto end = Date::parse(item.value("end", ""));
            if (!item.contains("name") || !start || !end)
                throw ValidationError("config: each regime needs name, start, end");
            config.regimes.push_back({item["name"].get<std::string>(), *start, *end});
        }
    } else {
        config.regimes = default_regime_windows();
    }
    validate_regime_windows(config.regimes);
    if (config.regimes.empty()) throw ValidationError("config: at least one regime required");

    config.max_features = doc.value("features", json::object()).value("max_features", 2000);
    if (config.max_features == 0)
        throw ValidationError("config: features.max_features must be >= 1");

    if (!doc.contains("models") || !doc["models"].is_array() || doc["models"].empty())
        throw ValidationError("config: at least one model required");
    std::set<std::string> model_names;
    for (const auto& item : doc["models"]) {
        ModelSpec spec;
        spec.name = item.value("name", "");
        if (spec.name.empty()) throw ValidationError("config: model without a name");
        if (!model_names.insert(spec.name).second)
            throw ValidationError("config: duplicate model name '" + spec.name + "'");
        const std::string type = item.value("type", "baseline");
        if (type == "baseline") {
            spec.kind = ModelSpec::Kind::Baseline;
            spec.baseline.learning_rate = item.value("learning_rate", 0.001);
            spec.baseline.batch_size = item.value("batch_size", 64);
            spec.baseline.epochs = item.value("epochs", 200);
            spec.baseline.ridge_lambda = item.value("ridge_lambda", 1e-3);
            spec.baseline.use_embeddings = item.value("use_embeddings", false);
        } else if (type == "external") {
            spec.kind = ModelSpec::Kind::External;
            spec.predictions_path = resolve_path(base, item.value("predictions", ""));
            if (spec.predictions_path.empty())
                throw ValidationError("config: external model '" + spec.name +
                                      "' needs a predictions path");
            require_file(spec.predictions_path, "predictions");
        } else {
            throw ValidationError("config: unknown model type '" + type + "'");
        }
        config.models.push_back(std::move(spec));
    }

    const json emb = doc.value("embeddings", json::object());
    const std::string emb_kind = emb.value("provider", "hash");
    if (emb_kind == "hash") {
        config.embedding.kind = EmbeddingSpec::Kind::Hash;
        config.embedding.dimension = emb.value("dimension", 256);
    } else if (emb_kind == "file") {
        config.embedding.kind = EmbeddingSpec::Kind::File;
        config.embedding.path = resolve_path(base, emb.value("path", ""));
        if (config.embedding.path.empty())
            throw ValidationError("config: embeddings.provider=file needs a path");
        require_file(config.embedding.path, "embedding");
    } else {
        throw ValidationError("config: unknown embedding provider '" + emb_kind + "'");
    }
    config.embedding.cache_path = resolve_path(base, emb.value("cache", ""));

    const json ent = doc.value("entailment", json::object());
    const std::string ent_kind = ent.value("provider", "stub");
    if (ent_kind == "stub") {
        config.entailment.kind = EntailmentSpec::Kind::Stub;
    } else if (ent_kind == "remote") {
        config.entailment.kind = EntailmentSpec::Kind::Remote;
        auto& remote = config.entailment.remote;
        remote.endpoint = ent.value("endpoint", "");
        if (remote.endpoint.empty())
            throw ValidationError("config: entailment.provider=remote needs an endpoint");
        remote.model = ent.value("model", "gpt-4");
        remote.auth_token = ent.value("auth_token", "");
        if (ent.contains("auth_token_env")) {
            const char* token = std::getenv(ent["auth_token_env"].get<std::string>().c_str());
            if (token) remote.auth_token = token;
        }
        if (ent.contains("prompt_template_file")) {
            const std::string tpl_path =
                resolve_path(base, ent["prompt_template_file"].get<std::string>());
            std::ifstream tpl(tpl_path, std::ios::binary);
            if (!tpl) throw ValidationError("cannot open prompt template: " + tpl_path);
            remote.prompt_template.assign(std::istreambuf_iterator<char>(tpl),
                                          std::istreambuf_iterator<char>());
        }
        remote.timeout_seconds = ent.value("timeout_seconds", 30);
        remote.max_retries = ent.value("max_retries", 3);
        remote.backoff_initial_ms = ent.value("backoff_initial_ms", 200);
        remote.request_budget = ent.value("request_budget", 1000);
        remote.workers = ent.value("workers", 4);
        remote.replay_log_path = resolve_path(base, ent.value("replay_log", ""));
        if (ent.contains("headers"))
            for (const auto& [k, v] : ent["headers"].items())
                remote.extra_headers[k] = v.get<std::string>();
    } else if (ent_kind == "replay") {
        config.entailment.kind = EntailmentSpec::Kind::Replay;
        config.entailment.replay_log = resolve_path(base, ent.value("log", ""));
        if (config.entailment.replay_log.empty())
            throw ValidationError("config: entailment.provider=replay needs a log path");
        require_file(config.entailment.replay_log, "replay log");
    } else {
        throw ValidationError("config: unknown entailment provider '" + ent_kind + "'");
    }

    const json toggles = doc.value("metrics", json::object());
    config.toggles.mse = toggles.value("mse", true);
    config.toggles.fcas = toggles.value("fcas", true);
    config.toggles.pcs = toggles.value("pcs", true);
    config.toggles.tsv = toggles.value("tsv", true);
    config.toggles.nlics = toggles.value("nlics", true);

    config.polarity.marker_gating = doc.value("marker_gating", false);
    config.polarity.marker_window = doc.value("marker_window", 10);

    config.lexicon_path = resolve_path(base, doc.value("lexicon", ""));
    if (!config.lexicon_path.empty()) require_file(config.lexicon_path, "lexicon");
    config.substitutions_path = resolve_path(base, doc.value("substitutions", ""));
    if (!config.substitutions_path.empty())
        require_file(config.substitutions_path, "substitution table");

    const json training = doc.value("training", json::object());
    const std::string mode = training.value("mode", "per_regime");
    if (mode == "per_regime")
        config.training_mode = TrainingMode::PerRegime;
    else if (mode == "global")
        config.training_mode = TrainingMode::Global;
    else if (mode == "both")
        config.training_mode = TrainingMode::Both;
    else
        throw ValidationError("config: unknown training.mode '" + mode + "'");

    config.seed = doc.value("seed", 42);
    // Inputs resolve against the config file; outputs against the cwd.
    config.output_dir = doc.value("output_dir", "out");

    require_file(config.news_path, "news");
    require_file(config.prices_path, "price");

    config.snapshot = doc;
    return config;
}

json RunManifest::to_json() const {
    json doc;
    doc["version"] = version;
    doc["status"] = status;
    doc["config"] = config_snapshot;
    doc["providers"] = providers;
    doc["counts"] = counts;
    doc["regimes"] = per_regime;
    doc["warnings"] = warnings;
    doc["timing"] = timing;
    return doc;
}

void RunManifest::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write manifest: " + path);
    out << to_json().dump(2) << '\n';
}

PreparedData prepare_data(const RunConfig& config) {
    PreparedData data;
    data.articles =
        ingest_news(config.news_path, config.news_format, config.date_range, &data.rejections);
    for (const auto& rejection : data.rejections.rejections)
        data.warnings.push_back("news row " + std::to_string(rejection.row) + " rejected: " +
                                rejection.reason);
    data.returns = compute_returns(read_price_csv(config.prices_path), &data.warnings);
    AlignmentResult aligned = align(data.articles, data.returns);
    data.samples = std::move(aligned.samples);
    data.excluded_ids = std::move(aligned.excluded_ids);
    if (!data.excluded_ids.empty())
        data.warnings.push_back(std::to_string(data.excluded_ids.size()) +
                                " article(s) had no matching return and were excluded");
    if (data.samples.empty())
        throw ValidationError("no articles could be aligned with returns");
    return data;
}

std::shared_ptr<EmbeddingProvider> make_embedding_provider(const RunConfig& config,
                                                           std::vector<std::string>* warnings) {
    std::shared_ptr<EmbeddingProvider> provider;
    if (config.embedding.kind == EmbeddingSpec::Kind::Hash)
        provider = std::make_shared<HashEmbeddingProvider>(config.embedding.dimension);
    else
        provider = std::make_shared<FileEmbeddingProvider>(config.embedding.path);
    if (!config.embedding.cache_path.empty())
        provider = std::make_shared<CachedEmbeddingProvider>(provider,
                                                             config.embedding.cache_path,
                                                             warnings);
    return provider;
}

std::unique_ptr<EntailmentProvider> make_entailment_provider(const RunConfig& config) {
    switch (config.entailment.kind) {
        case EntailmentSpec::Kind::Stub:
            return std::make_unique<StubEntailmentProvider>(resolve_lexicon(config));
        case EntailmentSpec::Kind::Remote: {
            RemoteEntailmentConfig remote = config.entailment.remote;
            if (remote.replay_log_path.empty())
                remote.replay_log_path =
                    (fs::path(config.output_dir) / "nlics_replay.jsonl").string();
            return std::make_unique<RemoteEntailmentProvider>(std::move(remote));
        }
        case EntailmentSpec::Kind::Replay:
            return std::make_unique<ReplayEntailmentProvider>(config.entailment.replay_log);
    }
    throw ValidationError("unknown entailment provider kind");
}

CausalLexicon resolve_lexicon(const RunConfig& config) {
    if (config.lexicon_path.empty()) return default_causal_lexicon();
    return CausalLexicon::load(config.lexicon_path);
}

SubstitutionTable resolve_substitutions(const RunConfig& config) {
    if (config.substitutions_path.empty()) return default_substitution_table();
    return SubstitutionTable::load(config.substitutions_path);
}

namespace {

struct EvalCell {
    std::string model_id;
    const ModelSpec* spec = nullptr;
    bool global = false;
};

std::vector<EvalCell> plan_cells(const RunConfig& config) {
    std::vector<EvalCell> cells;
    const bool per_regime = config.training_mode != TrainingMode::Global;
    const bool global = config.training_mode != TrainingMode::PerRegime;
    for (const auto& spec : config.models) {
        if (spec.kind == ModelSpec::Kind::External) {
            // External predictions are not retrained; they always score the
            // per-regime test split.
            cells.push_back({spec.name, &spec, false});
            continue;
        }
        if (per_regime) cells.push_back({spec.name, &spec, false});
        if (global) cells.push_back({spec.name + "@global", &spec, true});
    }
    return cells;
}

std::vector<TrainExample> to_examples(std::span<const AlignedSample> samples,
                                      const Vocabulary& vocab, bool with_embeddings,
                                      EmbeddingProvider* embedder) {
    std::vector<TrainExample> examples;
    examples.reserve(samples.size());
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
}

BaselineModel train_cell_model(const EvalCell& cell, std::span<const AlignedSample> train,
                               const Vocabulary& vocab, EmbeddingProvider* embedder,
                               std::uint64_t seed) {
    BaselineConfig train_config = cell.spec->baseline;
    train_config.seed = seed;
    auto examples =
        to_examples(train, vocab, train_config.use_embeddings, embedder);
    return train_baseline(std::move(examples), vocab.size(), train_config, cell.model_id);
}

std::vector<double> predict_all(const BaselineModel& model,
                                std::span<const AlignedSample> samples,
                                const Vocabulary& vocab, EmbeddingProvider* embedder) {
    std::vector<double> preds;
    preds.reserve(samples.size());
    for (const auto& sample : samples) {
        const SparseVector features = transform(sample.article.text, vocab);
        std::optional<Embedding> embedding;
        if (model.uses_embeddings())
            embedding = embedder->embed(sample.article.id, sample.article.text);
        preds.push_back(model.predict(features, embedding));
    }
    return preds;
}

struct StageClock {
    using clock = std::chrono::steady_clock;
    clock::time_point started = clock::now();
    json stage_ms = json::object();

    void record(const std::string& stage) {
        const auto now = clock::now();
        stage_ms[stage] =
            std::chrono::duration_cast<std::chrono::milliseconds>(now - started).count();
        started = now;
    }
};

}  // namespace

RunResult run(const RunConfig& config) {
    RunResult result;
    RunManifest& manifest = result.manifest;
    manifest.config_snapshot = config.snapshot;

    fs::create_directories(config.output_dir);
    const auto out_path = [&](const char* name) {
        return (fs::path(config.output_dir) / name).string();
    };

    StageClock clock;
    std::string stage = "prepare";
    try {
        PreparedData data = prepare_data(config);
        manifest.warnings.insert(manifest.warnings.end(), data.warnings.begin(),
                                 data.warnings.end());
        manifest.counts["articles"] = data.articles.size();
        manifest.counts["rejected_rows"] = data.rejections.rejections.size();
        manifest.counts["aligned_samples"] = data.samples.size();
        manifest.counts["alignment_excluded"] = data.excluded_ids.size();
        if (!data.rejections.rejections.empty()) {
            json rows = json::array();
            for (const auto& r : data.rejections.rejections)
                rows.push_back({{"row", r.row}, {"reason", r.reason}});
            std::ofstream rej(out_path("rejections.json"), std::ios::binary);
            rej << json{{"rejections", rows}}.dump(2) << '\n';
        }
        clock.record(stage);

        stage = "features";
        std::vector<std::string> texts;
        texts.reserve(data.samples.size());
        for (const auto& sample : data.samples) texts.push_back(sample.article.text);
        const Vocabulary vocab = fit_vocabulary(texts, config.max_features);
        manifest.counts["vocabulary_terms"] = vocab.size();

        auto embedder = make_embedding_provider(config, &manifest.warnings);
        auto entailment = make_entailment_provider(config);
        const CausalLexicon lexicon = resolve_lexicon(config);
        const SubstitutionTable substitutions = resolve_substitutions(config);
        manifest.providers["embedding"] = embedder->id();
        manifest.providers["entailment"] = entailment->id();
        clock.record(stage);

        stage = "drift";
        std::vector<std::pair<std::string, std::vector<std::string>>> regime_texts;
        for (const auto& window : config.regimes) {
            std::vector<std::string> slice;
            for (const auto& sample : data.samples) {
                if (assign_regime(sample.article.timestamp.date(), config.regimes) ==
                    window.name)
                    slice.push_back(sample.article.text);
            }
            if (!slice.empty()) regime_texts.emplace_back(window.name, std::move(slice));
        }
        if (regime_texts.size() >= 2) {
            std::vector<std::pair<std::string, TermDistribution>> distributions;
            distributions.reserve(regime_texts.size());
            for (const auto& [name, slice] : regime_texts)
                distributions.emplace_back(name, term_distribution(slice, vocab));
            result.drift = drift_matrix(distributions);
            result.drift->write_csv(out_path("drift_matrix.csv"));
            result.drift->write_json(out_path("drift_matrix.json"));
        } else {
            manifest.warnings.push_back(
                "drift matrix skipped: fewer than 2 regimes with samples");
        }
        clock.record(stage);

        stage = "split";
        struct RegimePlan {
            const RegimeWindow* window;
            std::vector<AlignedSample> slice;
            SplitSet split;
        };
        std::vector<RegimePlan> plans;
        for (const auto& window : config.regimes) {
            RegimePlan plan;
            plan.window = &window;
            for (const auto& sample : data.samples) {
                if (assign_regime(sample.article.timestamp.date(), config.regimes) ==
                    window.name)
                    plan.slice.push_back(sample);
            }
            if (plan.slice.empty()) {
                manifest.warnings.push_back("regime '" + window.name +
                                            "': no samples, skipped");
                continue;
            }
            if (plan.slice.size() < 3) {
                manifest.warnings.push_back("regime '" + window.name +
                                            "': fewer than 3 samples, skipped");
                continue;
            }
            plan.split = chrono_split(plan.slice);
            plan.split.check_chronology();
            json regime_counts;
            regime_counts["slice"] = plan.slice.size();
            regime_counts["train"] = plan.split.train.size();
            regime_counts["validation"] = plan.split.validation.size();
            regime_counts["test"] = plan.split.test.size();
            manifest.per_regime[window.name] = regime_counts;
            plans.push_back(std::move(plan));
        }

        const std::vector<EvalCell> cells = plan_cells(config);
        const bool needs_global =
            std::any_of(cells.begin(), cells.end(), [](const EvalCell& c) { return c.global; });
        SplitSet global_split;
        if (needs_global) {
            global_split = chrono_split(data.samples);
            global_split.check_chronology();
        }

        // Global models see each regime's share of the global test split,
        // keeping train-before-test ordering intact.
        auto global_test_slice = [&](const RegimePlan& plan) {
            std::vector<AlignedSample> slice;
            for (const auto& sample : global_split.test) {
                if (assign_regime(sample.article.timestamp.date(), config.regimes) ==
                    plan.window->name)
                    slice.push_back(sample);
            }
            return slice;
        };

        if (config.entailment.kind == EntailmentSpec::Kind::Remote && config.toggles.nlics) {
            std::size_t required = 0;
            for (const auto& plan : plans) {
                for (const auto& cell : cells)
                    required += cell.global ? global_test_slice(plan).size()
                                            : plan.split.test.size();
            }
            if (required > config.entailment.remote.request_budget)
                throw ValidationError(
                    "run would need " + std::to_string(required) +
                    " entailment requests, exceeding the budget of " +
                    std::to_string(config.entailment.remote.request_budget));
        }
        clock.record(stage);

        stage = "evaluate";
        std::map<std::string, BaselineModel> global_models;
        for (const auto& cell : cells) {
            if (cell.global && cell.spec->kind == ModelSpec::Kind::Baseline)
                global_models.emplace(cell.model_id,
                                      train_cell_model(cell, global_split.train, vocab,
                                                       embedder.get(), config.seed));
        }

        for (const auto& plan : plans) {
            for (const auto& cell : cells) {
                std::vector<AlignedSample> test =
                    cell.global ? global_test_slice(plan) : plan.split.test;
                if (test.empty()) {
                    manifest.warnings.push_back("regime '" + plan.window->name + "', model '" +
                                                cell.model_id + "': empty test set, skipped");
                    continue;
                }

                std::vector<double> preds;
                const Predictor* predictor = nullptr;
                std::optional<BaselineModel> local_model;
                if (cell.spec->kind == ModelSpec::Kind::Baseline) {
                    if (cell.global) {
                        predictor = &global_models.at(cell.model_id);
                        preds = predict_all(global_models.at(cell.model_id), test, vocab,
                                            embedder.get());
                    } else {
                        local_model = train_cell_model(cell, plan.split.train, vocab,
                                                       embedder.get(), config.seed);
                        predictor = &*local_model;
                        preds = predict_all(*local_model, test, vocab, embedder.get());
                    }
                } else {
                    std::vector<std::string> extras;
                    const auto by_id =
                        external_predictions(cell.spec->predictions_path, test, &extras);
                    if (!extras.empty())
                        manifest.warnings.push_back(
                            "model '" + cell.model_id + "', regime '" + plan.window->name +
                            "': ignored " + std::to_string(extras.size()) +
                            " prediction row(s) outside the evaluation set");
                    preds.reserve(test.size());
                    for (const auto& sample : test) preds.push_back(by_id.at(sample.article.id));
                }

                ProfileRequest request;
                request.regime = plan.window->name;
                request.model_id = cell.model_id;
                request.test_samples = test;
                request.predictions = preds;
                request.vocab = &vocab;
                request.lexicon = &lexicon;
                request.polarity_options = config.polarity;
                request.substitutions = &substitutions;
                request.embedder = embedder.get();
                request.entailment = entailment.get();
                request.model = predictor;
                request.toggles = config.toggles;
                result.profiles.push_back(build_profile(request));
            }
        }
        manifest.counts["profiles"] = result.profiles.size();
        clock.record(stage);

        stage = "persist";
        write_profiles_csv(out_path("profiles.csv"), result.profiles);
        write_profiles_json(out_path("profiles.json"), result.profiles);
        clock.record(stage);
    } catch (...) {
        manifest.status = "failed:" + stage;
        manifest.timing["generated_at"] = iso_now();
        manifest.timing["stage_ms"] = clock.stage_ms;
        manifest.save(out_path("manifest.json"));
        throw;
    }

    manifest.timing["generated_at"] = iso_now();
    manifest.timing["stage_ms"] = clock.stage_ms;
    manifest.save(out_path("manifest.json"));
    return result;
}

// ------------------------------------------------------------- controls

void ControlReport::write_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write file: " + path);
    out << "event_tag,scope,regimes,cohort_size,pcs,pcs_abs,tsv\n";
    for (const auto& row : rows) {
        const std::string fields[] = {row.event_tag,
                                      row.scope,
                                      row.regimes,
                                      std::to_string(row.cohort_size),
                                      format_metric(row.pcs),
                                      format_metric(row.pcs_abs),
                                      format_metric(row.tsv)};
        write_csv_row(out, fields);
    }
}

void ControlReport::write_json(const std::string& path) const {
    json list = json::array();
    for (const auto& row : rows) {
        json obj;
        obj["event_tag"] = row.event_tag;
        obj["scope"] = row.scope;
        obj["regimes"] = row.regimes;
        obj["cohort_size"] = row.cohort_size;
        obj["pcs"] = row.pcs.value ? json(*row.pcs.value) : json("N/A");
        obj["pcs_abs"] = row.pcs_abs.value ? json(*row.pcs_abs.value) : json("N/A");
        obj["tsv"] = row.tsv.value ? json(*row.tsv.value) : json("N/A");
        list.push_back(obj);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write file: " + path);
    out << json{{"model", model_id}, {"rows", list}, {"warnings", warnings}}.dump(2) << '\n';
}

ControlReport control_study(const RunConfig& config) {
    ControlReport report;
    PreparedData data = prepare_data(config);
    report.warnings = data.warnings;

    const ModelSpec* baseline_spec = nullptr;
    for (const auto& spec : config.models) {
        if (spec.kind == ModelSpec::Kind::Baseline) {
            baseline_spec = &spec;
            break;
        }
    }
    if (!baseline_spec)
        throw ValidationError("control study requires at least one baseline model");

    std::vector<std::string> texts;
    for (const auto& sample : data.samples) texts.push_back(sample.article.text);
    const Vocabulary vocab = fit_vocabulary(texts, config.max_features);
    auto embedder = make_embedding_provider(config, &report.warnings);
    const SubstitutionTable substitutions = resolve_substitutions(config);

    SplitSet global_split = chrono_split(data.samples);
    global_split.check_chronology();
    EvalCell cell{baseline_spec->name, baseline_spec, true};
    const BaselineModel model =
        train_cell_model(cell, global_split.train, vocab, embedder.get(), config.seed);
    report.model_id = model.id();

    // Cohorts keyed by (event tag, regime); only tagged samples count.
    std::map<std::pair<std::string, std::string>, std::vector<AlignedSample>> cohorts;
    for (const auto& sample : data.samples) {
        if (sample.article.event_tag.empty()) continue;
        auto regime = assign_regime(sample.article.timestamp.date(), config.regimes);
        if (!regime) continue;
        cohorts[{sample.article.event_tag, *regime}].push_back(sample);
    }
    if (cohorts.empty())
        throw ValidationError("control study: no event-tagged samples inside regime windows");

    std::set<std::string> tags;
    for (const auto& [key, cohort] : cohorts) tags.insert(key.first);

    auto eligible = [&](const std::string& tag, const std::string& regime)
        -> const std::vector<AlignedSample>* {
        auto it = cohorts.find({tag, regime});
        if (it == cohorts.end()) return nullptr;
        if (it->second.size() < 2) {
            report.warnings.push_back("cohort (" + tag + ", " + regime +
                                      ") has fewer than 2 samples, excluded");
            return nullptr;
        }
        return &it->second;
    };

    for (const auto& tag : tags) {
        std::vector<std::pair<std::string, const std::vector<AlignedSample>*>> present;
        for (const auto& window : config.regimes) {
            const auto* cohort = eligible(tag, window.name);
            if (!cohort) {
                if (!cohorts.count({tag, window.name}))
                    report.warnings.push_back("cohort (" + tag + ", " + window.name +
                                              ") missing");
                continue;
            }
            present.emplace_back(window.name, cohort);

            ControlRow row;
            row.event_tag = tag;
            row.scope = "within";
            row.regimes = window.name;
            row.cohort_size = cohort->size();
            const PcsScore pcs =
                pcs_score(model, *cohort, substitutions, vocab, embedder.get());
            row.pcs = pcs.signed_mean;
            row.pcs_abs = pcs.abs_mean;
            row.tsv = tsv_score(*cohort, *embedder);
            report.rows.push_back(std::move(row));
        }

        for (std::size_t i = 0; i < present.size(); ++i) {
            for (std::size_t j = i + 1; j < present.size(); ++j) {
                std::vector<AlignedSample> merged = *present[i].second;
                merged.insert(merged.end(), present[j].second->begin(),
                              present[j].second->end());
                ControlRow row;
                row.event_tag = tag;
                row.scope = "cross";
                row.regimes = present[i].first + "|" + present[j].first;
                row.cohort_size = merged.size();
                const PcsScore pcs =
                    pcs_score(model, merged, substitutions, vocab, embedder.get());
                row.pcs = pcs.signed_mean;
                row.pcs_abs = pcs.abs_mean;
                row.tsv = tsv_score(merged, *embedder);
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

// --------------------------------------------------------- cross-sector

void CrossSectorReport::write_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write file: " + path);
    out << "model,train_sector,test_sector,text_only_mse,feature_based_mse\n";
    for (const auto& row : rows) {
        const std::string fields[] = {row.model, train_sector, test_sector,
                                      format_double(row.text_only_mse),
                                      format_double(row.feature_based_mse)};
        write_csv_row(out, fields);
    }
}

void CrossSectorReport::write_json(const std::string& path) const {
    json list = json::array();
    for (const auto& row : rows) {
        list.push_back({{"model", row.model},
                        {"text_only_mse", row.text_only_mse},
                        {"feature_based_mse", row.feature_based_mse}});
    }
    json doc;
    doc["train_sector"] = train_sector;
    doc["test_sector"] = test_sector;
    doc["train_size"] = train_size;
    doc["test_size"] = test_size;
    doc["rows"] = list;
    doc["warnings"] = warnings;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write file: " + path);
    out << doc.dump(2) << '\n';
}

CrossSectorReport cross_sector(const RunConfig& config, const std::string& train_sector,
                               const std::string& test_sector) {
    CrossSectorReport report;
    report.train_sector = train_sector;
    report.test_sector = test_sector;

    PreparedData data = prepare_data(config);
    report.warnings = data.warnings;

    std::vector<AlignedSample> train_slice;
    std::vector<AlignedSample> test_slice;
    for (const auto& sample : data.samples) {
        if (sample.article.sector == train_sector) train_slice.push_back(sample);
        if (sample.article.sector == test_sector) test_slice.push_back(sample);
    }
    if (train_slice.empty())
        throw ValidationError("cross-sector: no samples for train sector '" + train_sector +
                              "'");
    if (test_slice.empty())
        throw ValidationError("cross-sector: no samples for test sector '" + test_sector +
                              "'");
    report.train_size = train_slice.size();
    report.test_size = test_slice.size();

    std::vector<std::string> train_texts;
    for (const auto& sample : train_slice) train_texts.push_back(sample.article.text);
    const Vocabulary vocab = fit_vocabulary(train_texts, config.max_features);
    auto embedder = make_embedding_provider(config, &report.warnings);

    std::vector<double> targets;
    for (const auto& sample : test_slice) targets.push_back(sample.next_day_return);

    for (const auto& spec : config.models) {
        if (spec.kind != ModelSpec::Kind::Baseline) {
            report.warnings.push_back("model '" + spec.name +
                                      "' is external and cannot be retrained, skipped");
            continue;
        }
        CrossSectorRow row;
        row.model = spec.name;
        for (const bool with_embeddings : {false, true}) {
            BaselineConfig train_config = spec.baseline;
            train_config.seed = config.seed;
            train_config.use_embeddings = with_embeddings;
            auto examples =
                to_examples(train_slice, vocab, with_embeddings, embedder.get());
            const BaselineModel model = train_baseline(
                std::move(examples), vocab.size(), train_config,
                spec.name + (with_embeddings ? "+features" : "+text"));
            std::vector<double> preds = predict_all(model, test_slice, vocab, embedder.get());
            const double error = mse(preds, targets);
            if (with_embeddings)
                row.feature_based_mse = error;
            else
                row.text_only_mse = error;
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace regimeval
