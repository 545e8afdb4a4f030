#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regimeval/causal.hpp"
#include "regimeval/common.hpp"
#include "regimeval/corpus.hpp"
#include "regimeval/drift.hpp"
#include "regimeval/embed.hpp"
#include "regimeval/entail.hpp"
#include "regimeval/metrics.hpp"
#include "regimeval/perturb.hpp"
#include "regimeval/predict.hpp"

namespace regimeval {

struct EmbeddingSpec {
    enum class Kind { Hash, File };
    Kind kind = Kind::Hash;
    std::size_t dimension = 256;
    std::string path;        // Kind::File
    std::string cache_path;  // optional on-disk cache
};

struct EntailmentSpec {
    enum class Kind { Stub, Remote, Replay };
    Kind kind = Kind::Stub;
    RemoteEntailmentConfig remote;
    std::string replay_log;  // Kind::Replay
};

struct ModelSpec {
    enum class Kind { Baseline, External };
    Kind kind = Kind::Baseline;
    std::string name;
    BaselineConfig baseline;
    std::string predictions_path;  // Kind::External
};

// Per-regime training follows the evaluation pipeline's loop structure;
// global mode trains once on the full chronological train split and scores
// each regime's share of the global test split. Both modes may run side by
// side under distinct model ids ("<name>@global").
enum class TrainingMode { PerRegime, Global, Both };

struct RunConfig {
    std::string news_path;
    NewsFormat news_format = NewsFormat::Csv;
    std::string prices_path;
    DateRange date_range;
    std::vector<RegimeWindow> regimes;
    std::size_t max_features = 2000;
    std::vector<ModelSpec> models;
    EmbeddingSpec embedding;
    EntailmentSpec entailment;
    MetricToggles toggles;
    PolarityOptions polarity;
    std::string lexicon_path;        // empty = built-in default
    std::string substitutions_path;  // empty = built-in default
    TrainingMode training_mode = TrainingMode::PerRegime;
    std::uint64_t seed = 42;
    std::string output_dir = "out";
    nlohmann::json snapshot;  // resolved config recorded in the manifest
};

// Reads the JSON run configuration; relative paths resolve against the
// config file's directory. Validates regimes, models and file existence.
RunConfig load_run_config(const std::string& path);

// Emitted for every run, success or failure. All wall-clock data lives in
// the single "timing" field so reruns stay byte-comparable.
struct RunManifest {
    std::string version = kVersion;
    std::string status = "ok";  // or "failed:<stage>"
    nlohmann::json config_snapshot;
    std::map<std::string, std::string> providers;
    std::map<std::string, std::size_t> counts;
    nlohmann::json per_regime = nlohmann::json::object();
    std::vector<std::string> warnings;
    nlohmann::json timing = nlohmann::json::object();

    nlohmann::json to_json() const;
    void save(const std::string& path) const;
};

struct RunResult {
    std::vector<RobustnessProfile> profiles;
    std::optional<DriftMatrix> drift;
    RunManifest manifest;
};

// Shared preprocessing: ingest news and prices, compute returns, align.
struct PreparedData {
    std::vector<Article> articles;
    RejectionReport rejections;
    ReturnTable returns;
    std::vector<AlignedSample> samples;
    std::vector<std::string> excluded_ids;
    std::vector<std::string> warnings;
};

PreparedData prepare_data(const RunConfig& config);

std::shared_ptr<EmbeddingProvider> make_embedding_provider(
    const RunConfig& config, std::vector<std::string>* warnings = nullptr);
std::unique_ptr<EntailmentProvider> make_entailment_provider(const RunConfig& config);
CausalLexicon resolve_lexicon(const RunConfig& config);
SubstitutionTable resolve_substitutions(const RunConfig& config);

// Runs the regime-aware evaluation loop end to end and persists profiles,
// the drift matrix and the manifest under config.output_dir.
RunResult run(const RunConfig& config);

// ------------------------------------------------------------- controls

struct ControlRow {
    std::string event_tag;
    std::string scope;    // "within" or "cross"
    std::string regimes;  // "covid" or "pre-covid|covid"
    std::size_t cohort_size = 0;
    MetricValue pcs;
    MetricValue pcs_abs;
    MetricValue tsv;
};

struct ControlReport {
    std::string model_id;
    std::vector<ControlRow> rows;
    std::vector<std::string> warnings;

    void write_csv(const std::string& path) const;
    void write_json(const std::string& path) const;
};

// Within-regime and cross-regime matched-event cohorts (PCS + TSV per
// cohort). Uses the first configured baseline model, trained on the global
// chronological train split. Cohorts below 2 samples are excluded with a
// warning.
ControlReport control_study(const RunConfig& config);

// --------------------------------------------------------- cross-sector

struct CrossSectorRow {
    std::string model;
    double text_only_mse = 0.0;
    double feature_based_mse = 0.0;
};

struct CrossSectorReport {
    std::string train_sector;
    std::string test_sector;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::vector<CrossSectorRow> rows;
    std::vector<std::string> warnings;

    void write_csv(const std::string& path) const;
    void write_json(const std::string& path) const;
};

// Trains each configured baseline on every sample of train_sector and
// reports MSE on test_sector, text-only and feature-enhanced variants
// separately. The vocabulary is fitted on the training sector.
CrossSectorReport cross_sector(const RunConfig& config, const std::string& train_sector,
                               const std::string& test_sector);

}  // namespace regimeval
