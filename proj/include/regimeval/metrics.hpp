#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regimeval/causal.hpp"
#include "regimeval/corpus.hpp"
#include "regimeval/embed.hpp"
#include "regimeval/entail.hpp"
#include "regimeval/perturb.hpp"
#include "regimeval/predict.hpp"
#include "regimeval/textfeat.hpp"

namespace regimeval {

// A metric value with an auditable denominator. `value` is empty (N/A)
// when the metric was toggled off or no sample was eligible.
struct MetricValue {
    std::optional<double> value;
    std::size_t eligible = 0;  // samples that entered the mean
    std::size_t excluded = 0;  // ineligible or unevaluated samples

    bool is_na() const { return !value.has_value(); }
};

struct MetricToggles {
    bool mse = true;
    bool fcas = true;
    bool pcs = true;
    bool tsv = true;
    bool nlics = true;
};

// Fraction of nonzero-polarity samples whose prediction sign matches the
// cue polarity; sign(0) matches nothing.
MetricValue fcas_score(std::span<const double> predictions,
                       std::span<const CausalPolarity> polarities);

struct PcsScore {
    MetricValue signed_mean;
    MetricValue abs_mean;
};

// Mean f(x) - f(x~) and mean |f(x) - f(x~)| over samples with at least one
// substitution applied. Perturbed text is re-featurized, and re-embedded
// when the model consumes embeddings.
PcsScore pcs_score(const Predictor& model, std::span<const AlignedSample> samples,
                   const SubstitutionTable& table, const Vocabulary& vocab,
                   EmbeddingProvider* embedder);

// Mean L2 distance between consecutive embeddings (already ordered).
MetricValue tsv_from_embeddings(const std::vector<std::vector<double>>& ordered);

// Orders samples by (timestamp, id), embeds each, then applies the mean
// consecutive distance. N/A below 2 samples.
MetricValue tsv_score(std::span<const AlignedSample> samples, EmbeddingProvider& embedder);

// Mean entailment score of (article text, hypothesis(prediction)); samples
// the provider could not evaluate are excluded and counted.
MetricValue nlics_score(std::span<const AlignedSample> samples,
                        std::span<const double> predictions, EntailmentProvider& provider);

struct RobustnessProfile {
    std::string regime;
    std::string model_id;
    std::size_t sample_count = 0;
    MetricValue mse;
    MetricValue fcas;
    MetricValue pcs;      // signed, Eq-faithful
    MetricValue pcs_abs;  // magnitude supplement
    MetricValue tsv;
    MetricValue nlics;
};

// Everything needed to assemble one regime x model profile. `model` may be
// null (externally supplied predictions); PCS is then N/A with zero
// eligible samples.
struct ProfileRequest {
    std::string regime;
    std::string model_id;
    std::span<const AlignedSample> test_samples;
    std::span<const double> predictions;  // one per test sample
    const Vocabulary* vocab = nullptr;
    const CausalLexicon* lexicon = nullptr;
    PolarityOptions polarity_options;
    const SubstitutionTable* substitutions = nullptr;
    EmbeddingProvider* embedder = nullptr;
    EntailmentProvider* entailment = nullptr;
    const Predictor* model = nullptr;
    MetricToggles toggles;
};

// Disabled metrics are skipped entirely, not just hidden.
RobustnessProfile build_profile(const ProfileRequest& request);

}  // namespace regimeval
