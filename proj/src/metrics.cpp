#include "regimeval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "regimeval/common.hpp"

namespace regimeval {

namespace {

int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

std::vector<const AlignedSample*> ordered_by_time(std::span<const AlignedSample> samples) {
    std::vector<const AlignedSample*> ordered;
    ordered.reserve(samples.size());
    for (const auto& s : samples) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const AlignedSample* a, const AlignedSample* b) {
                  if (a->article.timestamp != b->article.timestamp)
                      return a->article.timestamp < b->article.timestamp;
                  return a->article.id < b->article.id;
              });
    return ordered;
}

}  // namespace

MetricValue fcas_score(std::span<const double> predictions,
                       std::span<const CausalPolarity> polarities) {
    if (predictions.size() != polarities.size())
        throw ValidationError("fcas: length mismatch (" + std::to_string(predictions.size()) +
                              " vs " + std::to_string(polarities.size()) + ")");
    MetricValue result;
    std::size_t matches = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (polarities[i].value == 0) {
            ++result.excluded;
            continue;
        }
        ++result.eligible;
        if (sign_of(predictions[i]) == polarities[i].value) ++matches;
    }
    if (result.eligible > 0)
        result.value = static_cast<double>(matches) / static_cast<double>(result.eligible);
    return result;
}

PcsScore pcs_score(const Predictor& model, std::span<const AlignedSample> samples,
                   const SubstitutionTable& table, const Vocabulary& vocab,
                   EmbeddingProvider* embedder) {
    PcsScore score;
    double signed_sum = 0.0;
    double abs_sum = 0.0;
    std::size_t eligible = 0;
    std::size_t excluded = 0;
    const bool needs_embedding = model.uses_embeddings();
    if (needs_embedding && !embedder)
        throw ValidationError("pcs: model '" + model.id() +
                              "' consumes embeddings but no provider was given");

    for (const auto& sample : samples) {
        const PerturbationResult perturbed = perturb(sample.article.text, table);
        if (perturbed.substitutions_applied == 0) {
            ++excluded;
            continue;
        }
        const SparseVector fx = transform(sample.article.text, vocab);
        const SparseVector fx_tilde = transform(perturbed.text, vocab);
        std::optional<Embedding> ex;
        std::optional<Embedding> ex_tilde;
        if (needs_embedding) {
            ex = embedder->embed(sample.article.id, sample.article.text);
            ex_tilde = embedder->embed(sample.article.id + "~pert", perturbed.text);
        }
        const double diff = model.predict(fx, ex) - model.predict(fx_tilde, ex_tilde);
        signed_sum += diff;
        abs_sum += std::abs(diff);
        ++eligible;
    }

    score.signed_mean.eligible = score.abs_mean.eligible = eligible;
    score.signed_mean.excluded = score.abs_mean.excluded = excluded;
    if (eligible > 0) {
        score.signed_mean.value = signed_sum / static_cast<double>(eligible);
        score.abs_mean.value = abs_sum / static_cast<double>(eligible);
    }
    return score;
}

MetricValue tsv_from_embeddings(const std::vector<std::vector<double>>& ordered) {
    MetricValue result;
    if (ordered.size() < 2) {
        result.excluded = ordered.size();
        return result;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < ordered.size(); ++i)
        sum += l2_distance(ordered[i + 1], ordered[i]);
    result.eligible = ordered.size();
    result.value = sum / static_cast<double>(ordered.size() - 1);
    return result;
}

MetricValue tsv_score(std::span<const AlignedSample> samples, EmbeddingProvider& embedder) {
    const auto ordered = ordered_by_time(samples);
    std::vector<std::vector<double>> embeddings;
    embeddings.reserve(ordered.size());
    for (const AlignedSample* s : ordered)
        embeddings.push_back(embedder.embed(s->article.id, s->article.text).values);
    return tsv_from_embeddings(embeddings);
}

MetricValue nlics_score(std::span<const AlignedSample> samples,
                        std::span<const double> predictions, EntailmentProvider& provider) {
    if (samples.size() != predictions.size())
        throw ValidationError("nlics: length mismatch (" + std::to_string(samples.size()) +
                              " vs " + std::to_string(predictions.size()) + ")");
    MetricValue result;
    double sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::string hypothesis = build_hypothesis(predictions[i]);
        const auto verdict = provider.entail(samples[i].article.text, hypothesis);
        if (!verdict) {
            ++result.excluded;
            continue;
        }
        sum += verdict_to_score(*verdict);
        ++result.eligible;
    }
    if (result.eligible > 0) result.value = sum / static_cast<double>(result.eligible);
    return result;
}

RobustnessProfile build_profile(const ProfileRequest& request) {
    if (request.test_samples.empty())
        throw ValidationError("profile: empty test set for regime '" + request.regime + "'");
    if (request.predictions.size() != request.test_samples.size())
        throw ValidationError("profile: prediction count does not match test set");

    RobustnessProfile profile;
    profile.regime = request.regime;
    profile.model_id = request.model_id;
    profile.sample_count = request.test_samples.size();

    const std::size_t n = request.test_samples.size();

    if (request.toggles.mse) {
        std::vector<double> targets;
        targets.reserve(n);
        for (const auto& s : request.test_samples) targets.push_back(s.next_day_return);
        profile.mse.value = mse(request.predictions, targets);
        profile.mse.eligible = n;
    }

    if (request.toggles.fcas) {
        if (!request.lexicon) throw ValidationError("profile: FCAS enabled without a lexicon");
        std::vector<CausalPolarity> polarities;
        polarities.reserve(n);
        for (const auto& s : request.test_samples)
            polarities.push_back(
                extract_polarity(s.article.text, *request.lexicon, request.polarity_options));
        profile.fcas = fcas_score(request.predictions, polarities);
    }

    if (request.toggles.pcs) {
        if (!request.substitutions || !request.vocab)
            throw ValidationError("profile: PCS enabled without substitutions/vocabulary");
        if (request.model) {
            const PcsScore score =
                pcs_score(*request.model, request.test_samples, *request.substitutions,
                          *request.vocab, request.embedder);
            profile.pcs = score.signed_mean;
            profile.pcs_abs = score.abs_mean;
        } else {
            // External predictions cannot be re-run on perturbed text.
            profile.pcs.excluded = n;
            profile.pcs_abs.excluded = n;
        }
    }

    if (request.toggles.tsv) {
        if (!request.embedder) throw ValidationError("profile: TSV enabled without embedder");
        profile.tsv = tsv_score(request.test_samples, *request.embedder);
    }

    if (request.toggles.nlics) {
        if (!request.entailment)
            throw ValidationError("profile: NLICS enabled without an entailment provider");
        profile.nlics =
            nlics_score(request.test_samples, request.predictions, *request.entailment);
    }

    return profile;
}

}  // namespace regimeval
