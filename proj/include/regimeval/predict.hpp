#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regimeval/corpus.hpp"
#include "regimeval/embed.hpp"
#include "regimeval/textfeat.hpp"

namespace regimeval {

// Return predictor contract: percent next-day return from TF-IDF features
// plus an optional dense embedding. Deterministic at inference time.
class Predictor {
  public:
    virtual ~Predictor() = default;
    virtual double predict(const SparseVector& features,
                           const std::optional<Embedding>& embedding) const = 0;
    virtual std::string id() const = 0;
    virtual bool uses_embeddings() const = 0;
};

struct BaselineConfig {
    double learning_rate = 0.001;
    std::size_t batch_size = 64;
    std::size_t epochs = 200;
    double ridge_lambda = 1e-3;
    std::uint64_t seed = 42;
    double init_scale = 0.01;
    bool use_embeddings = false;
};

struct TrainExample {
    std::string id;
    SparseVector features;
    std::optional<Embedding> embedding;
    double target = 0.0;
};

// Linear ridge regressor over [tf-idf || embedding]. Weights for the sparse
// block come first, then the dense block, then the bias.
class BaselineModel final : public Predictor {
  public:
    BaselineModel() = default;
    BaselineModel(std::string name, std::size_t feature_dim, std::size_t embedding_dim);

    double predict(const SparseVector& features,
                   const std::optional<Embedding>& embedding) const override;
    std::string id() const override { return name_; }
    bool uses_embeddings() const override { return embedding_dim_ > 0; }

    std::size_t feature_dim() const { return feature_dim_; }
    std::size_t embedding_dim() const { return embedding_dim_; }
    std::span<const double> weights() const { return weights_; }
    double bias() const { return bias_; }

    void save(const std::string& path) const;
    static BaselineModel load(const std::string& path);

    friend BaselineModel train_baseline(std::vector<TrainExample>, std::size_t,
                                        const BaselineConfig&, const std::string&,
                                        struct TrainReport*);

  private:
    std::string name_;
    std::size_t feature_dim_ = 0;
    std::size_t embedding_dim_ = 0;
    std::vector<double> weights_;  // size feature_dim_ + embedding_dim_
    double bias_ = 0.0;
};

struct TrainReport {
    std::vector<double> epoch_loss;  // full-dataset ridge objective per epoch
};

// Ridge objective over a set of examples:
//   (1/N) sum (pred - y)^2 + lambda * ||w||^2   (bias unregularized)
double ridge_objective(std::span<const TrainExample> examples, std::span<const double> weights,
                       double bias, double lambda, std::size_t feature_dim);

// Analytic gradient of ridge_objective; grad_w must have weight size.
void ridge_gradient(std::span<const TrainExample> examples, std::span<const double> weights,
                    double bias, double lambda, std::size_t feature_dim,
                    std::span<double> grad_w, double* grad_b);

// Mini-batch gradient descent with a fixed batch partition (examples
// ordered by id, then chunked), so training is deterministic given the
// seed. Throws RuntimeFailure on a non-finite loss, naming the batch.
BaselineModel train_baseline(std::vector<TrainExample> examples, std::size_t feature_dim,
                             const BaselineConfig& config, const std::string& name,
                             TrainReport* report = nullptr);

double mse(std::span<const double> predictions, std::span<const double> targets);

// Reads the sample_id,prediction exchange CSV for an evaluation set. Every
// eval-set id must appear exactly once; ids not in the eval set are skipped
// and reported through `extras`.
std::map<std::string, double> external_predictions(const std::string& path,
                                                   std::span<const AlignedSample> eval_set,
                                                   std::vector<std::string>* extras = nullptr);

void write_predictions_csv(const std::string& path,
                           const std::vector<std::pair<std::string, double>>& rows);

}  // namespace regimeval
