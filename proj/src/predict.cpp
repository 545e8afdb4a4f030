#include "regimeval/predict.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "regimeval/common.hpp"
#include "regimeval/csv.hpp"

namespace regimeval {

using nlohmann::json;

BaselineModel::BaselineModel(std::string name, std::size_t feature_dim,
                             std::size_t embedding_dim)
    : name_(std::move(name)),
      feature_dim_(feature_dim),
      embedding_dim_(embedding_dim),
      weights_(feature_dim + embedding_dim, 0.0) {}

double BaselineModel::predict(const SparseVector& features,
                              const std::optional<Embedding>& embedding) const {
    double sum = bias_;
    for (std::size_t k = 0; k < features.indices.size(); ++k) {
        const std::size_t idx = features.indices[k];
        if (idx >= feature_dim_)
            throw ValidationError("feature index " + std::to_string(idx) +
                                  " out of range for model '" + name_ + "'");
        sum += features.values[k] * weights_[idx];
    }
    if (embedding_dim_ > 0) {
        if (!embedding)
            throw ValidationError("model '" + name_ + "' requires an embedding");
        if (embedding->values.size() != embedding_dim_)
            throw ValidationError("embedding dimension mismatch for model '" + name_ + "'");
        for (std::size_t j = 0; j < embedding_dim_; ++j)
            sum += embedding->values[j] * weights_[feature_dim_ + j];
    }
    return sum;
}

void BaselineModel::save(const std::string& path) const {
    json doc;
    doc["name"] = name_;
    doc["feature_dim"] = feature_dim_;
    doc["embedding_dim"] = embedding_dim_;
    doc["weights"] = weights_;
    doc["bias"] = bias_;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write model file: " + path);
    out << doc.dump(2) << '\n';
}

BaselineModel BaselineModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw ValidationError("model file " + path + ": invalid JSON");
    BaselineModel model(doc.value("name", std::string("baseline")),
                        doc.at("feature_dim").get<std::size_t>(),
                        doc.at("embedding_dim").get<std::size_t>());
    model.weights_ = doc.at("weights").get<std::vector<double>>();
    model.bias_ = doc.at("bias").get<double>();
    if (model.weights_.size() != model.feature_dim_ + model.embedding_dim_)
        throw ValidationError("model file " + path + ": weight length mismatch");
    return model;
}

namespace {

double predict_raw(const TrainExample& example, std::span<const double> weights, double bias,
                   std::size_t feature_dim) {
    double sum = bias;
    for (std::size_t k = 0; k < example.features.indices.size(); ++k)
        sum += example.features.values[k] * weights[example.features.indices[k]];
    if (example.embedding) {
        const auto& emb = example.embedding->values;
        for (std::size_t j = 0; j < emb.size(); ++j) sum += emb[j] * weights[feature_dim + j];
    }
    return sum;
}

}  // namespace

double ridge_objective(std::span<const TrainExample> examples, std::span<const double> weights,
                       double bias, double lambda, std::size_t feature_dim) {
    if (examples.empty()) throw ValidationError("ridge_objective: empty example set");
    double loss = 0.0;
    for (const auto& example : examples) {
        const double r = predict_raw(example, weights, bias, feature_dim) - example.target;
        loss += r * r;
    }
    loss /= static_cast<double>(examples.size());
    double reg = 0.0;
    for (double w : weights) reg += w * w;
    return loss + lambda * reg;
}

void ridge_gradient(std::span<const TrainExample> examples, std::span<const double> weights,
                    double bias, double lambda, std::size_t feature_dim,
                    std::span<double> grad_w, double* grad_b) {
    if (examples.empty()) throw ValidationError("ridge_gradient: empty example set");
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    double gb = 0.0;
    const double scale = 2.0 / static_cast<double>(examples.size());
    for (const auto& example : examples) {
        const double r = predict_raw(example, weights, bias, feature_dim) - example.target;
        for (std::size_t k = 0; k < example.features.indices.size(); ++k)
            grad_w[example.features.indices[k]] += scale * r * example.features.values[k];
        if (example.embedding) {
            const auto& emb = example.embedding->values;
            for (std::size_t j = 0; j < emb.size(); ++j)
                grad_w[feature_dim + j] += scale * r * emb[j];
        }
        gb += scale * r;
    }
    for (std::size_t i = 0; i < grad_w.size(); ++i) grad_w[i] += 2.0 * lambda * weights[i];
    *grad_b = gb;
}

BaselineModel train_baseline(std::vector<TrainExample> examples, std::size_t feature_dim,
                             const BaselineConfig& config, const std::string& name,
                             TrainReport* report) {
    if (examples.empty()) throw ValidationError("train_baseline: empty training set");
    if (config.batch_size == 0) throw ValidationError("train_baseline: batch_size must be > 0");

    std::size_t embedding_dim = 0;
    if (config.use_embeddings) {
        if (!examples.front().embedding)
            throw ValidationError("train_baseline: embeddings requested but missing");
        embedding_dim = examples.front().embedding->values.size();
    }
    for (const auto& example : examples) {
        for (std::size_t idx : example.features.indices) {
            if (idx >= feature_dim)
                throw ValidationError("train_baseline: feature index " + std::to_string(idx) +
                                      " exceeds dimension " + std::to_string(feature_dim));
        }
        const std::size_t have = example.embedding ? example.embedding->values.size() : 0;
        if (config.use_embeddings && have != embedding_dim)
            throw ValidationError("train_baseline: inconsistent embedding dimension for '" +
                                  example.id + "'");
    }
    if (!config.use_embeddings)
        for (auto& example : examples) example.embedding.reset();

    // Fixed batch partition: order by id, then chunk.
    std::sort(examples.begin(), examples.end(),
              [](const TrainExample& a, const TrainExample& b) { return a.id < b.id; });

    BaselineModel model(name, feature_dim, embedding_dim);
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> init(0.0, 1.0);
    for (double& w : model.weights_) w = config.init_scale * init(rng);
    model.bias_ = 0.0;

    std::vector<double> grad(model.weights_.size(), 0.0);
    const std::span<const TrainExample> all(examples);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t start = 0, batch_index = 0; start < examples.size();
             start += config.batch_size, ++batch_index) {
            const std::size_t count = std::min(config.batch_size, examples.size() - start);
            const auto batch = all.subspan(start, count);
            double grad_b = 0.0;
            ridge_gradient(batch, model.weights_, model.bias_, config.ridge_lambda,
                           feature_dim, grad, &grad_b);
            for (std::size_t i = 0; i < grad.size(); ++i)
                model.weights_[i] -= config.learning_rate * grad[i];
            model.bias_ -= config.learning_rate * grad_b;

            const double batch_loss = ridge_objective(batch, model.weights_, model.bias_,
                                                      config.ridge_lambda, feature_dim);
            if (!std::isfinite(batch_loss))
                throw RuntimeFailure("train_baseline: non-finite loss at epoch " +
                                     std::to_string(epoch) + ", batch " +
                                     std::to_string(batch_index));
        }
        if (report)
            report->epoch_loss.push_back(ridge_objective(all, model.weights_, model.bias_,
                                                         config.ridge_lambda, feature_dim));
    }
    return model;
}

double mse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size())
        throw ValidationError("mse: length mismatch (" + std::to_string(predictions.size()) +
                              " vs " + std::to_string(targets.size()) + ")");
    if (predictions.empty()) throw ValidationError("mse: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - targets[i];
        sum += d * d;
    }
    return sum / static_cast<double>(predictions.size());
}

std::map<std::string, double> external_predictions(const std::string& path,
                                                   std::span<const AlignedSample> eval_set,
                                                   std::vector<std::string>* extras) {
    CsvTable table = read_csv_file(path);
    const int id_col = table.column("sample_id");
    const int pred_col = table.column("prediction");
    if (id_col < 0 || pred_col < 0)
        throw ValidationError("prediction file " + path +
                              ": expected columns sample_id,prediction");

    std::set<std::string> wanted;
    for (const auto& sample : eval_set) wanted.insert(sample.article.id);

    std::map<std::string, double> predictions;
    for (const auto& row : table.rows) {
        if (row.fields.size() < 2)
            throw ValidationError(path + ":" + std::to_string(row.line) +
                                  ": wrong number of columns");
        const std::string& id = row.fields[id_col];
        auto value = parse_double(row.fields[pred_col]);
        if (!value)
            throw ValidationError(path + ":" + std::to_string(row.line) +
                                  ": non-numeric prediction '" + row.fields[pred_col] +
                                  "' for id '" + id + "'");
        if (!wanted.count(id)) {
            if (extras) extras->push_back(id);
            continue;
        }
        if (!predictions.emplace(id, *value).second)
            throw ValidationError("prediction file " + path + ": duplicate id '" + id + "'");
    }

    std::vector<std::string> missing;
    for (const auto& id : wanted)
        if (!predictions.count(id)) missing.push_back(id);
    if (!missing.empty()) {
        std::ostringstream msg;
        msg << "prediction file " << path << ": missing " << missing.size() << " id(s):";
        const std::size_t show = std::min<std::size_t>(missing.size(), 20);
        for (std::size_t i = 0; i < show; ++i) msg << ' ' << missing[i];
        if (missing.size() > show) msg << " (and " << missing.size() - show << " more)";
        throw ValidationError(msg.str());
    }
    return predictions;
}

void write_predictions_csv(const std::string& path,
                           const std::vector<std::pair<std::string, double>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write file: " + path);
    out << "sample_id,prediction\n";
    for (const auto& [id, value] : rows) {
        const std::string fields[] = {id, format_double(value)};
        write_csv_row(out, fields);
    }
}

}  // namespace regimeval
