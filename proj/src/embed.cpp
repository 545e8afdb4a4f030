#include "regimeval/embed.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "regimeval/common.hpp"
#include "regimeval/textfeat.hpp"

namespace regimeval {

using nlohmann::json;

namespace {

std::string vector_digest(const std::vector<double>& values) {
    std::string buf;
    buf.reserve(values.size() * 20);
    for (double v : values) {
        buf += format_double(v);
        buf.push_back(',');
    }
    return to_hex(fnv1a64(buf));
}

}  // namespace

Embedding hash_embed(const std::string& text, std::size_t d) {
    if (d < 2) throw ValidationError("hash_embed: dimension must be >= 2");
    std::vector<double> values(d, 0.0);
    const std::vector<std::string> tokens = tokenize(text);
    auto bucket = [&](std::string_view feature) {
        const std::uint64_t h = fnv1a64(feature);
        const double sign = (h & 1ull) ? 1.0 : -1.0;
        values[(h >> 1) % d] += sign;
    };
    for (const auto& token : tokens) bucket(token);
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) bucket(tokens[i] + " " + tokens[i + 1]);

    double norm_sq = 0.0;
    for (double v : values) norm_sq += v * v;
    if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (double& v : values) v *= inv;
    }
    return Embedding{std::move(values), "hash-" + std::to_string(d)};
}

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dimension) : dimension_(dimension) {
    if (dimension < 2) throw ValidationError("hash embedding dimension must be >= 2");
}

Embedding HashEmbeddingProvider::embed(const std::string&, const std::string& text) {
    return hash_embed(text, dimension_);
}

std::string HashEmbeddingProvider::id() const { return "hash-" + std::to_string(dimension_); }

FileEmbeddingProvider::FileEmbeddingProvider(const std::string& path) : path_(path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open embedding file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object() || !obj.contains("key") ||
            !obj.contains("vector"))
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": expected {\"key\", \"vector\"}");
        std::vector<double> vec = obj["vector"].get<std::vector<double>>();
        if (vec.empty())
            throw ValidationError(path + ":" + std::to_string(line_no) + ": empty vector");
        if (dimension_ == 0) dimension_ = vec.size();
        if (vec.size() != dimension_)
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": dimension mismatch (" + std::to_string(vec.size()) +
                                  " vs " + std::to_string(dimension_) + ")");
        const std::string key = obj["key"].get<std::string>();
        if (!vectors_.emplace(key, std::move(vec)).second)
            throw ValidationError(path + ":" + std::to_string(line_no) + ": duplicate key '" +
                                  key + "'");
    }
    if (vectors_.empty()) throw ValidationError("embedding file " + path + " has no entries");
}

Embedding FileEmbeddingProvider::embed(const std::string& key, const std::string& text) {
    auto it = vectors_.find(key);
    if (it == vectors_.end()) it = vectors_.find(content_hash(text));
    if (it == vectors_.end())
        throw RuntimeFailure("embedding file " + path_ + ": no entry for id '" + key + "'");
    return Embedding{it->second, id()};
}

std::string FileEmbeddingProvider::id() const {
    return "file-" + std::to_string(dimension_) + ":" + path_;
}

CachedEmbeddingProvider::CachedEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner,
                                                 std::string cache_path,
                                                 std::vector<std::string>* warnings)
    : inner_(std::move(inner)), cache_path_(std::move(cache_path)) {
    std::ifstream in(cache_path_);
    if (!in) return;  // empty cache is fine
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json obj = json::parse(line, nullptr, false);
        std::string why;
        if (obj.is_discarded() || !obj.is_object() || !obj.contains("hash") ||
            !obj.contains("vector") || !obj.contains("checksum")) {
            why = "malformed entry";
        } else {
            std::vector<double> vec = obj["vector"].get<std::vector<double>>();
            if (vector_digest(vec) != obj["checksum"].get<std::string>()) {
                why = "checksum mismatch";
            } else if (vec.size() != inner_->dimension()) {
                why = "dimension mismatch";
            } else {
                entries_[obj["hash"].get<std::string>()] = std::move(vec);
                continue;
            }
        }
        const std::string msg = "embedding cache " + cache_path_ + ":" +
                                std::to_string(line_no) + ": " + why + ", will recompute";
        if (warnings)
            warnings->push_back(msg);
        else
            std::cerr << "warning: " << msg << '\n';
    }
}

Embedding CachedEmbeddingProvider::embed(const std::string& key, const std::string& text) {
    const std::string hash = content_hash(text);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = entries_.find(hash);
        if (it != entries_.end()) return Embedding{it->second, inner_->id()};
    }
    Embedding fresh = inner_->embed(key, text);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        ++delegate_calls_;
        auto [it, inserted] = entries_.emplace(hash, fresh.values);
        if (inserted) {
            json obj;
            obj["hash"] = hash;
            obj["checksum"] = vector_digest(fresh.values);
            obj["vector"] = fresh.values;
            std::ofstream out(cache_path_, std::ios::binary | std::ios::app);
            if (!out) throw RuntimeFailure("cannot write embedding cache: " + cache_path_);
            out << obj.dump() << '\n';
        }
    }
    return fresh;
}

double l2_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ValidationError("l2_distance: dimension mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ValidationError("cosine_similarity: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

void write_embedding_jsonl(
    const std::string& path,
    const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write file: " + path);
    for (const auto& [key, vec] : rows) {
        json obj;
        obj["key"] = key;
        obj["vector"] = vec;
        out << obj.dump() << '\n';
    }
}

}  // namespace regimeval
