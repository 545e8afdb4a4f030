#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace regimeval {

struct Embedding {
    std::vector<double> values;
    std::string provider_id;
};

// Behavioral contract for sentence-embedding sources. `key` is the caller's
// stable identifier for the text (usually the article id); providers may
// ignore it and work from content alone. Must be deterministic and safe to
// call from multiple threads.
class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    virtual Embedding embed(const std::string& key, const std::string& text) = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::string id() const = 0;
};

// Feature-hashes unigrams and bigrams into d signed buckets, L2-normalized.
// Fully offline and deterministic; the test-suite embedding provider.
Embedding hash_embed(const std::string& text, std::size_t d = 256);

class HashEmbeddingProvider final : public EmbeddingProvider {
  public:
    explicit HashEmbeddingProvider(std::size_t dimension = 256);
    Embedding embed(const std::string& key, const std::string& text) override;
    std::size_t dimension() const override { return dimension_; }
    std::string id() const override;

  private:
    std::size_t dimension_;
};

// Serves vectors precomputed elsewhere (MiniLM, MPNet, ...) from a JSONL
// file of {"key": ..., "vector": [...]}. Keys may be article ids or content
// hashes; lookups try the id first, then the content hash of the text.
class FileEmbeddingProvider final : public EmbeddingProvider {
  public:
    explicit FileEmbeddingProvider(const std::string& path);
    Embedding embed(const std::string& key, const std::string& text) override;
    std::size_t dimension() const override { return dimension_; }
    std::string id() const override;

  private:
    std::string path_;
    std::size_t dimension_ = 0;
    std::map<std::string, std::vector<double>> vectors_;
};

// On-disk memoization keyed by content hash, so edited texts never serve
// stale vectors. Transparent: id() and served vectors match the inner
// provider exactly. Entries failing their checksum are dropped at load and
// recomputed on demand.
class CachedEmbeddingProvider final : public EmbeddingProvider {
  public:
    CachedEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner, std::string cache_path,
                            std::vector<std::string>* warnings = nullptr);
    Embedding embed(const std::string& key, const std::string& text) override;
    std::size_t dimension() const override { return inner_->dimension(); }
    std::string id() const override { return inner_->id(); }

    std::size_t delegate_calls() const { return delegate_calls_; }

  private:
    std::shared_ptr<EmbeddingProvider> inner_;
    std::string cache_path_;
    std::map<std::string, std::vector<double>> entries_;
    std::mutex mutex_;
    std::size_t delegate_calls_ = 0;
};

double l2_distance(const std::vector<double>& a, const std::vector<double>& b);
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// JSONL {"key", "vector"} dump, the same schema FileEmbeddingProvider reads.
void write_embedding_jsonl(const std::string& path,
                           const std::vector<std::pair<std::string, std::vector<double>>>& rows);

}  // namespace regimeval
