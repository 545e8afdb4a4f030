#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace regimeval {

// Lowercases, splits on any non-alphanumeric byte, drops tokens shorter
// than two characters and pure numbers. ASCII only; multibyte characters
// act as separators.
std::vector<std::string> tokenize(std::string_view text);

// Lexicographically ordered term list with smoothed idf:
// idf(t) = ln((1 + N) / (1 + df(t))) + 1.
struct Vocabulary {
    std::vector<std::string> terms;  // sorted, unique
    std::vector<double> idf;
    std::size_t max_features = 2000;

    std::size_t size() const { return terms.size(); }
    std::optional<std::size_t> index_of(std::string_view term) const;

    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);
};

// Terms are selected by document frequency (ties lexicographic), then the
// surviving list is re-sorted lexicographically.
Vocabulary fit_vocabulary(std::span<const std::string> docs, std::size_t max_features = 2000);

struct SparseVector {
    std::vector<std::uint32_t> indices;  // strictly increasing
    std::vector<double> values;

    double norm2() const;
    bool empty() const { return indices.empty(); }
};

// count * idf, L2-normalized; out-of-vocabulary documents yield the zero
// vector.
SparseVector transform(std::string_view text, const Vocabulary& vocab);

struct TermDistribution {
    std::vector<double> probs;  // one entry per vocabulary term, sums to 1

    std::size_t size() const { return probs.size(); }
};

// Idf-weighted term counts summed over the slice, epsilon-smoothed
// (1e-9 per entry) and normalized. Throws on an empty slice.
TermDistribution term_distribution(std::span<const std::string> docs, const Vocabulary& vocab);

}  // namespace regimeval
