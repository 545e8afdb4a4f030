#include "regimeval/textfeat.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "regimeval/common.hpp"

namespace regimeval {

using nlohmann::json;

namespace {

bool is_alnum_ascii(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_pure_number(std::string_view token) {
    for (char c : token) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.size() >= 2 && !is_pure_number(current)) tokens.push_back(current);
        current.clear();
    };
    for (char raw : text) {
        const auto c = static_cast<unsigned char>(raw);
        if (is_alnum_ascii(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view term) const {
    auto it = std::lower_bound(terms.begin(), terms.end(), term);
    if (it == terms.end() || *it != term) return std::nullopt;
    return static_cast<std::size_t>(it - terms.begin());
}

void Vocabulary::save(const std::string& path) const {
    json doc;
    doc["max_features"] = max_features;
    doc["terms"] = terms;
    doc["idf"] = idf;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write vocabulary file: " + path);
    out << doc.dump(2) << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open vocabulary file: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("terms") || !doc.contains("idf"))
        throw ValidationError("vocabulary file " + path + ": expected terms and idf arrays");
    Vocabulary vocab;
    vocab.terms = doc["terms"].get<std::vector<std::string>>();
    vocab.idf = doc["idf"].get<std::vector<double>>();
    vocab.max_features = doc.value("max_features", vocab.terms.size());
    if (vocab.terms.size() != vocab.idf.size())
        throw ValidationError("vocabulary file " + path + ": terms/idf length mismatch");
    if (!std::is_sorted(vocab.terms.begin(), vocab.terms.end()))
        throw ValidationError("vocabulary file " + path + ": terms not sorted");
    return vocab;
}

Vocabulary fit_vocabulary(std::span<const std::string> docs, std::size_t max_features) {
    if (docs.empty()) throw ValidationError("fit_vocabulary: empty corpus");
    if (max_features == 0) throw ValidationError("fit_vocabulary: max_features must be >= 1");

    std::map<std::string, std::size_t> df;
    for (const auto& doc : docs) {
        std::set<std::string> seen;
        for (auto& token : tokenize(doc)) seen.insert(std::move(token));
        for (const auto& token : seen) ++df[token];
    }

    std::vector<const std::pair<const std::string, std::size_t>*> ranked;
    ranked.reserve(df.size());
    for (const auto& entry : df) ranked.push_back(&entry);
    std::sort(ranked.begin(), ranked.end(), [](const auto* a, const auto* b) {
        if (a->second != b->second) return a->second > b->second;
        return a->first < b->first;
    });
    if (ranked.size() > max_features) ranked.resize(max_features);

    Vocabulary vocab;
    vocab.max_features = max_features;
    vocab.terms.reserve(ranked.size());
    for (const auto* entry : ranked) vocab.terms.push_back(entry->first);
    std::sort(vocab.terms.begin(), vocab.terms.end());

    const double n = static_cast<double>(docs.size());
    vocab.idf.reserve(vocab.terms.size());
    for (const auto& term : vocab.terms) {
        const double d = static_cast<double>(df.at(term));
        vocab.idf.push_back(std::log((1.0 + n) / (1.0 + d)) + 1.0);
    }
    return vocab;
}

double SparseVector::norm2() const {
    double sum = 0.0;
    for (double v : values) sum += v * v;
    return std::sqrt(sum);
}

SparseVector transform(std::string_view text, const Vocabulary& vocab) {
    std::map<std::size_t, double> counts;
    for (const auto& token : tokenize(text)) {
        if (auto idx = vocab.index_of(token)) counts[*idx] += 1.0;
    }
    SparseVector vec;
    vec.indices.reserve(counts.size());
    vec.values.reserve(counts.size());
    double norm_sq = 0.0;
    for (const auto& [idx, count] : counts) {
        const double w = count * vocab.idf[idx];
        vec.indices.push_back(static_cast<std::uint32_t>(idx));
        vec.values.push_back(w);
        norm_sq += w * w;
    }
    if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (double& v : vec.values) v *= inv;
    }
    return vec;
}

TermDistribution term_distribution(std::span<const std::string> docs, const Vocabulary& vocab) {
    if (docs.empty()) throw ValidationError("term_distribution: empty corpus slice");

    std::vector<double> weights(vocab.size(), 0.0);
    for (const auto& doc : docs) {
        for (const auto& token : tokenize(doc)) {
            if (auto idx = vocab.index_of(token)) weights[*idx] += vocab.idf[*idx];
        }
    }
    constexpr double kEpsilon = 1e-9;
    double total = 0.0;
    for (double& w : weights) {
        w += kEpsilon;
        total += w;
    }
    for (double& w : weights) w /= total;
    return TermDistribution{std::move(weights)};
}

}  // namespace regimeval
