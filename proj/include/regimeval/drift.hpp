#pragma once

#include <string>
#include <utility>
#include <vector>

#include "regimeval/textfeat.hpp"

namespace regimeval {

// Jensen-Shannon divergence, log base 2, so the range is [0, 1].
// 0*log(0/.) terms contribute zero. Throws on dimension mismatch.
double js_divergence(const TermDistribution& p, const TermDistribution& q);

struct DriftMatrix {
    std::vector<std::string> regime_names;
    std::vector<std::vector<double>> values;  // symmetric, zero diagonal

    double at(std::size_t i, std::size_t j) const { return values[i][j]; }

    void write_csv(const std::string& path) const;
    // JSON output records the log base alongside the matrix.
    void write_json(const std::string& path) const;
};

// Pairwise JSD over regime slices, in the given order. Needs >= 2 regimes.
DriftMatrix drift_matrix(
    const std::vector<std::pair<std::string, TermDistribution>>& slices);

}  // namespace regimeval
