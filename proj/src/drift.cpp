#include "regimeval/drift.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "regimeval/common.hpp"
#include "regimeval/csv.hpp"

namespace regimeval {

double js_divergence(const TermDistribution& p, const TermDistribution& q) {
    if (p.size() != q.size())
        throw ValidationError("js_divergence: dimension mismatch (" +
                              std::to_string(p.size()) + " vs " + std::to_string(q.size()) +
                              ")");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = p.probs[i];
        const double qi = q.probs[i];
        const double mi = 0.5 * (pi + qi);
        if (pi > 0.0) sum += 0.5 * pi * std::log2(pi / mi);
        if (qi > 0.0) sum += 0.5 * qi * std::log2(qi / mi);
    }
    return sum;
}

DriftMatrix drift_matrix(
    const std::vector<std::pair<std::string, TermDistribution>>& slices) {
    if (slices.size() < 2)
        throw ValidationError("drift_matrix needs at least 2 regimes, got " +
                              std::to_string(slices.size()));
    DriftMatrix matrix;
    matrix.regime_names.reserve(slices.size());
    for (const auto& [name, dist] : slices) matrix.regime_names.push_back(name);
    matrix.values.assign(slices.size(), std::vector<double>(slices.size(), 0.0));
    for (std::size_t i = 0; i < slices.size(); ++i) {
        for (std::size_t j = i + 1; j < slices.size(); ++j) {
            const double d = js_divergence(slices[i].second, slices[j].second);
            matrix.values[i][j] = d;
            matrix.values[j][i] = d;
        }
    }
    return matrix;
}

void DriftMatrix::write_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write file: " + path);
    std::vector<std::string> header;
    header.push_back("regime");
    header.insert(header.end(), regime_names.begin(), regime_names.end());
    write_csv_row(out, header);
    for (std::size_t i = 0; i < regime_names.size(); ++i) {
        std::vector<std::string> row;
        row.push_back(regime_names[i]);
        for (std::size_t j = 0; j < regime_names.size(); ++j)
            row.push_back(format_double(values[i][j]));
        write_csv_row(out, row);
    }
}

void DriftMatrix::write_json(const std::string& path) const {
    nlohmann::json doc;
    doc["divergence"] = "jensen-shannon";
    doc["log_base"] = 2;
    doc["regimes"] = regime_names;
    doc["values"] = values;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write file: " + path);
    out << doc.dump(2) << '\n';
}

}  // namespace regimeval
