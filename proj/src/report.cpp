#include "regimeval/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "regimeval/common.hpp"
#include "regimeval/csv.hpp"

namespace regimeval {

using nlohmann::json;

namespace {

constexpr const char* kMetricNames[] = {"mse", "fcas", "pcs", "pcs_abs", "tsv", "nlics"};

const MetricValue& metric_by_name(const RobustnessProfile& p, std::string_view name) {
    if (name == "mse") return p.mse;
    if (name == "fcas") return p.fcas;
    if (name == "pcs") return p.pcs;
    if (name == "pcs_abs") return p.pcs_abs;
    if (name == "tsv") return p.tsv;
    if (name == "nlics") return p.nlics;
    throw ValidationError("unknown metric '" + std::string(name) + "'");
}

MetricValue& metric_by_name(RobustnessProfile& p, std::string_view name) {
    return const_cast<MetricValue&>(metric_by_name(std::as_const(p), name));
}

json metric_to_json(const MetricValue& m) {
    json obj;
    if (m.value)
        obj["value"] = *m.value;
    else
        obj["value"] = "N/A";
    obj["eligible"] = m.eligible;
    obj["excluded"] = m.excluded;
    return obj;
}

MetricValue metric_from_json(const json& obj) {
    MetricValue m;
    if (obj.contains("value") && obj["value"].is_number())
        m.value = obj["value"].get<double>();
    m.eligible = obj.value("eligible", static_cast<std::size_t>(0));
    m.excluded = obj.value("excluded", static_cast<std::size_t>(0));
    return m;
}

std::string display_value(const MetricValue& m) {
    if (!m.value) return "N/A";
    std::ostringstream out;
    out << std::fixed << std::setprecision(4) << *m.value;
    return out.str();
}

}  // namespace

void write_profiles_csv(const std::string& path, std::span<const RobustnessProfile> profiles) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write file: " + path);
    out << "regime,model,metric,value,eligible_count\n";
    for (const auto& p : profiles) {
        for (const char* name : kMetricNames) {
            const MetricValue& m = metric_by_name(p, name);
            const std::string fields[] = {p.regime, p.model_id, name,
                                          m.value ? format_double(*m.value) : "N/A",
                                          std::to_string(m.eligible)};
            write_csv_row(out, fields);
        }
    }
}

std::vector<RobustnessProfile> read_profiles_csv(const std::string& path) {
    CsvTable table = read_csv_file(path);
    const int regime_col = table.column("regime");
    const int model_col = table.column("model");
    const int metric_col = table.column("metric");
    const int value_col = table.column("value");
    const int eligible_col = table.column("eligible_count");
    if (regime_col < 0 || model_col < 0 || metric_col < 0 || value_col < 0 || eligible_col < 0)
        throw ValidationError("profile CSV " + path + ": unexpected header");

    std::vector<RobustnessProfile> profiles;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    for (const auto& row : table.rows) {
        if (row.fields.size() < 5)
            throw ValidationError(path + ":" + std::to_string(row.line) + ": short row");
        const auto key = std::make_pair(row.fields[regime_col], row.fields[model_col]);
        auto [it, inserted] = index.emplace(key, profiles.size());
        if (inserted) {
            RobustnessProfile p;
            p.regime = key.first;
            p.model_id = key.second;
            profiles.push_back(std::move(p));
        }
        RobustnessProfile& p = profiles[it->second];
        MetricValue& m = metric_by_name(p, row.fields[metric_col]);
        if (row.fields[value_col] != "N/A") {
            auto value = parse_double(row.fields[value_col]);
            if (!value)
                throw ValidationError(path + ":" + std::to_string(row.line) +
                                      ": bad value '" + row.fields[value_col] + "'");
            m.value = *value;
        }
        auto eligible = parse_int(row.fields[eligible_col]);
        if (!eligible)
            throw ValidationError(path + ":" + std::to_string(row.line) +
                                  ": bad eligible_count");
        m.eligible = static_cast<std::size_t>(*eligible);
    }
    return profiles;
}

json profile_to_json(const RobustnessProfile& p) {
    json obj;
    obj["regime"] = p.regime;
    obj["model"] = p.model_id;
    obj["sample_count"] = p.sample_count;
    json metrics;
    for (const char* name : kMetricNames) metrics[name] = metric_to_json(metric_by_name(p, name));
    obj["metrics"] = metrics;
    return obj;
}

RobustnessProfile profile_from_json(const json& doc) {
    RobustnessProfile p;
    p.regime = doc.at("regime").get<std::string>();
    p.model_id = doc.at("model").get<std::string>();
    p.sample_count = doc.value("sample_count", static_cast<std::size_t>(0));
    const json& metrics = doc.at("metrics");
    for (const char* name : kMetricNames) {
        if (metrics.contains(name))
            metric_by_name(p, name) = metric_from_json(metrics[name]);
    }
    return p;
}

void write_profiles_json(const std::string& path, std::span<const RobustnessProfile> profiles) {
    json list = json::array();
    for (const auto& p : profiles) list.push_back(profile_to_json(p));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write file: " + path);
    out << json{{"profiles", list}}.dump(2) << '\n';
}

std::vector<RobustnessProfile> read_profiles_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("profiles"))
        throw ValidationError("profile JSON " + path + ": expected a 'profiles' array");
    std::vector<RobustnessProfile> profiles;
    for (const auto& item : doc["profiles"]) profiles.push_back(profile_from_json(item));
    return profiles;
}

std::string render_summary(std::span<const RobustnessProfile> profiles) {
    if (profiles.empty()) throw ValidationError("render_summary: no profiles");

    std::vector<std::string> regimes;
    std::vector<std::string> models;
    for (const auto& p : profiles) {
        if (std::find(regimes.begin(), regimes.end(), p.regime) == regimes.end())
            regimes.push_back(p.regime);
        if (std::find(models.begin(), models.end(), p.model_id) == models.end())
            models.push_back(p.model_id);
    }
    std::map<std::pair<std::string, std::string>, const RobustnessProfile*> lookup;
    for (const auto& p : profiles) lookup[{p.regime, p.model_id}] = &p;

    std::size_t regime_width = std::string("regime").size();
    for (const auto& r : regimes) regime_width = std::max(regime_width, r.size());
    std::vector<std::size_t> col_width(models.size());
    for (std::size_t c = 0; c < models.size(); ++c)
        col_width[c] = std::max<std::size_t>(models[c].size(), 10);

    std::ostringstream out;
    for (const char* metric : kMetricNames) {
        out << "== " << metric << " ==\n";
        out << std::left << std::setw(static_cast<int>(regime_width + 2)) << "regime";
        for (std::size_t c = 0; c < models.size(); ++c)
            out << std::right << std::setw(static_cast<int>(col_width[c] + 2)) << models[c];
        out << '\n';
        for (const auto& regime : regimes) {
            out << std::left << std::setw(static_cast<int>(regime_width + 2)) << regime;
            for (std::size_t c = 0; c < models.size(); ++c) {
                auto it = lookup.find({regime, models[c]});
                const std::string cell =
                    it == lookup.end() ? "-" : display_value(metric_by_name(*it->second, metric));
                out << std::right << std::setw(static_cast<int>(col_width[c] + 2)) << cell;
            }
            out << '\n';
        }
        out << '\n';
    }
    return out.str();
}

json summary_json(std::span<const RobustnessProfile> profiles) {
    json list = json::array();
    for (const auto& p : profiles) list.push_back(profile_to_json(p));
    return json{{"profiles", list}};
}

}  // namespace regimeval
