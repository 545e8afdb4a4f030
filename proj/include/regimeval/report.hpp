#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regimeval/metrics.hpp"

namespace regimeval {

// Profile rows serialize as (regime, model, metric, value, eligible_count)
// with N/A spelled literally. JSON keeps the full structure including
// excluded counts.
void write_profiles_csv(const std::string& path, std::span<const RobustnessProfile> profiles);
void write_profiles_json(const std::string& path, std::span<const RobustnessProfile> profiles);

std::vector<RobustnessProfile> read_profiles_csv(const std::string& path);
std::vector<RobustnessProfile> read_profiles_json(const std::string& path);

nlohmann::json profile_to_json(const RobustnessProfile& profile);
RobustnessProfile profile_from_json(const nlohmann::json& doc);

// Fixed-width table per metric: regimes as rows, models as columns.
// Throws on an empty profile list.
std::string render_summary(std::span<const RobustnessProfile> profiles);

nlohmann::json summary_json(std::span<const RobustnessProfile> profiles);

}  // namespace regimeval
