#pragma once

#include <map>
#include <string>
#include <string_view>

namespace regimeval {

// Whole-token antonym substitutions for counterfactual text. Keys are
// lowercase single tokens; no token maps to itself.
struct SubstitutionTable {
    std::map<std::string, std::string> pairs;

    void validate() const;

    void save(const std::string& path) const;
    static SubstitutionTable load(const std::string& path);
};

SubstitutionTable default_substitution_table();

struct PerturbationResult {
    std::string text;
    std::size_t substitutions_applied = 0;
};

// Replaces every whole-token, case-insensitive match, preserving all
// surrounding text. ALL-CAPS and Capitalized tokens keep their casing.
PerturbationResult perturb(std::string_view text, const SubstitutionTable& table);

}  // namespace regimeval
