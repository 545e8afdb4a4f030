#include "regimeval/perturb.hpp"

#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

#include "regimeval/common.hpp"

namespace regimeval {

using nlohmann::json;

namespace {

bool is_alnum_ascii(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

std::string match_case(std::string_view original, std::string replacement) {
    bool all_upper = true;
    for (char c : original) {
        if (std::islower(static_cast<unsigned char>(c))) {
            all_upper = false;
            break;
        }
    }
    if (all_upper && original.size() > 1) {
        for (char& c : replacement) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return replacement;
    }
    if (!original.empty() && std::isupper(static_cast<unsigned char>(original.front())) &&
        !replacement.empty()) {
        replacement.front() =
            static_cast<char>(std::toupper(static_cast<unsigned char>(replacement.front())));
    }
    return replacement;
}

}  // namespace

void SubstitutionTable::validate() const {
    for (const auto& [key, value] : pairs) {
        if (key.empty() || value.empty())
            throw ValidationError("substitution table: empty token");
        if (key == value)
            throw ValidationError("substitution table: '" + key + "' maps to itself");
        if (key != to_lower(key))
            throw ValidationError("substitution table: key '" + key + "' must be lowercase");
        for (char c : key) {
            if (!is_alnum_ascii(static_cast<unsigned char>(c)))
                throw ValidationError("substitution table: key '" + key +
                                      "' must be a single token");
        }
        for (char c : value) {
            if (!is_alnum_ascii(static_cast<unsigned char>(c)))
                throw ValidationError("substitution table: replacement '" + value +
                                      "' must be a single token");
        }
    }
}

void SubstitutionTable::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write substitution file: " + path);
    out << json(pairs).dump(2) << '\n';
}

SubstitutionTable SubstitutionTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open substitution file: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw ValidationError("substitution file " + path + ": expected a JSON object");
    SubstitutionTable table;
    for (const auto& [key, value] : doc.items()) {
        if (!value.is_string())
            throw ValidationError("substitution file " + path + ": '" + key +
                                  "' must map to a string");
        table.pairs[key] = value.get<std::string>();
    }
    table.validate();
    return table;
}

SubstitutionTable default_substitution_table() {
    SubstitutionTable table;
    table.pairs = {
        {"growth", "decline"},     {"rise", "fall"},
        {"rises", "falls"},        {"rose", "fell"},
        {"gain", "loss"},          {"gains", "losses"},
        {"beat", "miss"},          {"beats", "misses"},
        {"upgrade", "downgrade"},  {"upgraded", "downgraded"},
        {"strong", "weak"},        {"strength", "weakness"},
        {"bullish", "bearish"},    {"surge", "plunge"},
        {"surged", "plunged"},     {"rally", "slump"},
        {"rallied", "slumped"},    {"up", "down"},
        {"higher", "lower"},       {"positive", "negative"},
        {"optimism", "pessimism"}, {"profit", "loss"},
    };
    return table;
}

PerturbationResult perturb(std::string_view text, const SubstitutionTable& table) {
    PerturbationResult result;
    result.text.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_alnum_ascii(static_cast<unsigned char>(text[i]))) {
            result.text.push_back(text[i]);
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_alnum_ascii(static_cast<unsigned char>(text[j]))) ++j;
        const std::string_view token = text.substr(i, j - i);
        auto it = table.pairs.find(to_lower(token));
        if (it != table.pairs.end()) {
            result.text += match_case(token, it->second);
            ++result.substitutions_applied;
        } else {
            result.text.append(token);
        }
        i = j;
    }
    return result;
}

}  // namespace regimeval
