#include "regimeval/causal.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "regimeval/common.hpp"
#include "regimeval/textfeat.hpp"

namespace regimeval {

using nlohmann::json;

void CausalLexicon::validate() const {
    for (const auto& cue : positive_cues) {
        if (negative_cues.count(cue))
            throw ValidationError("causal lexicon: cue '" + cue +
                                  "' appears in both positive and negative sets");
    }
    auto check_lower = [](const std::string& s, const char* where) {
        if (s != to_lower(s))
            throw ValidationError(std::string("causal lexicon: ") + where + " entry '" + s +
                                  "' must be lowercase");
    };
    for (const auto& cue : positive_cues) check_lower(cue, "positive");
    for (const auto& cue : negative_cues) check_lower(cue, "negative");
    for (const auto& marker : causal_markers) check_lower(marker, "marker");
}

void CausalLexicon::save(const std::string& path) const {
    json doc;
    doc["positive"] = positive_cues;
    doc["negative"] = negative_cues;
    doc["markers"] = causal_markers;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write lexicon file: " + path);
    out << doc.dump(2) << '\n';
}

CausalLexicon CausalLexicon::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open lexicon file: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("positive") ||
        !doc.contains("negative"))
        throw ValidationError("lexicon file " + path +
                              ": expected keys positive, negative, markers");
    CausalLexicon lex;
    for (const auto& cue : doc["positive"]) lex.positive_cues.insert(cue.get<std::string>());
    for (const auto& cue : doc["negative"]) lex.negative_cues.insert(cue.get<std::string>());
    if (doc.contains("markers"))
        for (const auto& m : doc["markers"]) lex.causal_markers.push_back(m.get<std::string>());
    lex.validate();
    return lex;
}

CausalLexicon default_causal_lexicon() {
    CausalLexicon lex;
    lex.positive_cues = {
        "surge", "surged", "surges", "soar", "soared", "soars", "rally", "rallied",
        "rallies", "gain", "gained", "gains", "jump", "jumped", "jumps", "climb",
        "climbed", "climbs", "beat", "beats", "upgrade", "upgraded", "strong",
        "strength", "record", "profit", "profits", "growth", "bullish", "outperform",
        "outperformed", "boost", "boosted", "boosts", "optimism", "optimistic",
        "improve", "improved", "improves", "exceed", "exceeded", "exceeds", "robust"};
    lex.negative_cues = {
        "plunge", "plunged", "plunges", "drop", "dropped", "drops", "fall", "fell",
        "falls", "decline", "declined", "declines", "slump", "slumped", "slumps",
        "miss", "missed", "misses", "downgrade", "downgraded", "weak", "weakness",
        "loss", "losses", "bearish", "underperform", "underperformed", "cut", "cuts",
        "warning", "warn", "warned", "fear", "fears", "recession", "crisis",
        "tumble", "tumbled", "tumbles", "slide", "slid"};
    lex.causal_markers = {"due to",   "driven by", "amid",          "because of",
                          "owing to", "following", "on the back of", "as a result of",
                          "thanks to", "led by"};
    return lex;
}

CausalPolarity extract_polarity(std::string_view text, const CausalLexicon& lexicon,
                                const PolarityOptions& options) {
    const std::vector<std::string> tokens = tokenize(text);

    std::vector<std::pair<std::size_t, std::size_t>> marker_spans;
    if (options.marker_gating) {
        std::vector<std::vector<std::string>> marker_tokens;
        marker_tokens.reserve(lexicon.causal_markers.size());
        for (const auto& marker : lexicon.causal_markers)
            marker_tokens.push_back(tokenize(marker));
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            for (const auto& mt : marker_tokens) {
                if (mt.empty() || i + mt.size() > tokens.size()) continue;
                bool match = true;
                for (std::size_t k = 0; k < mt.size(); ++k) {
                    if (tokens[i + k] != mt[k]) {
                        match = false;
                        break;
                    }
                }
                if (match) marker_spans.emplace_back(i, i + mt.size() - 1);
            }
        }
    }

    auto gated_in = [&](std::size_t pos) {
        if (!options.marker_gating) return true;
        for (const auto& [s, e] : marker_spans) {
            const std::size_t dist = pos < s ? s - pos : (pos > e ? pos - e : 0);
            if (dist <= options.marker_window) return true;
        }
        return false;
    };

    std::size_t positive = 0;
    std::size_t negative = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const bool is_pos = lexicon.positive_cues.count(tokens[i]) > 0;
        const bool is_neg = !is_pos && lexicon.negative_cues.count(tokens[i]) > 0;
        if (!is_pos && !is_neg) continue;
        if (!gated_in(i)) continue;
        if (is_pos)
            ++positive;
        else
            ++negative;
    }

    CausalPolarity result;
    result.cue_count = positive + negative;
    if (positive > negative)
        result.value = 1;
    else if (negative > positive)
        result.value = -1;
    return result;
}

}  // namespace regimeval
