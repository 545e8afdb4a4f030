#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace regimeval {

// Lexicon of directional cue words plus causal-marker phrases. Polarity
// extraction is purely lexical so FCAS stays auditable.
struct CausalLexicon {
    std::set<std::string> positive_cues;
    std::set<std::string> negative_cues;
    std::vector<std::string> causal_markers;  // may be multi-word phrases

    // Disjoint positive/negative sets, everything lowercase.
    void validate() const;

    void save(const std::string& path) const;
    static CausalLexicon load(const std::string& path);
};

CausalLexicon default_causal_lexicon();

struct CausalPolarity {
    int value = 0;               // sign(positive hits - negative hits)
    std::size_t cue_count = 0;   // positive hits + negative hits
};

struct PolarityOptions {
    // When set, only cues within `marker_window` tokens of a causal marker
    // count toward the polarity.
    bool marker_gating = false;
    std::size_t marker_window = 10;
};

CausalPolarity extract_polarity(std::string_view text, const CausalLexicon& lexicon,
                                const PolarityOptions& options = {});

}  // namespace regimeval
