#include "regimeval/perturb.hpp"

#include <doctest.h>

#include <random>

#include "regimeval/common.hpp"
#include "regimeval/textfeat.hpp"
#include "test_support.hpp"

using namespace regimeval;

TEST_CASE("perturb: the growth/decline flip") {
    const SubstitutionTable table = default_substitution_table();
    auto result = perturb("growth outlook remains strong", table);
    CHECK(result.text == "decline outlook remains weak");
    CHECK(result.substitutions_applied == 2);

    SubstitutionTable only_growth;
    only_growth.pairs = {{"growth", "decline"}};
    auto single = perturb("growth outlook remains strong", only_growth);
    CHECK(single.text == "decline outlook remains strong");
    CHECK(single.substitutions_applied == 1);
}

TEST_CASE("perturb: no matching tokens leaves the text unchanged") {
    const SubstitutionTable table = default_substitution_table();
    const std::string text = "completely unrelated sentence.";
    auto result = perturb(text, table);
    CHECK(result.text == text);
    CHECK(result.substitutions_applied == 0);
}

TEST_CASE("perturb: whole-token, case-insensitive, punctuation preserved") {
    const SubstitutionTable table = default_substitution_table();
    auto result = perturb("Growth, growth!", table);
    CHECK(result.substitutions_applied == 2);
    CHECK(result.text == "Decline, decline!");

    // substrings do not match whole tokens
    auto untouched = perturb("outgrowth regrowths", table);
    CHECK(untouched.substitutions_applied == 0);
    CHECK(untouched.text == "outgrowth regrowths");

    auto caps = perturb("GROWTH ahead", table);
    CHECK(caps.text == "DECLINE ahead");
}

TEST_CASE("perturb idempotence when replacement values are not keys") {
    const SubstitutionTable table = default_substitution_table();
    table.validate();
    // shipped table's value set is disjoint from its key set
    for (const auto& [key, value] : table.pairs) CHECK(table.pairs.count(value) == 0);

    std::mt19937_64 rng(13);
    std::vector<std::string> words;
    for (const auto& [key, value] : table.pairs) words.push_back(key);
    words.insert(words.end(), {"filler", "market", "shares", "quarter"});
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    for (int round = 0; round < 60; ++round) {
        std::string text;
        for (int k = 0; k < 10; ++k) text += words[pick(rng)] + (k % 3 ? " " : ", ");
        auto once = perturb(text, table);
        auto twice = perturb(once.text, table);
        CHECK(twice.text == once.text);
        CHECK(twice.substitutions_applied == 0);
    }
}

TEST_CASE("perturb preserves the token count") {
    const SubstitutionTable table = default_substitution_table();
    std::mt19937_64 rng(29);
    std::vector<std::string> words = {"growth",  "rise",   "beat", "upgrade", "market",
                                      "quarter", "shares", "up",   "strong",  "plain"};
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    for (int round = 0; round < 60; ++round) {
        std::string text;
        const int n = 1 + round % 14;
        for (int k = 0; k < n; ++k) text += words[pick(rng)] + " ";
        auto result = perturb(text, table);
        CHECK(tokenize(result.text).size() == tokenize(text).size());
    }
}

TEST_CASE("substitution table validation") {
    SubstitutionTable self_map;
    self_map.pairs = {{"flat", "flat"}};
    CHECK_THROWS_AS(self_map.validate(), ValidationError);

    SubstitutionTable upper_key;
    upper_key.pairs = {{"Growth", "decline"}};
    CHECK_THROWS_AS(upper_key.validate(), ValidationError);

    SubstitutionTable phrase;
    phrase.pairs = {{"two words", "token"}};
    CHECK_THROWS_AS(phrase.validate(), ValidationError);
}

TEST_CASE("substitution table file round-trip") {
    testsupport::TempDir dir("subs");
    const SubstitutionTable table = default_substitution_table();
    table.save(dir.file("subs.json"));
    auto loaded = SubstitutionTable::load(dir.file("subs.json"));
    CHECK(loaded.pairs == table.pairs);
}
