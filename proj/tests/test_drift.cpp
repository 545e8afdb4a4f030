#include "regimeval/drift.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

#include "regimeval/common.hpp"
#include "test_support.hpp"

using namespace regimeval;
using testsupport::jsd_oracle;
using testsupport::random_distribution;

namespace {

TermDistribution dist(std::vector<double> probs) { return TermDistribution{std::move(probs)}; }

}  // namespace

TEST_CASE("js_divergence: identity, disjoint support, hand-derived value") {
    CHECK(js_divergence(dist({0.3, 0.7}), dist({0.3, 0.7})) == 0.0);
    CHECK(js_divergence(dist({1.0, 0.0}), dist({0.0, 1.0})) == 1.0);
    // 0.5*KL((.5,.5)||(.75,.25)) + 0.5*KL((1,0)||(.75,.25)) in base 2
    const double expected = jsd_oracle({0.5, 0.5}, {1.0, 0.0});
    CHECK(js_divergence(dist({0.5, 0.5}), dist({1.0, 0.0})) ==
          doctest::Approx(expected).epsilon(1e-15));
    CHECK(expected == doctest::Approx(0.3113).epsilon(1e-3));
}

TEST_CASE("js_divergence rejects mismatched dimensions") {
    CHECK_THROWS_AS(js_divergence(dist({1.0}), dist({0.5, 0.5})), ValidationError);
}

TEST_CASE("js_divergence matches the brute-force oracle on random pairs") {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> dim(2, 50);
    for (int round = 0; round < 300; ++round) {
        const std::size_t d = dim(rng);
        auto p = random_distribution(rng, d);
        auto q = random_distribution(rng, d);
        const double expected = jsd_oracle(p, q);
        const double actual = js_divergence(dist(p), dist(q));
        CHECK(std::abs(actual - expected) < 1e-12);
        CHECK(actual >= 0.0);
        CHECK(actual <= 1.0);
        // symmetry
        CHECK(std::abs(js_divergence(dist(q), dist(p)) - actual) < 1e-12);
    }
}

TEST_CASE("js_divergence: mixing q toward p never increases the divergence") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 40; ++round) {
        auto p = random_distribution(rng, 12);
        auto q = random_distribution(rng, 12);
        double previous = js_divergence(dist(p), dist(q));
        for (int step = 1; step <= 20; ++step) {
            const double lambda = step / 20.0;
            std::vector<double> mixed(p.size());
            for (std::size_t i = 0; i < p.size(); ++i)
                mixed[i] = (1.0 - lambda) * q[i] + lambda * p[i];
            const double current = js_divergence(dist(p), dist(mixed));
            CHECK(current <= previous + 1e-12);
            previous = current;
        }
    }
}

TEST_CASE("drift_matrix: structure and identity") {
    SUBCASE("two identical slices give the zero matrix") {
        auto matrix = drift_matrix({{"a", dist({0.4, 0.6})}, {"b", dist({0.4, 0.6})}});
        CHECK(matrix.regime_names == std::vector<std::string>{"a", "b"});
        for (const auto& row : matrix.values)
            for (double v : row) CHECK(v == 0.0);
    }
    SUBCASE("three regimes: symmetric, zero diagonal, bounded") {
        std::mt19937_64 rng(19);
        auto matrix = drift_matrix({{"a", dist(random_distribution(rng, 8))},
                                    {"b", dist(random_distribution(rng, 8))},
                                    {"c", dist(random_distribution(rng, 8))}});
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(matrix.at(i, i) == 0.0);
            for (std::size_t j = 0; j < 3; ++j) {
                CHECK(matrix.at(i, j) == matrix.at(j, i));
                CHECK(matrix.at(i, j) >= 0.0);
                CHECK(matrix.at(i, j) <= 1.0);
            }
        }
    }
    SUBCASE("fewer than two regimes is an error") {
        CHECK_THROWS_AS(drift_matrix({{"only", dist({1.0})}}), ValidationError);
    }
}

TEST_CASE("planted vocabulary shift dominates within-regime divergence") {
    // Regime A draws from words a00..a19; regime B replaces half of them.
    std::mt19937_64 rng(77);
    auto make_docs = [&rng](int base_offset, int count) {
        std::vector<std::string> docs;
        std::uniform_int_distribution<int> pick(0, 19);
        for (int i = 0; i < count; ++i) {
            std::string doc;
            for (int k = 0; k < 30; ++k) {
                const int w = pick(rng);
                const bool replaced = w >= 10 && base_offset > 0;
                doc += (replaced ? "b" : "a") + std::to_string(w) + " ";
            }
            docs.push_back(doc);
        }
        return docs;
    };
    auto docs_a = make_docs(0, 60);
    auto docs_b = make_docs(1, 60);

    std::vector<std::string> all;
    all.insert(all.end(), docs_a.begin(), docs_a.end());
    all.insert(all.end(), docs_b.begin(), docs_b.end());
    auto vocab = fit_vocabulary(all, 64);

    auto half = [&](const std::vector<std::string>& docs, bool first) {
        const std::size_t mid = docs.size() / 2;
        return std::vector<std::string>(first ? docs.begin() : docs.begin() + mid,
                                        first ? docs.begin() + mid : docs.end());
    };
    const double within_a = js_divergence(term_distribution(half(docs_a, true), vocab),
                                          term_distribution(half(docs_a, false), vocab));
    const double within_b = js_divergence(term_distribution(half(docs_b, true), vocab),
                                          term_distribution(half(docs_b, false), vocab));
    const double cross = js_divergence(term_distribution(docs_a, vocab),
                                       term_distribution(docs_b, vocab));
    CHECK(cross > within_a);
    CHECK(cross > within_b);
    CHECK(cross > 2.0 * std::max(within_a, within_b));
}

TEST_CASE("drift matrix CSV/JSON emission") {
    testsupport::TempDir dir("drift");
    auto matrix = drift_matrix({{"pre", dist({0.8, 0.2})}, {"post", dist({0.2, 0.8})}});
    matrix.write_csv(dir.file("m.csv"));
    matrix.write_json(dir.file("m.json"));
    const std::string csv = testsupport::read_file(dir.file("m.csv"));
    CHECK(csv.find("regime,pre,post") == 0);
    const std::string json_text = testsupport::read_file(dir.file("m.json"));
    CHECK(json_text.find("\"log_base\": 2") != std::string::npos);
}
