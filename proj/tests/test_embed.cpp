#include "regimeval/embed.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

#include "regimeval/common.hpp"
#include "test_support.hpp"

using namespace regimeval;
using testsupport::TempDir;
using testsupport::write_file;

TEST_CASE("hash_embed: determinism, empty input, unit norm") {
    auto a = hash_embed("profits surged today", 256);
    auto b = hash_embed("profits surged today", 256);
    CHECK(a.values == b.values);
    CHECK(a.provider_id == "hash-256");

    auto empty = hash_embed("", 256);
    for (double v : empty.values) CHECK(v == 0.0);

    double norm = 0.0;
    for (double v : a.values) norm += v * v;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(hash_embed("text", 1), ValidationError);
}

TEST_CASE("hash_embed: token-disjoint texts have near-zero cosine similarity") {
    // 100 pairs of texts built from disjoint token pools; collisions in 256
    // buckets keep cosine below 0.3.
    std::mt19937_64 rng(1234);
    auto random_word = [&rng](const char* prefix) {
        std::uniform_int_distribution<int> letter(0, 25);
        std::string word = prefix;
        for (int i = 0; i < 6; ++i) word += static_cast<char>('a' + letter(rng));
        return word;
    };
    double max_cosine = 0.0;
    for (int pair = 0; pair < 100; ++pair) {
        std::string left, right;
        for (int k = 0; k < 25; ++k) {
            left += random_word("lx") + " ";
            right += random_word("rx") + " ";
        }
        const double c = cosine_similarity(hash_embed(left, 256).values,
                                           hash_embed(right, 256).values);
        max_cosine = std::max(max_cosine, std::abs(c));
    }
    CHECK(max_cosine < 0.3);
}

TEST_CASE("file provider: declares its dimension and serves exact vectors") {
    TempDir dir("embfile");
    write_file(dir.file("emb.jsonl"),
               "{\"key\":\"a1\",\"vector\":[1.0,2.0,3.0]}\n"
               "{\"key\":\"a2\",\"vector\":[0.5,0.25,0.125]}\n"
               "{\"key\":\"a3\",\"vector\":[-1.0,0.0,1.0]}\n");
    FileEmbeddingProvider provider(dir.file("emb.jsonl"));
    CHECK(provider.dimension() == 3);
    auto e = provider.embed("a2", "ignored text");
    CHECK(e.values == std::vector<double>{0.5, 0.25, 0.125});
}

TEST_CASE("file provider: missing id errors naming the id") {
    TempDir dir("embfile");
    write_file(dir.file("emb.jsonl"), "{\"key\":\"a1\",\"vector\":[1.0,2.0]}\n");
    FileEmbeddingProvider provider(dir.file("emb.jsonl"));
    CHECK_THROWS_WITH_AS(provider.embed("ghost", "some text"), doctest::Contains("ghost"),
                         RuntimeFailure);
}

TEST_CASE("file provider: falls back to the content hash of the text") {
    TempDir dir("embfile");
    const std::string text = "hashed body";
    write_file(dir.file("emb.jsonl"),
               "{\"key\":\"" + content_hash(text) + "\",\"vector\":[9.0,8.0]}\n");
    FileEmbeddingProvider provider(dir.file("emb.jsonl"));
    auto e = provider.embed("not-a-key", text);
    CHECK(e.values == std::vector<double>{9.0, 8.0});
}

TEST_CASE("file provider: mixed dimensions fail at load time") {
    TempDir dir("embfile");
    write_file(dir.file("emb.jsonl"),
               "{\"key\":\"a1\",\"vector\":[1.0,2.0,3.0]}\n"
               "{\"key\":\"a2\",\"vector\":[1.0,2.0]}\n");
    CHECK_THROWS_AS(FileEmbeddingProvider provider(dir.file("emb.jsonl")), ValidationError);
}

TEST_CASE("cached provider: memoizes by content hash") {
    TempDir dir("cache");
    auto inner = std::make_shared<HashEmbeddingProvider>(32);
    CachedEmbeddingProvider cached(inner, dir.file("cache.jsonl"));
    auto first = cached.embed("k1", "same text");
    auto second = cached.embed("k2", "same text");  // same content, new key
    CHECK(cached.delegate_calls() == 1);
    CHECK(first.values == second.values);

    // a fresh wrapper over the same cache file serves from disk
    CachedEmbeddingProvider reopened(inner, dir.file("cache.jsonl"));
    auto third = reopened.embed("k3", "same text");
    CHECK(reopened.delegate_calls() == 0);
    CHECK(third.values == first.values);
}

TEST_CASE("cached provider: deleted cache file means recompute") {
    TempDir dir("cache");
    auto inner = std::make_shared<HashEmbeddingProvider>(32);
    {
        CachedEmbeddingProvider cached(inner, dir.file("cache.jsonl"));
        cached.embed("k", "body text");
        CHECK(cached.delegate_calls() == 1);
    }
    std::filesystem::remove(dir.file("cache.jsonl"));
    CachedEmbeddingProvider cached(inner, dir.file("cache.jsonl"));
    cached.embed("k", "body text");
    CHECK(cached.delegate_calls() == 1);
}

TEST_CASE("cached provider: corrupted entries are recomputed with a warning") {
    TempDir dir("cache");
    auto inner = std::make_shared<HashEmbeddingProvider>(8);
    {
        CachedEmbeddingProvider cached(inner, dir.file("cache.jsonl"));
        cached.embed("k", "stable text");
    }
    // flip a vector value without updating the checksum
    std::string raw = testsupport::read_file(dir.file("cache.jsonl"));
    const auto pos = raw.find("\"vector\":[");
    REQUIRE(pos != std::string::npos);
    raw.replace(pos + 10, 1, raw[pos + 10] == '9' ? "8" : "9");
    write_file(dir.file("cache.jsonl"), raw);

    std::vector<std::string> warnings;
    CachedEmbeddingProvider cached(inner, dir.file("cache.jsonl"), &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("checksum") != std::string::npos);
    auto recomputed = cached.embed("k", "stable text");
    CHECK(cached.delegate_calls() == 1);
    CHECK(recomputed.values == inner->embed("k", "stable text").values);
}

TEST_CASE("cache transparency: wrapped and unwrapped vectors are bit-identical") {
    TempDir dir("cache");
    auto inner = std::make_shared<HashEmbeddingProvider>(64);
    CachedEmbeddingProvider cached(inner, dir.file("cache.jsonl"));
    const char* texts[] = {"first body", "second body", "third body", "first body"};
    for (const char* text : texts) {
        auto direct = inner->embed("k", text);
        auto wrapped = cached.embed("k", text);
        CHECK(direct.values == wrapped.values);
        CHECK(direct.provider_id == wrapped.provider_id);
    }
    CHECK(cached.id() == inner->id());
    CHECK(cached.dimension() == inner->dimension());
}

TEST_CASE("l2_distance basics") {
    CHECK(l2_distance({0.0, 0.0}, {3.0, 4.0}) == doctest::Approx(5.0));
    CHECK_THROWS_AS(l2_distance({1.0}, {1.0, 2.0}), ValidationError);
}
