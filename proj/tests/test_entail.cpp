#include "regimeval/entail.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "regimeval/common.hpp"
#include "test_support.hpp"

using namespace regimeval;
using nlohmann::json;
using testsupport::TempDir;

TEST_CASE("build_hypothesis follows the sign of the prediction") {
    CHECK(build_hypothesis(0.7) == "Stock price will increase");
    CHECK(build_hypothesis(-1.2) == "Stock price will decrease");
    CHECK(build_hypothesis(0.0) == "Stock price will decrease");
    CHECK_THROWS_AS(build_hypothesis(std::nan("")), ValidationError);
    CHECK_THROWS_AS(build_hypothesis(INFINITY), ValidationError);
}

TEST_CASE("verdict_to_score mapping with boundary confidences") {
    CHECK(verdict_to_score({EntailLabel::Yes, 0.9}) == 1.0);
    CHECK(verdict_to_score({EntailLabel::No, 0.99}) == 0.0);
    CHECK(verdict_to_score({EntailLabel::Yes, 0.6}) == 0.5);
    CHECK(verdict_to_score({EntailLabel::Uncertain, 0.0}) == 0.5);
    // boundaries around the 80% threshold
    CHECK(verdict_to_score({EntailLabel::Yes, 0.79}) == 0.5);
    CHECK(verdict_to_score({EntailLabel::Yes, 0.8}) == 0.5);
    CHECK(verdict_to_score({EntailLabel::Yes, 0.81}) == 1.0);
    CHECK(verdict_to_score({EntailLabel::No, 0.79}) == 0.0);
    CHECK(verdict_to_score({EntailLabel::No, 0.81}) == 0.0);
    CHECK(verdict_to_score({EntailLabel::Uncertain, 0.79}) == 0.5);
    CHECK(verdict_to_score({EntailLabel::Uncertain, 0.81}) == 0.5);
}

TEST_CASE("verdict_to_score is monotone in confidence for Yes") {
    double previous = 0.0;
    for (double confidence = 0.0; confidence <= 1.0; confidence += 0.01) {
        const double score = verdict_to_score({EntailLabel::Yes, confidence});
        CHECK(score >= previous);
        previous = score;
    }
}

TEST_CASE("parse_verdict: keyword plus optional confidence") {
    auto yes = parse_verdict("Yes (confidence 92%)");
    CHECK(yes.label == EntailLabel::Yes);
    CHECK(yes.confidence == doctest::Approx(0.92));
    CHECK_FALSE(yes.parse_warning);

    auto uncertain = parse_verdict("Uncertain \xe2\x80\x94 conflicting signals");
    CHECK(uncertain.label == EntailLabel::Uncertain);
    CHECK(uncertain.confidence == 0.0);

    auto fallback = parse_verdict("the premise neither supports nor contradicts it");
    CHECK(fallback.label == EntailLabel::Uncertain);
    CHECK(fallback.parse_warning);

    // keywords only match whole words
    auto answer_no = parse_verdict("Answer: No. There is nothing supportive here.");
    CHECK(answer_no.label == EntailLabel::No);
    CHECK(answer_no.confidence == 1.0);
    auto not_yes = parse_verdict("nothing yesterday supports it: no");
    CHECK(not_yes.label == EntailLabel::No);

    auto decimal = parse_verdict("yes, confidence: 0.85");
    CHECK(decimal.label == EntailLabel::Yes);
    CHECK(decimal.confidence == doctest::Approx(0.85));
}

TEST_CASE("stub provider: direction agreement with the causal lexicon") {
    StubEntailmentProvider stub;
    SUBCASE("net positive cues agree with the increase hypothesis") {
        auto v = stub.entail("Profits surged on strong demand", kHypothesisIncrease);
        REQUIRE(v.has_value());
        CHECK(v->label == EntailLabel::Yes);
        CHECK(v->confidence == doctest::Approx(0.9));
        CHECK(verdict_to_score(*v) == 1.0);
    }
    SUBCASE("cue-free premise is uncertain") {
        auto v = stub.entail("The meeting is on Tuesday", kHypothesisIncrease);
        REQUIRE(v.has_value());
        CHECK(v->label == EntailLabel::Uncertain);
        CHECK(verdict_to_score(*v) == 0.5);
    }
    SUBCASE("net negative cues reject the increase hypothesis") {
        auto v = stub.entail("Shares plunged on weak guidance", kHypothesisIncrease);
        REQUIRE(v.has_value());
        CHECK(v->label == EntailLabel::No);
        CHECK(verdict_to_score(*v) == 0.0);
    }
}

TEST_CASE("stub antisymmetry: flipping the hypothesis swaps Yes and No") {
    StubEntailmentProvider stub;
    const char* premises[] = {"Profits surged on strong demand",
                              "Shares plunged on weak guidance",
                              "The meeting is on Tuesday",
                              "record rally amid fears and losses"};
    for (const char* premise : premises) {
        auto up = stub.entail(premise, kHypothesisIncrease);
        auto down = stub.entail(premise, kHypothesisDecrease);
        REQUIRE(up.has_value());
        REQUIRE(down.has_value());
        if (up->label == EntailLabel::Uncertain) {
            CHECK(down->label == EntailLabel::Uncertain);
        } else {
            CHECK(((up->label == EntailLabel::Yes && down->label == EntailLabel::No) ||
                   (up->label == EntailLabel::No && down->label == EntailLabel::Yes)));
        }
    }
}

TEST_CASE("render_prompt uses the published template") {
    const std::string prompt =
        render_prompt(kDefaultPromptTemplate, "Profits rose.", "Stock price will increase");
    CHECK(prompt == "News: \"Profits rose.\"\n"
                    "Prediction: \"Stock price will increase\"\n"
                    "Question: Is the prediction logically supported by the news?\n"
                    "Answer: [Yes/No/Uncertain]");
}

namespace {

struct LocalEntailmentServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;
    std::atomic<int> hits{0};

    explicit LocalEntailmentServer(std::function<std::string(const std::string&)> reply) {
        server.Post("/v1/chat/completions", [this, reply](const httplib::Request& req,
                                                          httplib::Response& res) {
            ++hits;
            const json body = json::parse(req.body);
            const std::string prompt = body["messages"][0]["content"].get<std::string>();
            json out;
            out["choices"] =
                json::array({json{{"message", json{{"role", "assistant"},
                                                   {"content", reply(prompt)}}}}});
            res.set_content(out.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalEntailmentServer() {
        server.stop();
        thread.join();
    }
    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    }
};

RemoteEntailmentConfig remote_config(const std::string& endpoint,
                                     const std::string& log_path) {
    RemoteEntailmentConfig config;
    config.endpoint = endpoint;
    config.model = "test-model";
    config.replay_log_path = log_path;
    config.timeout_seconds = 5;
    config.max_retries = 1;
    config.backoff_initial_ms = 10;
    config.request_budget = 50;
    return config;
}

}  // namespace

TEST_CASE("remote provider: round-trip against a local server, then replay") {
    TempDir dir("remote");
    LocalEntailmentServer server([](const std::string& prompt) {
        // agree when the hypothesis says increase, refuse otherwise
        if (prompt.find("increase") != std::string::npos)
            return std::string("Yes (confidence 92%)");
        return std::string("No, confidence 85%");
    });

    const std::string log_path = dir.file("replay.jsonl");
    std::vector<std::pair<std::string, std::string>> calls = {
        {"Profits are up strongly.", kHypothesisIncrease},
        {"Everything is collapsing.", kHypothesisDecrease},
        {"Mixed picture.", kHypothesisIncrease},
    };
    std::vector<EntailmentVerdict> recorded;
    {
        RemoteEntailmentProvider provider(remote_config(server.endpoint(), log_path));
        CHECK(provider.id() == "remote:test-model");
        for (const auto& [premise, hypothesis] : calls) {
            auto verdict = provider.entail(premise, hypothesis);
            REQUIRE(verdict.has_value());
            recorded.push_back(*verdict);
        }
        CHECK(provider.requests_made() == calls.size());
    }
    CHECK(recorded[0].label == EntailLabel::Yes);
    CHECK(recorded[0].confidence == doctest::Approx(0.92));
    CHECK(recorded[1].label == EntailLabel::No);
    CHECK(recorded[2].label == EntailLabel::Yes);

    // replay reproduces verdicts bit-identically, no server involved
    ReplayEntailmentProvider replay(log_path);
    for (std::size_t i = 0; i < calls.size(); ++i) {
        auto verdict = replay.entail(calls[i].first, calls[i].second);
        REQUIRE(verdict.has_value());
        CHECK(verdict->label == recorded[i].label);
        CHECK(verdict->confidence == recorded[i].confidence);
    }
    CHECK_THROWS_AS(replay.entail("never seen premise", kHypothesisIncrease),
                    RuntimeFailure);
}

TEST_CASE("remote provider: unreachable endpoint yields unevaluated after retries") {
    TempDir dir("remote");
    // nothing listens on this port
    RemoteEntailmentConfig config =
        remote_config("http://127.0.0.1:9/v1/chat/completions", dir.file("replay.jsonl"));
    config.timeout_seconds = 1;
    config.max_retries = 1;
    RemoteEntailmentProvider provider(config);
    auto verdict = provider.entail("some premise", kHypothesisIncrease);
    CHECK_FALSE(verdict.has_value());
}

TEST_CASE("remote provider: request budget is enforced") {
    TempDir dir("remote");
    LocalEntailmentServer server([](const std::string&) { return std::string("Yes"); });
    RemoteEntailmentConfig config = remote_config(server.endpoint(), dir.file("replay.jsonl"));
    config.request_budget = 2;
    RemoteEntailmentProvider provider(config);
    CHECK(provider.entail("one", kHypothesisIncrease).has_value());
    CHECK(provider.entail("two", kHypothesisIncrease).has_value());
    CHECK_THROWS_AS(provider.entail("three", kHypothesisIncrease), RuntimeFailure);
}

TEST_CASE("remote provider: unparseable response becomes Uncertain with a warning") {
    TempDir dir("remote");
    LocalEntailmentServer server(
        [](const std::string&) { return std::string("inscrutable rambling"); });
    RemoteEntailmentProvider provider(
        remote_config(server.endpoint(), dir.file("replay.jsonl")));
    auto verdict = provider.entail("premise", kHypothesisIncrease);
    REQUIRE(verdict.has_value());
    CHECK(verdict->label == EntailLabel::Uncertain);
    CHECK(verdict->parse_warning);
}
