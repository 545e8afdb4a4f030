#include "regimeval/corpus.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "regimeval/common.hpp"
#include "test_support.hpp"

using namespace regimeval;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

PriceBar bar(const std::string& ticker, const std::string& date, double close) {
    return PriceBar{ticker, *Date::parse(date), close};
}

}  // namespace

TEST_CASE("timestamp parsing accepts the documented forms") {
    CHECK(Timestamp::parse("2020-02-15")->date() == *Date::parse("2020-02-15"));
    CHECK(Timestamp::parse("2020-02-15T09:30:00Z")->seconds ==
          Timestamp::parse("2020-02-15 09:30:00")->seconds);
    CHECK(Timestamp::parse("2020-02-15T09:30")->seconds ==
          Timestamp::parse("2020-02-15T09:30:00")->seconds);
    CHECK_FALSE(Timestamp::parse("2020-13-01").has_value());
    CHECK_FALSE(Timestamp::parse("2020-02-30").has_value());
    CHECK_FALSE(Timestamp::parse("not a date").has_value());
    // canonical form round-trips
    auto ts = *Timestamp::parse("2019-12-31T23:59:59Z");
    CHECK(Timestamp::parse(ts.to_string())->seconds == ts.seconds);
}

TEST_CASE("ingest_news: well-formed rows come back sorted by timestamp") {
    TempDir dir("ingest");
    write_file(dir.file("news.csv"),
               "id,ticker,sector,timestamp,event_tag,text\n"
               "a3,TST,Financials,2020-01-03,,third article body\n"
               "a1,TST,Financials,2020-01-01,,first article body\n"
               "a2,TST,Financials,2020-01-02,earnings,second article body\n");
    RejectionReport report;
    auto articles = ingest_news(dir.file("news.csv"), NewsFormat::Csv, {}, &report);
    REQUIRE(articles.size() == 3);
    CHECK(articles[0].id == "a1");
    CHECK(articles[1].id == "a2");
    CHECK(articles[2].id == "a3");
    CHECK(articles[1].event_tag == "earnings");
    CHECK(report.rejections.empty());
}

TEST_CASE("ingest_news: empty-text row is rejected with its row number") {
    TempDir dir("ingest");
    write_file(dir.file("news.csv"),
               "id,ticker,sector,timestamp,event_tag,text\n"
               "a1,TST,Financials,2020-01-01,,first article body\n"
               "a2,TST,Financials,2020-01-02,,   \n"
               "a3,TST,Financials,2020-01-03,,third article body\n");
    RejectionReport report;
    auto articles = ingest_news(dir.file("news.csv"), NewsFormat::Csv, {}, &report);
    CHECK(articles.size() == 2);
    REQUIRE(report.rejections.size() == 1);
    CHECK(report.rejections[0].row == 3);
    CHECK(report.rejections[0].reason == "empty text");
}

TEST_CASE("ingest_news: duplicate id is a hard error naming the id") {
    TempDir dir("ingest");
    write_file(dir.file("news.csv"),
               "id,ticker,sector,timestamp,event_tag,text\n"
               "a1,TST,Financials,2020-01-01,,first\n"
               "a1,TST,Financials,2020-01-02,,second\n");
    CHECK_THROWS_WITH_AS(ingest_news(dir.file("news.csv"), NewsFormat::Csv),
                         doctest::Contains("a1"), ValidationError);
}

TEST_CASE("ingest_news: zero valid rows / unreadable file") {
    TempDir dir("ingest");
    write_file(dir.file("empty.csv"), "id,ticker,sector,timestamp,event_tag,text\n");
    CHECK_THROWS_AS(ingest_news(dir.file("empty.csv"), NewsFormat::Csv), ValidationError);
    CHECK_THROWS_AS(ingest_news(dir.file("missing.csv"), NewsFormat::Csv), ValidationError);
}

TEST_CASE("ingest_news: out-of-range timestamps are rejected rows") {
    TempDir dir("ingest");
    write_file(dir.file("news.csv"),
               "id,ticker,sector,timestamp,event_tag,text\n"
               "a1,TST,Financials,2020-01-01,,inside the window\n"
               "a2,TST,Financials,1980-01-01,,too old\n");
    RejectionReport report;
    DateRange range{*Date::parse("2018-01-01"), *Date::parse("2023-12-31")};
    auto articles = ingest_news(dir.file("news.csv"), NewsFormat::Csv, range, &report);
    CHECK(articles.size() == 1);
    REQUIRE(report.rejections.size() == 1);
    CHECK(report.rejections[0].row == 3);
}

TEST_CASE("round-trip: ingest(emit(articles)) reproduces articles exactly") {
    std::mt19937_64 rng(11);
    std::vector<Article> articles;
    const char* texts[] = {"plain body", "comma, \"quoted\"", "line\nbreak and more",
                           "unicode \xc3\xa9 body"};
    for (int i = 0; i < 24; ++i) {
        Article a = testsupport::make_article(
            "id" + std::to_string(i), i % 2 ? "AAA" : "BBB",
            "2020-01-0" + std::to_string(1 + i % 9) + "T0" + std::to_string(i % 10) +
                ":15:00Z",
            texts[i % 4], i % 3 ? "" : "earnings");
        articles.push_back(a);
    }
    std::sort(articles.begin(), articles.end(), [](const Article& a, const Article& b) {
        return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.id < b.id;
    });

    for (NewsFormat format : {NewsFormat::Csv, NewsFormat::Jsonl}) {
        TempDir dir("roundtrip");
        const std::string path =
            dir.file(format == NewsFormat::Csv ? "news.csv" : "news.jsonl");
        emit_news(path, format, articles);
        auto back = ingest_news(path, format);
        REQUIRE(back.size() == articles.size());
        for (std::size_t i = 0; i < articles.size(); ++i) CHECK(back[i] == articles[i]);
    }
}

TEST_CASE("compute_returns: close-to-close percent definition") {
    SUBCASE("plus two percent") {
        auto table = compute_returns({bar("T", "2020-01-01", 100.0), bar("T", "2020-01-02", 102.0)});
        CHECK(table.at("T", *Date::parse("2020-01-01")).value() == doctest::Approx(2.0));
    }
    SUBCASE("flat close gives zero") {
        auto table = compute_returns({bar("T", "2020-01-01", 50.0), bar("T", "2020-01-02", 50.0)});
        CHECK(table.at("T", *Date::parse("2020-01-01")).value() == 0.0);
    }
    SUBCASE("three bars give two entries, hand-evaluated") {
        auto table = compute_returns({bar("T", "2020-01-01", 100.0),
                                      bar("T", "2020-01-02", 110.0),
                                      bar("T", "2020-01-03", 99.0)});
        CHECK(table.size() == 2);
        CHECK(table.at("T", *Date::parse("2020-01-01")).value() == doctest::Approx(10.0));
        CHECK(table.at("T", *Date::parse("2020-01-02")).value() == doctest::Approx(-10.0));
        CHECK_FALSE(table.at("T", *Date::parse("2020-01-03")).has_value());
    }
}

TEST_CASE("compute_returns: validation and degenerate tickers") {
    CHECK_THROWS_AS(compute_returns({bar("T", "2020-01-01", -1.0)}), ValidationError);
    CHECK_THROWS_AS(compute_returns({bar("T", "2020-01-01", 0.0)}), ValidationError);
    CHECK_THROWS_AS(compute_returns({bar("T", "2020-01-01", 1.0), bar("T", "2020-01-01", 2.0)}),
                    ValidationError);
    std::vector<std::string> warnings;
    auto table = compute_returns({bar("T", "2020-01-01", 10.0)}, &warnings);
    CHECK(table.size() == 0);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("T") != std::string::npos);
}

TEST_CASE("align: article joins the movement starting at the first bar on/after its date") {
    // Tue article, bars Tue/Wed -> Tue->Wed movement.
    auto table = compute_returns({bar("T", "2020-01-07", 100.0), bar("T", "2020-01-08", 103.0)});
    std::vector<Article> articles = {
        testsupport::make_article("a1", "T", "2020-01-07T10:00:00Z", "tuesday news")};
    auto result = align(articles, table);
    REQUIRE(result.samples.size() == 1);
    CHECK(result.samples[0].next_day_return == doctest::Approx(3.0));
    CHECK(result.samples[0].entry_date == *Date::parse("2020-01-07"));
    CHECK(result.samples[0].realization_date == *Date::parse("2020-01-08"));
    // invariant: article date strictly precedes the realization day
    CHECK(result.samples[0].article.timestamp.date() < result.samples[0].realization_date);
}

TEST_CASE("align: weekend article attaches to the next trading day's movement") {
    // Sat article, bars Mon/Tue on a toy calendar -> Mon->Tue movement.
    auto table = compute_returns({bar("T", "2020-01-13", 200.0), bar("T", "2020-01-14", 190.0)});
    std::vector<Article> articles = {
        testsupport::make_article("a1", "T", "2020-01-11", "saturday news")};
    auto result = align(articles, table);
    REQUIRE(result.samples.size() == 1);
    CHECK(result.samples[0].next_day_return == doctest::Approx(-5.0));
    CHECK(result.samples[0].entry_date == *Date::parse("2020-01-13"));
    CHECK(result.samples[0].realization_date == *Date::parse("2020-01-14"));
}

TEST_CASE("align: article with no matching return is excluded and counted") {
    auto table = compute_returns({bar("T", "2020-01-07", 100.0), bar("T", "2020-01-08", 103.0)});
    std::vector<Article> articles = {
        testsupport::make_article("a1", "MISSING", "2020-01-07", "no price data"),
        testsupport::make_article("a2", "T", "2020-01-08", "after the last movement"),
        testsupport::make_article("a3", "T", "2020-01-07", "fine")};
    auto result = align(articles, table);
    CHECK(result.samples.size() == 1);
    CHECK(result.excluded_ids.size() == 2);
}

TEST_CASE("align invariant: recomputing the return from raw bars matches") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> jump(-0.05, 0.05);
    std::vector<PriceBar> bars;
    double close = 120.0;
    for (int day = 1; day <= 28; ++day) {
        close *= 1.0 + jump(rng);
        char date[16];
        std::snprintf(date, sizeof(date), "2020-03-%02d", day);
        bars.push_back(bar("T", date, close));
    }
    std::vector<Article> articles;
    for (int day = 1; day <= 26; ++day) {
        char ts[32];
        std::snprintf(ts, sizeof(ts), "2020-03-%02dT08:00:00Z", day);
        articles.push_back(
            testsupport::make_article("a" + std::to_string(day), "T", ts, "daily body"));
    }
    auto table = compute_returns(bars);
    auto result = align(articles, table);
    REQUIRE(result.samples.size() == articles.size());
    for (const auto& sample : result.samples) {
        double entry_close = 0.0, realization_close = 0.0;
        for (const auto& b : bars) {
            if (b.date == sample.entry_date) entry_close = b.close;
            if (b.date == sample.realization_date) realization_close = b.close;
        }
        const double expected = 100.0 * (realization_close - entry_close) / entry_close;
        CHECK(sample.next_day_return ==
              doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("assign_regime follows the shipped windows") {
    auto windows = default_regime_windows();
    validate_regime_windows(windows);
    CHECK(assign_regime(*Date::parse("2020-02-15"), windows).value() == "covid");
    CHECK_FALSE(assign_regime(*Date::parse("2021-06-01"), windows).has_value());
    // end dates are inclusive
    CHECK(assign_regime(*Date::parse("2020-03-23"), windows).value() == "covid");
    CHECK(assign_regime(*Date::parse("2019-12-31"), windows).value() == "pre-covid");
}

TEST_CASE("validate_regime_windows rejects overlap and inverted ranges") {
    std::vector<RegimeWindow> overlapping = {
        {"a", *Date::parse("2020-01-01"), *Date::parse("2020-02-01")},
        {"b", *Date::parse("2020-02-01"), *Date::parse("2020-03-01")}};
    CHECK_THROWS_AS(validate_regime_windows(overlapping), ValidationError);
    std::vector<RegimeWindow> inverted = {
        {"a", *Date::parse("2020-02-01"), *Date::parse("2020-01-01")}};
    CHECK_THROWS_AS(validate_regime_windows(inverted), ValidationError);
    std::vector<RegimeWindow> duplicate = {
        {"a", *Date::parse("2020-01-01"), *Date::parse("2020-01-31")},
        {"a", *Date::parse("2020-03-01"), *Date::parse("2020-03-31")}};
    CHECK_THROWS_AS(validate_regime_windows(duplicate), ValidationError);
}

TEST_CASE("regime assignment partitions the input: no loss, no duplication") {
    auto windows = default_regime_windows();
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> day_offset(0, 365 * 5);
    const Date base = *Date::parse("2018-06-01");
    std::size_t assigned = 0, unassigned = 0;
    for (int i = 0; i < 500; ++i) {
        Date d{base.days + day_offset(rng)};
        int hits = 0;
        for (const auto& w : windows)
            if (w.start <= d && d <= w.end) ++hits;
        auto result = assign_regime(d, windows);
        CHECK(hits <= 1);
        CHECK(result.has_value() == (hits == 1));
        result ? ++assigned : ++unassigned;
    }
    CHECK(assigned + unassigned == 500);
}

TEST_CASE("chrono_split: floor rule sizes") {
    auto make_samples = [](int n) {
        std::vector<AlignedSample> samples;
        for (int i = 0; i < n; ++i) {
            char ts[32];
            std::snprintf(ts, sizeof(ts), "2020-01-%02dT00:00:00Z", i + 1);
            samples.push_back(testsupport::make_sample("s" + std::to_string(i), ts, "body"));
        }
        return samples;
    };
    SUBCASE("10 -> 6/2/2") {
        auto split = chrono_split(make_samples(10));
        CHECK(split.train.size() == 6);
        CHECK(split.validation.size() == 2);
        CHECK(split.test.size() == 2);
    }
    SUBCASE("5 -> 3/1/1") {
        auto split = chrono_split(make_samples(5));
        CHECK(split.train.size() == 3);
        CHECK(split.validation.size() == 1);
        CHECK(split.test.size() == 1);
    }
    SUBCASE("fewer than 3 samples fail") {
        CHECK_THROWS_AS(chrono_split(make_samples(2)), ValidationError);
    }
}

TEST_CASE("chrono_split: timestamp ties break by id") {
    std::vector<AlignedSample> samples;
    // Five samples; s2/s3 share the timestamp that straddles the 3/1/1
    // train boundary.
    samples.push_back(testsupport::make_sample("s0", "2020-01-01", "body"));
    samples.push_back(testsupport::make_sample("s1", "2020-01-02", "body"));
    samples.push_back(testsupport::make_sample("s3", "2020-01-03", "body"));
    samples.push_back(testsupport::make_sample("s2", "2020-01-03", "body"));
    samples.push_back(testsupport::make_sample("s4", "2020-01-04", "body"));
    auto split = chrono_split(samples);
    REQUIRE(split.train.size() == 3);
    CHECK(split.train.back().article.id == "s2");
    CHECK(split.validation.front().article.id == "s3");
}

TEST_CASE("chrono_split is deterministic and order-invariant") {
    std::mt19937_64 rng(23);
    std::vector<AlignedSample> samples;
    for (int i = 0; i < 41; ++i) {
        char ts[40];
        std::snprintf(ts, sizeof(ts), "2020-02-%02dT%02d:00:00Z", 1 + i % 28, i % 24);
        samples.push_back(testsupport::make_sample("s" + std::to_string(i), ts, "body"));
    }
    auto reference = chrono_split(samples);
    for (int round = 0; round < 5; ++round) {
        std::shuffle(samples.begin(), samples.end(), rng);
        auto split = chrono_split(samples);
        REQUIRE(split.train.size() == reference.train.size());
        for (std::size_t i = 0; i < split.train.size(); ++i)
            CHECK(split.train[i].article.id == reference.train[i].article.id);
        for (std::size_t i = 0; i < split.test.size(); ++i)
            CHECK(split.test[i].article.id == reference.test[i].article.id);
    }
    reference.check_chronology();
}
