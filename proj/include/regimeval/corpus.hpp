#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "regimeval/date.hpp"

namespace regimeval {

inline constexpr std::array<std::string_view, 11> kGicsSectors = {
    "Information Technology", "Health Care",    "Financials", "Consumer Discretionary",
    "Communication Services", "Industrials",    "Consumer Staples",
    "Energy",                 "Utilities",      "Real Estate", "Materials"};

struct Article {
    std::string id;
    std::string ticker;
    std::string sector;
    Timestamp timestamp;
    std::string event_tag;  // empty = untagged
    std::string text;

    bool operator==(const Article&) const = default;
};

struct PriceBar {
    std::string ticker;
    Date date;
    double close = 0.0;
};

// An article joined to the next-day percent return it predicts. The return
// runs from the first bar on/after the article's date (entry) to the bar
// after that (realization).
struct AlignedSample {
    Article article;
    double next_day_return = 0.0;
    Date entry_date;
    Date realization_date;
};

struct RegimeWindow {
    std::string name;
    Date start;  // inclusive
    Date end;    // inclusive
};

struct SplitSet {
    std::vector<AlignedSample> train;
    std::vector<AlignedSample> validation;
    std::vector<AlignedSample> test;

    // Throws RuntimeFailure if any test timestamp precedes any train
    // timestamp (and likewise across the validation boundary).
    void check_chronology() const;
};

enum class NewsFormat { Csv, Jsonl };

std::optional<NewsFormat> parse_news_format(std::string_view s);

struct RejectionReport {
    struct Rejection {
        std::size_t row = 0;  // 1-based line in the source file
        std::string reason;
    };
    std::vector<Rejection> rejections;
    std::size_t accepted = 0;
    std::size_t total = 0;
};

// Reads and validates articles; output is sorted by (timestamp, id).
// Rows failing validation land in `report`; a duplicate id or a file with
// zero valid rows is a hard error.
std::vector<Article> ingest_news(const std::string& path, NewsFormat format,
                                 const DateRange& range = {},
                                 RejectionReport* report = nullptr);

// Inverse of ingest_news for the same schema; used by the ingest command
// and the round-trip property.
void emit_news(const std::string& path, NewsFormat format, std::span<const Article> articles);

// Per-ticker next-day returns in percent, keyed by entry-bar date:
// value = 100 * (close(next bar) - close(bar)) / close(bar).
struct ReturnTable {
    struct Entry {
        Date entry;
        Date realization;
        double value = 0.0;
    };
    std::map<std::string, std::vector<Entry>> by_ticker;  // entries sorted by date

    const Entry* first_on_or_after(const std::string& ticker, Date d) const;
    std::size_t size() const;
    std::optional<double> at(const std::string& ticker, Date entry) const;
};

ReturnTable compute_returns(std::vector<PriceBar> bars,
                            std::vector<std::string>* warnings = nullptr);

std::vector<PriceBar> read_price_csv(const std::string& path);

struct AlignmentResult {
    std::vector<AlignedSample> samples;  // keeps the article order
    std::vector<std::string> excluded_ids;
};

AlignmentResult align(std::span<const Article> articles, const ReturnTable& returns);

// Throws ValidationError on start > end, overlapping windows, duplicate or
// empty names.
void validate_regime_windows(std::span<const RegimeWindow> windows);

std::optional<std::string> assign_regime(Date d, std::span<const RegimeWindow> windows);

// Table 1 defaults.
std::vector<RegimeWindow> default_regime_windows();

std::vector<RegimeWindow> load_regime_windows(const std::string& path);
void save_regime_windows(const std::string& path, std::span<const RegimeWindow> windows);

struct SplitRatios {
    double train = 0.6;
    double validation = 0.2;
    double test = 0.2;
};

// Chronological 60/20/20 split; ties on timestamp break by article id.
// Train and validation sizes are floor(ratio * n), the remainder is test.
SplitSet chrono_split(std::span<const AlignedSample> samples, SplitRatios ratios = {});

}  // namespace regimeval
