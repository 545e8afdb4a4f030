// Generates the bundled synthetic demo corpus: two regimes, two tickers,
// deterministic prices and templated news with a vocabulary shift between
// regimes. Usage: regimeval-make-fixture <output-dir>
//
// The committed files under data/fixtures/demo were produced by this tool;
// a unit test regenerates them and diffs, so the two cannot drift apart.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "regimeval/common.hpp"
#include "regimeval/corpus.hpp"
#include "regimeval/csv.hpp"
#include "regimeval/date.hpp"

namespace fs = std::filesystem;
using namespace regimeval;

namespace {

bool is_weekday(Date d) {
    // 1970-01-01 was a Thursday; day 0 -> 4 (Thu), Sat=6, Sun=0.
    const int dow = ((d.days % 7) + 7 + 4) % 7;
    return dow != 6 && dow != 0;
}

struct Template {
    const char* text;
    const char* tag;
};

// {T} = ticker, {W} = regime filler word.
constexpr Template kTemplates[] = {
    {"{T} shares surged after earnings beat expectations amid {W} optimism", "earnings"},
    {"{T} stock plunged as weak guidance missed forecasts during the {W} selloff", "earnings"},
    {"{T} reported strong quarterly profits driven by robust {W} demand", "earnings"},
    {"{T} warned of declining margins due to {W} headwinds and rising costs", "earnings"},
    {"analysts see {W} conditions shaping the outlook for {T} in coming quarters", ""},
    {"{T} announced a partnership targeting the {W} market", ""},
    {"trading in {T} was volatile amid broader {W} uncertainty", ""},
    {"{T} gained ground as investors weighed {W} developments", ""},
    {"{T} fell after a downgrade citing exposure to {W} risks", ""},
    {"regulators opened a review into {T} practices related to {W} rules", ""},
};

constexpr const char* kPreCovidWords[] = {"tariff", "trade", "dividend", "buyback",
                                          "manufacturing"};
constexpr const char* kCovidWords[] = {"pandemic", "lockdown", "stimulus", "quarantine",
                                       "vaccine"};

std::string expand(std::string text, const std::string& ticker, const std::string& word) {
    auto replace = [&text](const std::string& from, const std::string& to) {
        std::size_t pos;
        while ((pos = text.find(from)) != std::string::npos)
            text.replace(pos, from.size(), to);
    };
    replace("{T}", ticker);
    replace("{W}", word);
    return text;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: regimeval-make-fixture <output-dir>\n";
        return 1;
    }
    const fs::path out_dir(argv[1]);
    fs::create_directories(out_dir);

    const std::vector<std::pair<std::string, std::string>> tickers = {
        {"ALPHA", "Information Technology"}, {"BETA", "Health Care"}};

    // Prices: seeded random walk over weekdays, well before and after the
    // regime windows so every article finds an entry bar.
    const Date price_start = Date::from_ymd(2019, 10, 21);
    const Date price_end = Date::from_ymd(2020, 4, 30);
    std::mt19937_64 rng(20240901);
    std::normal_distribution<double> step(0.0, 0.9);
    {
        std::ofstream out(out_dir / "prices.csv", std::ios::binary);
        out << "ticker,date,close\n";
        for (const auto& [ticker, sector] : tickers) {
            double close = ticker == "ALPHA" ? 100.0 : 250.0;
            for (Date d = price_start; d <= price_end; d.days += 1) {
                if (!is_weekday(d)) continue;
                close *= 1.0 + step(rng) / 100.0;
                if (close < 5.0) close = 5.0;
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.2f", close);
                const std::string fields[] = {ticker, d.to_string(), buf};
                write_csv_row(out, fields);
            }
        }
    }

    // News: one article per ticker per weekday inside each regime window,
    // plus two out-of-window articles kept to exercise the regime gap.
    struct Window {
        Date start, end;
        const char* const* words;
        std::size_t word_count;
    };
    const Window windows[] = {
        {Date::from_ymd(2019, 11, 1), Date::from_ymd(2019, 12, 31), kPreCovidWords, 5},
        {Date::from_ymd(2020, 1, 1), Date::from_ymd(2020, 3, 23), kCovidWords, 5},
    };

    {
        std::ofstream out(out_dir / "news.csv", std::ios::binary);
        out << "id,ticker,sector,timestamp,event_tag,text\n";
        int serial = 0;
        auto write_article = [&](Date d, const std::pair<std::string, std::string>& tk,
                                 const Window* window) {
            const Template& tpl = kTemplates[serial % std::size(kTemplates)];
            const char* word =
                window ? window->words[serial % window->word_count] : "transition";
            char id[16];
            std::snprintf(id, sizeof(id), "a%04d", serial);
            ++serial;
            const std::string fields[] = {
                id,
                tk.first,
                tk.second,
                d.to_string() + "T14:30:00Z",
                tpl.tag,
                expand(tpl.text, tk.first == "ALPHA" ? "Alpha Corp" : "Beta Health", word)};
            write_csv_row(out, fields);
        };
        for (const auto& window : windows) {
            for (Date d = window.start; d <= window.end; d.days += 1) {
                if (!is_weekday(d)) continue;
                for (const auto& tk : tickers) write_article(d, tk, &window);
            }
        }
        write_article(Date::from_ymd(2020, 4, 8), tickers[0], nullptr);
        write_article(Date::from_ymd(2020, 4, 9), tickers[1], nullptr);
    }

    {
        std::ofstream out(out_dir / "config.json", std::ios::binary);
        out << R"({
  "data": {
    "news": "news.csv",
    "news_format": "csv",
    "prices": "prices.csv",
    "date_range": {"start": "2018-01-01", "end": "2023-12-31"}
  },
  "regimes": [
    {"name": "pre-covid", "start": "2019-11-01", "end": "2019-12-31"},
    {"name": "covid", "start": "2020-01-01", "end": "2020-03-23"}
  ],
  "features": {"max_features": 512},
  "models": [
    {"name": "ridge-text", "type": "baseline", "use_embeddings": false, "epochs": 120},
    {"name": "ridge-feature", "type": "baseline", "use_embeddings": true, "epochs": 120}
  ],
  "embeddings": {"provider": "hash", "dimension": 64},
  "entailment": {"provider": "stub"},
  "seed": 7,
  "output_dir": "out"
}
)";
    }

    std::cout << "fixture written to " << out_dir.string() << '\n';
    return 0;
}
