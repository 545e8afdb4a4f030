#include "regimeval/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "regimeval/common.hpp"
#include "regimeval/csv.hpp"

namespace regimeval {

using nlohmann::json;

namespace {

struct RawArticleRow {
    std::size_t line = 0;
    std::string id, ticker, sector, timestamp, event_tag, text;
};

std::optional<Article> validate_article(const RawArticleRow& row, const DateRange& range,
                                        std::string* reason) {
    if (trim(row.id).empty()) {
        *reason = "missing id";
        return std::nullopt;
    }
    if (trim(row.ticker).empty()) {
        *reason = "missing ticker";
        return std::nullopt;
    }
    auto ts = Timestamp::parse(row.timestamp);
    if (!ts) {
        *reason = "unparseable timestamp '" + row.timestamp + "'";
        return std::nullopt;
    }
    if (!range.contains(ts->date())) {
        *reason = "timestamp " + ts->date().to_string() + " outside configured range [" +
                  range.start.to_string() + ", " + range.end.to_string() + "]";
        return std::nullopt;
    }
    if (trim(row.text).empty()) {
        *reason = "empty text";
        return std::nullopt;
    }
    Article a;
    a.id = std::string(trim(row.id));
    a.ticker = std::string(trim(row.ticker));
    a.sector = std::string(trim(row.sector));
    a.timestamp = *ts;
    a.event_tag = std::string(trim(row.event_tag));
    a.text = row.text;
    return a;
}

std::vector<RawArticleRow> read_news_csv(const std::string& path, RejectionReport* report) {
    CsvTable table = read_csv_file(path);
    static constexpr const char* kRequired[] = {"id", "ticker", "sector", "timestamp", "text"};
    for (const char* col : kRequired) {
        if (table.column(col) < 0)
            throw ValidationError("news CSV " + path + ": missing column '" + col + "'");
    }
    const int id_col = table.column("id");
    const int ticker_col = table.column("ticker");
    const int sector_col = table.column("sector");
    const int ts_col = table.column("timestamp");
    const int tag_col = table.column("event_tag");
    const int text_col = table.column("text");

    std::vector<RawArticleRow> rows;
    rows.reserve(table.rows.size());
    for (const auto& r : table.rows) {
        const std::size_t need = static_cast<std::size_t>(std::max(
            {id_col, ticker_col, sector_col, ts_col, text_col, tag_col < 0 ? 0 : tag_col}));
        if (r.fields.size() <= need) {
            if (report) report->rejections.push_back({r.line, "wrong number of columns"});
            continue;
        }
        RawArticleRow raw;
        raw.line = r.line;
        raw.id = r.fields[id_col];
        raw.ticker = r.fields[ticker_col];
        raw.sector = r.fields[sector_col];
        raw.timestamp = r.fields[ts_col];
        if (tag_col >= 0) raw.event_tag = r.fields[tag_col];
        raw.text = r.fields[text_col];
        rows.push_back(std::move(raw));
    }
    if (report) report->total = table.rows.size();
    return rows;
}

std::vector<RawArticleRow> read_news_jsonl(const std::string& path, RejectionReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::vector<RawArticleRow> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t total = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++total;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            if (report) report->rejections.push_back({line_no, "invalid JSON object"});
            continue;
        }
        auto str = [&obj](const char* key) -> std::string {
            auto it = obj.find(key);
            if (it == obj.end() || !it->is_string()) return {};
            return it->get<std::string>();
        };
        RawArticleRow raw;
        raw.line = line_no;
        raw.id = str("id");
        raw.ticker = str("ticker");
        raw.sector = str("sector");
        raw.timestamp = str("timestamp");
        raw.event_tag = str("event_tag");
        raw.text = str("text");
        rows.push_back(std::move(raw));
    }
    if (report) report->total = total;
    return rows;
}

}  // namespace

std::optional<NewsFormat> parse_news_format(std::string_view s) {
    if (s == "csv") return NewsFormat::Csv;
    if (s == "jsonl") return NewsFormat::Jsonl;
    return std::nullopt;
}

std::vector<Article> ingest_news(const std::string& path, NewsFormat format,
                                 const DateRange& range, RejectionReport* report) {
    RejectionReport local;
    if (!report) report = &local;

    std::vector<RawArticleRow> raw = format == NewsFormat::Csv ? read_news_csv(path, report)
                                                               : read_news_jsonl(path, report);
    std::vector<Article> articles;
    std::set<std::string> seen_ids;
    for (const auto& row : raw) {
        std::string reason;
        auto article = validate_article(row, range, &reason);
        if (!article) {
            report->rejections.push_back({row.line, reason});
            continue;
        }
        if (!seen_ids.insert(article->id).second)
            throw ValidationError("duplicate article id '" + article->id + "' at row " +
                                  std::to_string(row.line));
        articles.push_back(std::move(*article));
    }
    report->accepted = articles.size();
    if (articles.empty()) throw ValidationError("no valid articles in " + path);

    std::sort(articles.begin(), articles.end(), [](const Article& a, const Article& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.id < b.id;
    });
    return articles;
}

void emit_news(const std::string& path, NewsFormat format, std::span<const Article> articles) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write file: " + path);
    if (format == NewsFormat::Csv) {
        out << "id,ticker,sector,timestamp,event_tag,text\n";
        for (const auto& a : articles) {
            const std::string fields[] = {a.id,        a.ticker,    a.sector,
                                          a.timestamp.to_string(), a.event_tag, a.text};
            write_csv_row(out, fields);
        }
    } else {
        for (const auto& a : articles) {
            json obj;
            obj["id"] = a.id;
            obj["ticker"] = a.ticker;
            obj["sector"] = a.sector;
            obj["timestamp"] = a.timestamp.to_string();
            if (!a.event_tag.empty()) obj["event_tag"] = a.event_tag;
            obj["text"] = a.text;
            out << obj.dump() << '\n';
        }
    }
}

const ReturnTable::Entry* ReturnTable::first_on_or_after(const std::string& ticker,
                                                         Date d) const {
    auto it = by_ticker.find(ticker);
    if (it == by_ticker.end()) return nullptr;
    const auto& entries = it->second;
    auto pos = std::lower_bound(entries.begin(), entries.end(), d,
                                [](const Entry& e, Date day) { return e.entry < day; });
    if (pos == entries.end()) return nullptr;
    return &*pos;
}

std::size_t ReturnTable::size() const {
    std::size_t n = 0;
    for (const auto& [ticker, entries] : by_ticker) n += entries.size();
    return n;
}

std::optional<double> ReturnTable::at(const std::string& ticker, Date entry) const {
    const Entry* e = first_on_or_after(ticker, entry);
    if (!e || e->entry != entry) return std::nullopt;
    return e->value;
}

ReturnTable compute_returns(std::vector<PriceBar> bars, std::vector<std::string>* warnings) {
    std::map<std::string, std::vector<PriceBar>> grouped;
    for (auto& bar : bars) {
        if (!(bar.close > 0.0))
            throw ValidationError("non-positive close for " + bar.ticker + " on " +
                                  bar.date.to_string());
        grouped[bar.ticker].push_back(std::move(bar));
    }

    ReturnTable table;
    for (auto& [ticker, series] : grouped) {
        std::sort(series.begin(), series.end(),
                  [](const PriceBar& a, const PriceBar& b) { return a.date < b.date; });
        for (std::size_t i = 1; i < series.size(); ++i) {
            if (series[i].date == series[i - 1].date)
                throw ValidationError("duplicate price bar for " + ticker + " on " +
                                      series[i].date.to_string());
        }
        if (series.size() < 2) {
            if (warnings)
                warnings->push_back("ticker " + ticker + ": only one bar, no returns computed");
            continue;
        }
        auto& entries = table.by_ticker[ticker];
        entries.reserve(series.size() - 1);
        for (std::size_t i = 0; i + 1 < series.size(); ++i) {
            const double r =
                100.0 * (series[i + 1].close - series[i].close) / series[i].close;
            entries.push_back({series[i].date, series[i + 1].date, r});
        }
    }
    return table;
}

std::vector<PriceBar> read_price_csv(const std::string& path) {
    CsvTable table = read_csv_file(path);
    const int ticker_col = table.column("ticker");
    const int date_col = table.column("date");
    const int close_col = table.column("close");
    if (ticker_col < 0 || date_col < 0 || close_col < 0)
        throw ValidationError("price CSV " + path + ": expected columns ticker,date,close");

    std::vector<PriceBar> bars;
    bars.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        if (row.fields.size() < 3)
            throw ValidationError(path + ":" + std::to_string(row.line) +
                                  ": wrong number of columns");
        auto date = Date::parse(row.fields[date_col]);
        if (!date)
            throw ValidationError(path + ":" + std::to_string(row.line) + ": bad date '" +
                                  row.fields[date_col] + "'");
        auto close = parse_double(row.fields[close_col]);
        if (!close)
            throw ValidationError(path + ":" + std::to_string(row.line) + ": bad close '" +
                                  row.fields[close_col] + "'");
        bars.push_back({row.fields[ticker_col], *date, *close});
    }
    return bars;
}

AlignmentResult align(std::span<const Article> articles, const ReturnTable& returns) {
    AlignmentResult result;
    result.samples.reserve(articles.size());
    for (const auto& article : articles) {
        const ReturnTable::Entry* entry =
            returns.first_on_or_after(article.ticker, article.timestamp.date());
        if (!entry) {
            result.excluded_ids.push_back(article.id);
            continue;
        }
        AlignedSample sample;
        sample.article = article;
        sample.next_day_return = entry->value;
        sample.entry_date = entry->entry;
        sample.realization_date = entry->realization;
        result.samples.push_back(std::move(sample));
    }
    return result;
}

void validate_regime_windows(std::span<const RegimeWindow> windows) {
    std::set<std::string> names;
    for (const auto& w : windows) {
        if (w.name.empty()) throw ValidationError("regime window with empty name");
        if (!names.insert(w.name).second)
            throw ValidationError("duplicate regime name '" + w.name + "'");
        if (w.end < w.start)
            throw ValidationError("regime '" + w.name + "': start " + w.start.to_string() +
                                  " after end " + w.end.to_string());
    }
    for (std::size_t i = 0; i < windows.size(); ++i) {
        for (std::size_t j = i + 1; j < windows.size(); ++j) {
            const auto& a = windows[i];
            const auto& b = windows[j];
            if (a.start <= b.end && b.start <= a.end)
                throw ValidationError("regime windows '" + a.name + "' and '" + b.name +
                                      "' overlap");
        }
    }
}

std::optional<std::string> assign_regime(Date d, std::span<const RegimeWindow> windows) {
    for (const auto& w : windows) {
        if (w.start <= d && d <= w.end) return w.name;
    }
    return std::nullopt;
}

std::vector<RegimeWindow> default_regime_windows() {
    return {
        {"pre-covid", Date::from_ymd(2019, 11, 1), Date::from_ymd(2019, 12, 31)},
        {"covid", Date::from_ymd(2020, 1, 1), Date::from_ymd(2020, 3, 23)},
        {"post-covid", Date::from_ymd(2020, 5, 1), Date::from_ymd(2020, 7, 1)},
        {"rate-hike", Date::from_ymd(2022, 2, 15), Date::from_ymd(2022, 6, 15)},
    };
}

std::vector<RegimeWindow> load_regime_windows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open regime file: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ValidationError("regime file " + path + ": invalid JSON");
    const json* list = &doc;
    if (doc.is_object()) {
        auto it = doc.find("regimes");
        if (it == doc.end() || !it->is_array())
            throw ValidationError("regime file " + path + ": expected a 'regimes' array");
        list = &*it;
    }
    std::vector<RegimeWindow> windows;
    for (const auto& item : *list) {
        if (!item.is_object() || !item.contains("name") || !item.contains("start") ||
            !item.contains("end"))
            throw ValidationError("regime file " + path +
                                  ": each entry needs name, start, end");
        auto start = Date::parse(item["start"].get<std::string>());
        auto end = Date::parse(item["end"].get<std::string>());
        if (!start || !end)
            throw ValidationError("regime file " + path + ": bad date in '" +
                                  item["name"].get<std::string>() + "'");
        windows.push_back({item["name"].get<std::string>(), *start, *end});
    }
    validate_regime_windows(windows);
    return windows;
}

void save_regime_windows(const std::string& path, std::span<const RegimeWindow> windows) {
    json list = json::array();
    for (const auto& w : windows) {
        list.push_back(
            {{"name", w.name}, {"start", w.start.to_string()}, {"end", w.end.to_string()}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write file: " + path);
    out << json{{"regimes", list}}.dump(2) << '\n';
}

SplitSet chrono_split(std::span<const AlignedSample> samples, SplitRatios ratios) {
    if (samples.size() < 3)
        throw ValidationError("chrono_split needs at least 3 samples, got " +
                              std::to_string(samples.size()));
    const double sum = ratios.train + ratios.validation + ratios.test;
    if (std::abs(sum - 1.0) > 1e-9 || ratios.train <= 0 || ratios.validation <= 0 ||
        ratios.test <= 0)
        throw ValidationError("split ratios must be positive and sum to 1");

    std::vector<AlignedSample> ordered(samples.begin(), samples.end());
    std::sort(ordered.begin(), ordered.end(),
              [](const AlignedSample& a, const AlignedSample& b) {
                  if (a.article.timestamp != b.article.timestamp)
                      return a.article.timestamp < b.article.timestamp;
                  return a.article.id < b.article.id;
              });

    const double n = static_cast<double>(ordered.size());
    // The 1e-9 nudge keeps floor() at the mathematical value when ratio*n
    // lands epsilon under an integer (e.g. 0.6 * 5).
    const std::size_t n_train = static_cast<std::size_t>(std::floor(ratios.train * n + 1e-9));
    const std::size_t n_val = static_cast<std::size_t>(std::floor(ratios.validation * n + 1e-9));

    SplitSet split;
    split.train.assign(ordered.begin(), ordered.begin() + n_train);
    split.validation.assign(ordered.begin() + n_train, ordered.begin() + n_train + n_val);
    split.test.assign(ordered.begin() + n_train + n_val, ordered.end());
    return split;
}

void SplitSet::check_chronology() const {
    auto max_ts = [](const std::vector<AlignedSample>& v) {
        Timestamp m{INT64_MIN};
        for (const auto& s : v) m = std::max(m, s.article.timestamp);
        return m;
    };
    auto min_ts = [](const std::vector<AlignedSample>& v) {
        Timestamp m{INT64_MAX};
        for (const auto& s : v) m = std::min(m, s.article.timestamp);
        return m;
    };
    if (!train.empty() && !validation.empty() && min_ts(validation) < max_ts(train))
        throw RuntimeFailure("split chronology violated: validation sample precedes train");
    if (!train.empty() && !test.empty() && min_ts(test) < max_ts(train))
        throw RuntimeFailure("split chronology violated: test sample precedes train");
    if (!validation.empty() && !test.empty() && min_ts(test) < max_ts(validation))
        throw RuntimeFailure("split chronology violated: test sample precedes validation");
}

}  // namespace regimeval
