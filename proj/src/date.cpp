#include "regimeval/date.hpp"

#include <cstdio>

#include "regimeval/common.hpp"

namespace regimeval {
namespace {

// Civil <-> day-count conversions after Howard Hinnant's algorithms.
std::int32_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int32_t>(doe) - 719468;
}

Date::Ymd civil_from_days(std::int32_t z) {
    z += 719468;
    const std::int32_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {y + (m <= 2), static_cast<int>(m), static_cast<int>(d)};
}

bool is_leap(int y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

int days_in_month(int y, int m) {
    static constexpr int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return lengths[m - 1];
}

// Parses exactly `width` digits starting at s[pos]; advances pos.
std::optional<int> take_digits(std::string_view s, std::size_t& pos, std::size_t width) {
    if (pos + width > s.size()) return std::nullopt;
    int value = 0;
    for (std::size_t i = 0; i < width; ++i) {
        char c = s[pos + i];
        if (c < '0' || c > '9') return std::nullopt;
        value = value * 10 + (c - '0');
    }
    pos += width;
    return value;
}

bool take_char(std::string_view s, std::size_t& pos, char expected) {
    if (pos >= s.size() || s[pos] != expected) return false;
    ++pos;
    return true;
}

}  // namespace

Date Date::from_ymd(int year, int month, int day) {
    return Date{days_from_civil(year, month, day)};
}

std::optional<Date> Date::parse(std::string_view s) {
    std::size_t pos = 0;
    auto y = take_digits(s, pos, 4);
    if (!y || !take_char(s, pos, '-')) return std::nullopt;
    auto m = take_digits(s, pos, 2);
    if (!m || !take_char(s, pos, '-')) return std::nullopt;
    auto d = take_digits(s, pos, 2);
    if (!d || pos != s.size()) return std::nullopt;
    if (*m < 1 || *m > 12 || *d < 1 || *d > days_in_month(*y, *m)) return std::nullopt;
    return from_ymd(*y, *m, *d);
}

Date::Ymd Date::to_ymd() const { return civil_from_days(days); }

std::string Date::to_string() const {
    const Ymd ymd = to_ymd();
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", ymd.year, ymd.month, ymd.day);
    return std::string(buf);
}

std::optional<Timestamp> Timestamp::parse(std::string_view s) {
    s = trim(s);
    if (s.size() < 10) return std::nullopt;
    auto date = Date::parse(s.substr(0, 10));
    if (!date) return std::nullopt;
    std::int64_t seconds = static_cast<std::int64_t>(date->days) * 86400;
    if (s.size() == 10) return Timestamp{seconds};

    std::size_t pos = 10;
    if (s[pos] != 'T' && s[pos] != ' ') return std::nullopt;
    ++pos;
    auto h = take_digits(s, pos, 2);
    if (!h || !take_char(s, pos, ':')) return std::nullopt;
    auto mi = take_digits(s, pos, 2);
    if (!mi) return std::nullopt;
    int sec = 0;
    if (pos < s.size() && s[pos] == ':') {
        ++pos;
        auto sv = take_digits(s, pos, 2);
        if (!sv) return std::nullopt;
        sec = *sv;
    }
    if (pos < s.size()) {
        if (!take_char(s, pos, 'Z') || pos != s.size()) return std::nullopt;
    }
    if (*h > 23 || *mi > 59 || sec > 59) return std::nullopt;
    return Timestamp{seconds + *h * 3600 + *mi * 60 + sec};
}

Timestamp Timestamp::from_date(Date d) {
    return Timestamp{static_cast<std::int64_t>(d.days) * 86400};
}

Date Timestamp::date() const {
    std::int64_t d = seconds / 86400;
    if (seconds < 0 && seconds % 86400 != 0) --d;
    return Date{static_cast<std::int32_t>(d)};
}

std::string Timestamp::to_string() const {
    const Date d = date();
    const std::int64_t tod = seconds - static_cast<std::int64_t>(d.days) * 86400;
    const Date::Ymd ymd = d.to_ymd();
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", ymd.year, ymd.month,
                  ymd.day, static_cast<int>(tod / 3600), static_cast<int>((tod / 60) % 60),
                  static_cast<int>(tod % 60));
    return std::string(buf);
}

}  // namespace regimeval
