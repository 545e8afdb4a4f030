#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace regimeval {

// Calendar date, stored as days since 1970-01-01 (proleptic Gregorian, UTC).
struct Date {
    std::int32_t days = 0;

    static Date from_ymd(int year, int month, int day);
    // Strict "YYYY-MM-DD".
    static std::optional<Date> parse(std::string_view s);

    struct Ymd {
        int year;
        int month;
        int day;
    };
    Ymd to_ymd() const;
    std::string to_string() const;

    auto operator<=>(const Date&) const = default;
};

// UTC instant, stored as seconds since the epoch.
//
// Accepted forms: "YYYY-MM-DD", "YYYY-MM-DDTHH:MM[:SS]" (space also allowed
// as the separator), with an optional trailing "Z". Canonical output is
// always "YYYY-MM-DDTHH:MM:SSZ".
struct Timestamp {
    std::int64_t seconds = 0;

    static std::optional<Timestamp> parse(std::string_view s);
    static Timestamp from_date(Date d);

    Date date() const;
    std::string to_string() const;

    auto operator<=>(const Timestamp&) const = default;
};

struct DateRange {
    Date start = Date::from_ymd(1900, 1, 1);
    Date end = Date::from_ymd(2100, 12, 31);

    bool contains(Date d) const { return start <= d && d <= end; }
};

}  // namespace regimeval
