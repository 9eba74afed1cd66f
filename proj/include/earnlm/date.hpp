#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <string>

#include "earnlm/error.hpp"

namespace earnlm {

// Calendar date (no time zone). ISO-8601 text form YYYY-MM-DD.
struct Date {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;

    friend auto operator<=>(const Date&, const Date&) = default;

    std::chrono::sys_days to_sys_days() const {
        return std::chrono::sys_days{std::chrono::year{year} / std::chrono::month{month} /
                                     std::chrono::day{day}};
    }

    bool valid() const {
        return (std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day}).ok();
    }

    Date plus_days(int n) const {
        const auto ymd = std::chrono::year_month_day{to_sys_days() + std::chrono::days{n}};
        return Date{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                    static_cast<unsigned>(ymd.day())};
    }

    std::string iso() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year, month, day);
        return buf;
    }
};

// Signed day count b - a.
inline long days_between(const Date& a, const Date& b) {
    return (b.to_sys_days() - a.to_sys_days()).count();
}

inline Date parse_date(const std::string& text) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3) {
        throw Error(ErrorCode::schema_error, "invalid date '" + text + "' (want YYYY-MM-DD)");
    }
    Date date{y, m, d};
    if (!date.valid()) {
        throw Error(ErrorCode::schema_error, "invalid calendar date '" + text + "'");
    }
    return date;
}

}  // namespace earnlm
