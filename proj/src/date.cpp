#include "fregime/date.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace fregime {

namespace {

std::optional<int> parse_digits(std::string_view s) {
    int value = 0;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

std::optional<Date> make_date(std::optional<int> y, std::optional<int> m, std::optional<int> d) {
    if (!y || !m || !d) return std::nullopt;
    Date out{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
             std::chrono::day{static_cast<unsigned>(*d)}};
    if (!out.ok()) return std::nullopt;
    return out;
}

}  // namespace

std::optional<Date> parse_compact_date(std::string_view token) {
    if (token.size() != 8) return std::nullopt;
    return make_date(parse_digits(token.substr(0, 4)), parse_digits(token.substr(4, 2)),
                     parse_digits(token.substr(6, 2)));
}

std::optional<Date> parse_iso_date(std::string_view token) {
    if (token.size() != 10 || token[4] != '-' || token[7] != '-') return std::nullopt;
    return make_date(parse_digits(token.substr(0, 4)), parse_digits(token.substr(5, 2)),
                     parse_digits(token.substr(8, 2)));
}

std::string format_iso(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

int calendar_days_between(const Date& a, const Date& b) {
    return static_cast<int>((std::chrono::sys_days{b} - std::chrono::sys_days{a}).count());
}

Date iso_week_key(const Date& d) {
    const std::chrono::sys_days days{d};
    const std::chrono::weekday wd{days};
    // iso_encoding: Monday = 1 ... Sunday = 7
    const auto offset = std::chrono::days{wd.iso_encoding() - 1};
    return Date{days - offset};
}

}  // namespace fregime
