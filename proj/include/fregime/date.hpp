#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace fregime {

using Date = std::chrono::year_month_day;

// Parses YYYYMMDD (French data library convention). Returns nullopt for any
// token that is not eight digits forming a valid calendar date.
std::optional<Date> parse_compact_date(std::string_view token);

// Parses YYYY-MM-DD.
std::optional<Date> parse_iso_date(std::string_view token);

std::string format_iso(const Date& d);

// Signed calendar-day difference b - a.
int calendar_days_between(const Date& a, const Date& b);

// Monday of the ISO week containing d; equal keys mean the same ISO week.
Date iso_week_key(const Date& d);

}  // namespace fregime
