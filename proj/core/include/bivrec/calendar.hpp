#pragma once

#include <string>

#include "bivrec/errors.hpp"

namespace bivrec {

// Day-of-year indexing is always non-leap: 29 February is dropped before
// indexing so every year carries identical day labels. The study window is
// the JJA days 152..243 plus day 151 (31 May), kept solely as the
// autoregression seed.
inline constexpr int kSeedDayLabel = 151;
inline constexpr int kFirstSummerDay = 152;
inline constexpr int kLastSummerDay = 243;
inline constexpr int kSummerDays = 92;

struct Date {
  int year = 0;
  int month = 0;  // 1..12
  int day = 0;    // 1..31
};

// Parses YYYY-MM-DD. Throws DataError on malformed input.
Date parse_date(const std::string& s);

bool is_leap_year(int year);

// Non-leap day-of-year for a calendar date; 29 February maps to -1 (dropped).
int day_of_year_nonleap(const Date& d);

// Inverse of day_of_year_nonleap for labels 1..365: (month, day).
void month_day_from_label(int label, int* month, int* day);

}  // namespace bivrec
