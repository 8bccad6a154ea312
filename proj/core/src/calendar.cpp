#include "bivrec/calendar.hpp"

#include <array>
#include <cstdio>

namespace bivrec {

namespace {
constexpr std::array<int, 12> kMonthLen = {31, 28, 31, 30, 31, 30,
                                           31, 31, 30, 31, 30, 31};
}

Date parse_date(const std::string& s) {
  Date d;
  char trail;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c", &d.year, &d.month, &d.day, &trail) != 3 ||
      s.size() != 10) {
    throw DataError("malformed date '" + s + "' (expected YYYY-MM-DD)");
  }
  if (d.month < 1 || d.month > 12 || d.day < 1) {
    throw DataError("date out of range: " + s);
  }
  int maxday = kMonthLen[d.month - 1];
  if (d.month == 2 && is_leap_year(d.year)) maxday = 29;
  if (d.day > maxday) throw DataError("date out of range: " + s);
  return d;
}

bool is_leap_year(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int day_of_year_nonleap(const Date& d) {
  if (d.month == 2 && d.day == 29) return -1;
  int doy = d.day;
  for (int m = 0; m < d.month - 1; ++m) doy += kMonthLen[m];
  return doy;
}

void month_day_from_label(int label, int* month, int* day) {
  if (label < 1 || label > 365) throw DataError("day label out of range");
  int m = 0;
  while (label > kMonthLen[m]) {
    label -= kMonthLen[m];
    ++m;
  }
  *month = m + 1;
  *day = label;
}

}  // namespace bivrec
