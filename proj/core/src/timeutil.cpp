#include "exacb/timeutil.hpp"

#include <cstdio>
#include <ctime>

namespace exacb {

std::string format_utc(UtcSeconds t) {
  std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec);
  return buf;
}

namespace {

bool digits_at(const std::string& s, size_t pos, size_t n) {
  for (size_t i = pos; i < pos + n; ++i) {
    if (i >= s.size() || s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

int num(const std::string& s, size_t pos, size_t n) {
  int v = 0;
  for (size_t i = pos; i < pos + n; ++i) v = v * 10 + (s[i] - '0');
  return v;
}

std::optional<UtcSeconds> from_fields(int year, int mon, int day, int hh,
                                      int mm, int ss) {
  if (mon < 1 || mon > 12 || day < 1 || day > 31) return std::nullopt;
  if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  std::tm tm{};
  tm.tm_year = year - 1900;
  tm.tm_mon = mon - 1;
  tm.tm_mday = day;
  tm.tm_hour = hh;
  tm.tm_min = mm;
  tm.tm_sec = ss;
  std::time_t t = timegm(&tm);
  if (t == static_cast<std::time_t>(-1)) return std::nullopt;
  // timegm normalizes out-of-range dates (Feb 30 -> Mar 2); reject those.
  std::tm check{};
  gmtime_r(&t, &check);
  if (check.tm_year != year - 1900 || check.tm_mon != mon - 1 ||
      check.tm_mday != day || check.tm_hour != hh || check.tm_min != mm ||
      check.tm_sec != ss) {
    return std::nullopt;
  }
  return static_cast<UtcSeconds>(t);
}

}  // namespace

std::optional<UtcSeconds> parse_utc(const std::string& text) {
  if (text.size() != 20) return std::nullopt;
  if (text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' ||
      text[16] != ':' || text[19] != 'Z') {
    return std::nullopt;
  }
  if (!digits_at(text, 0, 4) || !digits_at(text, 5, 2) ||
      !digits_at(text, 8, 2) || !digits_at(text, 11, 2) ||
      !digits_at(text, 14, 2) || !digits_at(text, 17, 2)) {
    return std::nullopt;
  }
  return from_fields(num(text, 0, 4), num(text, 5, 2), num(text, 8, 2),
                     num(text, 11, 2), num(text, 14, 2), num(text, 17, 2));
}

std::optional<UtcSeconds> parse_utc_or_date(const std::string& text) {
  if (text.size() == 10 && text[4] == '-' && text[7] == '-' &&
      digits_at(text, 0, 4) && digits_at(text, 5, 2) && digits_at(text, 8, 2)) {
    return from_fields(num(text, 0, 4), num(text, 5, 2), num(text, 8, 2), 0, 0,
                       0);
  }
  return parse_utc(text);
}

UtcSeconds now_utc() {
  return static_cast<UtcSeconds>(std::time(nullptr));
}

}  // namespace exacb
