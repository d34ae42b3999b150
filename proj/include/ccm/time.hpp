#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "ccm/common.hpp"

namespace ccm {

// Timestamps are UTC seconds since the Unix epoch. Inputs accept
// "YYYY-MM-DD HH:MM:SS" or "YYYY-MM-DDTHH:MM:SS" with an optional
// fractional-second part (truncated) and an optional "Z" or "+HH:MM"
// offset. Output is always "YYYY-MM-DDTHH:MM:SSZ".
using UnixSeconds = std::int64_t;

namespace detail {

// Howard Hinnant's days-from-civil algorithm.
inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yr + (m <= 2));
}

}  // namespace detail

inline UnixSeconds parse_timestamp(const std::string& s,
                                   const std::string& context) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double sec = 0.0;
  char sep = 0;
  int consumed = 0;
  int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%lf%n", &y, &mo, &d, &sep,
                      &h, &mi, &sec, &consumed);
  if (n != 7 || (sep != 'T' && sep != ' '))
    fail(ErrorKind::Mapping,
         "cannot parse timestamp '" + s + "' (" + context + ")");
  std::int64_t offset = 0;
  std::string rest = s.substr(static_cast<std::size_t>(consumed));
  if (!rest.empty() && rest != "Z") {
    int oh = 0, om = 0;
    char sign = rest[0];
    if ((sign == '+' || sign == '-') &&
        std::sscanf(rest.c_str() + 1, "%d:%d", &oh, &om) == 2) {
      offset = (sign == '-' ? -1 : 1) * (oh * 3600 + om * 60);
    } else {
      fail(ErrorKind::Mapping,
           "unrecognized timestamp suffix '" + rest + "' (" + context + ")");
    }
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec >= 61)
    fail(ErrorKind::Mapping,
         "timestamp field out of range in '" + s + "' (" + context + ")");
  std::int64_t days = detail::days_from_civil(y, mo, d);
  return days * 86400 + h * 3600 + mi * 60 +
         static_cast<std::int64_t>(sec) - offset;
}

inline std::string format_timestamp(UnixSeconds t) {
  std::int64_t days = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  int y, m, d;
  detail::civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                static_cast<int>(rem % 60));
  return buf;
}

}  // namespace ccm
