// Copyright 2026 The PRIMA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "prima/time.hpp"

#include <cstdio>

#include "prima/error.hpp"

namespace prima {
namespace {

int digits(std::string_view s, std::size_t pos, std::size_t n) {
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    const char c = s[i];
    if (c < '0' || c > '9') {
      throw Error(Errc::unparsable_date, std::string(s));
    }
    v = v * 10 + (c - '0');
  }
  return v;
}

void expect(std::string_view s, std::size_t pos, char c) {
  if (s[pos] != c) throw Error(Errc::unparsable_date, std::string(s));
}

}  // namespace

Timestamp system_now() {
  return std::chrono::floor<Seconds>(std::chrono::system_clock::now());
}

Clock system_clock() { return &system_now; }

std::string format_rfc3339(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::chrono::year_month_day parse_date(std::string_view text) {
  using namespace std::chrono;
  if (text.size() != 10) throw Error(Errc::unparsable_date, std::string(text));
  const int y = digits(text, 0, 4);
  expect(text, 4, '-');
  const int m = digits(text, 5, 2);
  expect(text, 7, '-');
  const int d = digits(text, 8, 2);
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw Error(Errc::unparsable_date, std::string(text));
  return ymd;
}

std::string format_date(std::chrono::year_month_day d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

Timestamp parse_rfc3339(std::string_view text) {
  using namespace std::chrono;
  if (text.size() != 20) throw Error(Errc::unparsable_date, std::string(text));
  const auto ymd = parse_date(text.substr(0, 10));
  expect(text, 10, 'T');
  const int hh = digits(text, 11, 2);
  expect(text, 13, ':');
  const int mm = digits(text, 14, 2);
  expect(text, 16, ':');
  const int ss = digits(text, 17, 2);
  expect(text, 19, 'Z');
  if (hh > 23 || mm > 59 || ss > 59) throw Error(Errc::unparsable_date, std::string(text));
  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

Timestamp at_midnight(std::chrono::year_month_day d) {
  return std::chrono::sys_days{d} + Seconds{0};
}

}  // namespace prima
