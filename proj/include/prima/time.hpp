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

#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <string_view>

namespace prima {

/// UTC instant at one-second precision. Every timestamp in the system uses
/// this resolution.
using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;

/// Source of "now"; injectable so tests and scenarios can run on a fixed or
/// advancing clock.
using Clock = std::function<Timestamp()>;

Timestamp system_now();
Clock system_clock();

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_rfc3339(Timestamp t);

/// Strict inverse of format_rfc3339 (upper-case T and Z, no fraction, no
/// offset). Throws Error(unparsable_date).
Timestamp parse_rfc3339(std::string_view text);

/// "YYYY-MM-DD" full-date.
std::chrono::year_month_day parse_date(std::string_view text);
std::string format_date(std::chrono::year_month_day d);

Timestamp at_midnight(std::chrono::year_month_day d);

}  // namespace prima
