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
#include <span>
#include <string>
#include <string_view>

#include "prima/attribute.hpp"
#include "prima/time.hpp"

namespace prima::inference {

enum class PredicateKind { age_over, equals, registered, reveal };

std::string_view to_string(PredicateKind kind);
/// Throws Error(invalid_predicate).
PredicateKind predicate_kind_from_string(std::string_view text);

inline constexpr std::string_view kDateOfBirthKey = "date_of_birth";
inline constexpr int kMaxAgeThreshold = 150;

/// A condition the IdP can certify about stored attributes.
///
///   age_over   key = date attribute (date_of_birth), parameter = threshold 1..150
///   equals     key = attribute,  parameter = expected value
///   registered key and parameter empty
///   reveal     key = attribute,  parameter empty
struct Predicate {
  PredicateKind kind = PredicateKind::reveal;
  std::string key;
  std::string parameter;

  static Predicate age_over(int years);
  static Predicate equals(std::string key, std::string expected);
  static Predicate registered();
  static Predicate reveal(std::string key);

  /// Throws Error(invalid_predicate) on a kind/parameter mismatch.
  void validate() const;

  /// Key of the attribute that satisfies this predicate: "proof:age_over:16",
  /// "proof:equals:country:<digest>", "proof:registered", or the plain key for
  /// reveal.
  std::string statement_key() const;

  /// Short human form used by consent flags: "age_over:16", "country", ...
  std::string display_name() const;

  bool operator==(const Predicate&) const = default;
  auto operator<=>(const Predicate&) const = default;
};

/// Inverse of display_name for the kinds a user can type on a command line:
/// "age_over:16", "registered", "equals:country=DE", or a bare key (reveal).
Predicate parse_predicate(std::string_view text);

struct DerivedStatement {
  Attribute attribute;
  std::string source_key;
  Timestamp evaluated_at{};

  bool operator==(const DerivedStatement&) const = default;
};

/// Age in completed years on `on`. A Feb-29 birthday is reached on Mar-1 in
/// common years.
int completed_years(std::chrono::year_month_day birth, std::chrono::year_month_day on);

/// Errors: missing_attribute (source absent), unparsable_date,
/// predicate_not_satisfied (false predicates never yield a statement).
DerivedStatement evaluate(const Predicate& predicate, std::span<const Attribute> attributes, Timestamp now);

}  // namespace prima::inference
