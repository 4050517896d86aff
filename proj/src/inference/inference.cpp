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

#include "prima/inference.hpp"

#include <charconv>

#include "prima/bytes.hpp"
#include "prima/error.hpp"

namespace prima::inference {
namespace {

const Attribute* find(std::span<const Attribute> attributes, std::string_view key) {
  for (const auto& a : attributes) {
    if (a.key == key) return &a;
  }
  return nullptr;
}

const Attribute& require(std::span<const Attribute> attributes, std::string_view key) {
  const auto* a = find(attributes, key);
  if (a == nullptr) throw Error(Errc::missing_attribute, std::string(key));
  return *a;
}

int parse_threshold(std::string_view text) {
  int v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc{} || ptr != end || text.front() == '0') {
    throw Error(Errc::invalid_predicate, "age threshold '" + std::string(text) + "'");
  }
  return v;
}

std::string value_digest(std::string_view value) {
  const auto d = sha256(ByteView(reinterpret_cast<const std::uint8_t*>(value.data()), value.size()));
  return hex_encode(ByteView(d.data(), 8));
}

}  // namespace

std::string_view to_string(PredicateKind kind) {
  switch (kind) {
    case PredicateKind::age_over:
      return "age_over";
    case PredicateKind::equals:
      return "equals";
    case PredicateKind::registered:
      return "registered";
    case PredicateKind::reveal:
      return "reveal";
  }
  return "reveal";
}

PredicateKind predicate_kind_from_string(std::string_view text) {
  if (text == "age_over") return PredicateKind::age_over;
  if (text == "equals") return PredicateKind::equals;
  if (text == "registered") return PredicateKind::registered;
  if (text == "reveal") return PredicateKind::reveal;
  throw Error(Errc::invalid_predicate, "unknown kind '" + std::string(text) + "'");
}

Predicate Predicate::age_over(int years) {
  return Predicate{PredicateKind::age_over, std::string(kDateOfBirthKey), std::to_string(years)};
}

Predicate Predicate::equals(std::string key, std::string expected) {
  return Predicate{PredicateKind::equals, std::move(key), std::move(expected)};
}

Predicate Predicate::registered() { return Predicate{PredicateKind::registered, {}, {}}; }

Predicate Predicate::reveal(std::string key) { return Predicate{PredicateKind::reveal, std::move(key), {}}; }

void Predicate::validate() const {
  auto key_ok = [&] {
    return !key.empty() && key.size() <= 64 && key.rfind("proof:", 0) != 0 &&
           key.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789_:") == std::string::npos;
  };
  switch (kind) {
    case PredicateKind::age_over: {
      if (!key_ok()) throw Error(Errc::invalid_predicate, "age_over needs a date attribute key");
      const int t = parse_threshold(parameter);
      if (t < 1 || t > kMaxAgeThreshold) {
        throw Error(Errc::invalid_predicate, "age threshold out of range [1, 150]");
      }
      return;
    }
    case PredicateKind::equals:
      if (!key_ok()) throw Error(Errc::invalid_predicate, "equals needs an attribute key");
      // Bounded so the statement key stays within 64 bytes.
      if (key.size() > 64 - 30) throw Error(Errc::invalid_predicate, "equals key too long");
      return;
    case PredicateKind::registered:
      if (!key.empty() || !parameter.empty()) {
        throw Error(Errc::invalid_predicate, "registered takes no key or parameter");
      }
      return;
    case PredicateKind::reveal:
      if (!key_ok()) throw Error(Errc::invalid_predicate, "reveal needs an attribute key");
      if (!parameter.empty()) throw Error(Errc::invalid_predicate, "reveal takes no parameter");
      return;
  }
}

std::string Predicate::statement_key() const {
  switch (kind) {
    case PredicateKind::age_over:
      if (key == kDateOfBirthKey) return "proof:age_over:" + parameter;
      return "proof:age_over:" + parameter + ":" + key;
    case PredicateKind::equals:
      return "proof:equals:" + key + ":" + value_digest(parameter);
    case PredicateKind::registered:
      return "proof:registered";
    case PredicateKind::reveal:
      return key;
  }
  return key;
}

std::string Predicate::display_name() const {
  switch (kind) {
    case PredicateKind::age_over:
      if (key == kDateOfBirthKey) return "age_over:" + parameter;
      return "age_over:" + parameter + ":" + key;
    case PredicateKind::equals:
      return "equals:" + key + "=" + parameter;
    case PredicateKind::registered:
      return "registered";
    case PredicateKind::reveal:
      return key;
  }
  return key;
}

Predicate parse_predicate(std::string_view text) {
  Predicate p;
  if (text == "registered") {
    p = Predicate::registered();
  } else if (text.rfind("age_over:", 0) == 0) {
    auto rest = text.substr(9);
    const auto colon = rest.find(':');
    p = Predicate{PredicateKind::age_over, std::string(kDateOfBirthKey), std::string(rest.substr(0, colon))};
    if (colon != std::string_view::npos) p.key = std::string(rest.substr(colon + 1));
  } else if (text.rfind("equals:", 0) == 0) {
    auto rest = text.substr(7);
    const auto eq = rest.find('=');
    if (eq == std::string_view::npos) throw Error(Errc::invalid_predicate, "expected equals:key=value");
    p = Predicate::equals(std::string(rest.substr(0, eq)), std::string(rest.substr(eq + 1)));
  } else {
    p = Predicate::reveal(std::string(text));
  }
  p.validate();
  return p;
}

int completed_years(std::chrono::year_month_day birth, std::chrono::year_month_day on) {
  int years = static_cast<int>(on.year()) - static_cast<int>(birth.year());
  // Month/day comparison; a Feb-29 birthday compares greater than Feb-28,
  // so in common years it is first reached on Mar-1.
  const auto bm = static_cast<unsigned>(birth.month());
  const auto bd = static_cast<unsigned>(birth.day());
  const auto om = static_cast<unsigned>(on.month());
  const auto od = static_cast<unsigned>(on.day());
  if (om < bm || (om == bm && od < bd)) --years;
  return years;
}

DerivedStatement evaluate(const Predicate& predicate, std::span<const Attribute> attributes, Timestamp now) {
  predicate.validate();
  DerivedStatement out;
  out.evaluated_at = now;
  out.source_key = predicate.key;

  switch (predicate.kind) {
    case PredicateKind::age_over: {
      const auto& source = require(attributes, predicate.key);
      const auto dob = parse_date(source.value);
      const std::chrono::year_month_day today{std::chrono::floor<std::chrono::days>(now)};
      if (completed_years(dob, today) < parse_threshold(predicate.parameter)) {
        throw Error(Errc::predicate_not_satisfied, predicate.display_name());
      }
      out.attribute = Attribute{predicate.statement_key(), "true"};
      return out;
    }
    case PredicateKind::equals: {
      const auto& source = require(attributes, predicate.key);
      if (source.value != predicate.parameter) {
        throw Error(Errc::predicate_not_satisfied, "equals:" + predicate.key);
      }
      out.attribute = Attribute{predicate.statement_key(), "true"};
      return out;
    }
    case PredicateKind::registered:
      out.attribute = Attribute{predicate.statement_key(), "true"};
      return out;
    case PredicateKind::reveal:
      out.attribute = require(attributes, predicate.key);
      return out;
  }
  throw Error(Errc::invalid_predicate, "unhandled kind");
}

}  // namespace prima::inference
