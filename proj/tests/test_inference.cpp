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

#include <doctest.h>

#include <algorithm>

#include "prima/error.hpp"
#include "prima/inference.hpp"
#include "prima/messages.hpp"
#include "support.hpp"

using namespace prima;
using namespace prima::inference;
using namespace std::chrono;

namespace {

test::oracle::Date from(year_month_day d) {
  return {static_cast<int>(d.year()), static_cast<int>(static_cast<unsigned>(d.month())),
          static_cast<int>(static_cast<unsigned>(d.day()))};
}

year_month_day shift(year_month_day d, int days_) { return year_month_day{sys_days{d} + days{days_}}; }

Timestamp noon(year_month_day d) { return sys_days{d} + hours{12}; }

std::vector<Attribute> dob(const std::string& value) { return {{"date_of_birth", value}, {"country", "DE"}}; }

bool holds(const Predicate& p, const std::vector<Attribute>& attrs, Timestamp now) {
  try {
    (void)evaluate(p, attrs, now);
    return true;
  } catch (const Error& e) {
    if (e.code() != Errc::predicate_not_satisfied) throw;
    return false;
  }
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::internal;
}

}  // namespace

TEST_CASE("age_over examples") {
  const auto now = test::at("2016-06-01T09:30:00Z");
  const auto s = evaluate(Predicate::age_over(16), dob("1990-04-12"), now);
  CHECK(s.attribute == Attribute{"proof:age_over:16", "true"});
  CHECK(s.source_key == "date_of_birth");
  CHECK(s.evaluated_at == now);

  CHECK(code_of([&] { (void)evaluate(Predicate::age_over(16), dob("2010-01-01"), now); }) ==
        Errc::predicate_not_satisfied);
  CHECK(holds(Predicate::age_over(16), dob("2000-06-01"), now));
  CHECK_FALSE(holds(Predicate::age_over(16), dob("2000-06-02"), now));
  CHECK(code_of([&] {
          (void)evaluate(Predicate::age_over(16), std::vector<Attribute>{{"country", "DE"}}, now);
        }) == Errc::missing_attribute);
  CHECK(code_of([&] { (void)evaluate(Predicate::age_over(16), dob("12/04/1990"), now); }) ==
        Errc::unparsable_date);
}

TEST_CASE("completed years agree with a day-by-day walk around the 2016 leap day") {
  const auto first = year_month_day{year{2014}, month{3}, day{1}};
  std::size_t compared = 0;
  for (int b = 0; b < 4 * 365 + 1; ++b) {
    const auto birth = shift(first, b);
    std::vector<year_month_day> ons;
    for (int k = 0; k <= 2 * 366; k += 1) ons.push_back(shift(birth, k));
    for (int delta = -3; delta <= 3; ++delta) {
      ons.push_back(shift(year_month_day{birth.year() + years{15}, birth.month(), day{1}}, delta));
    }
    for (int y = 2030; y <= 2034; ++y) {
      ons.push_back(year_month_day{year{y}, month{2}, day{28}});
      ons.push_back(year_month_day{year{y}, month{3}, day{1}});
      if (year{y}.is_leap()) ons.push_back(year_month_day{year{y}, month{2}, day{29}});
    }
    for (const auto& on : ons) {
      if (sys_days{on} < sys_days{birth}) continue;
      REQUIRE_MESSAGE(completed_years(birth, on) == test::oracle::age_by_days(from(birth), from(on)),
                      format_date(birth) << " on " << format_date(on));
      ++compared;
    }
  }
  CHECK(compared > 1'000'000);
}

TEST_CASE("completed years agree with the walk on sampled dates 1900-2100") {
  test::Rng rng(41);
  const auto lo = sys_days{year_month_day{year{1900}, month{1}, day{1}}};
  const auto hi = sys_days{year_month_day{year{2100}, month{12}, day{31}}};
  const auto span_days = static_cast<std::uint64_t>((hi - lo).count());
  int leap_births = 0;
  for (int i = 0; i < 10'000; ++i) {
    year_month_day birth{lo + days{static_cast<long>(rng.below(span_days))}};
    if (i % 5 == 0) {
      // Bias toward Feb-29 births.
      int y = 1904 + 4 * static_cast<int>(rng.below(49));
      if (y == 2000 || !year{y}.is_leap()) y = 2000;
      birth = year_month_day{year{y}, month{2}, day{29}};
      ++leap_births;
    }
    const auto from_day = sys_days{birth};
    const year_month_day on{from_day + days{static_cast<long>(rng.below(static_cast<std::uint64_t>((hi - from_day).count()) + 1))}};
    REQUIRE_MESSAGE(completed_years(birth, on) == test::oracle::age_by_days(from(birth), from(on)),
                    format_date(birth) << " on " << format_date(on));
  }
  CHECK(leap_births == 2000);
}

TEST_CASE("a Feb-29 birthday is reached on Mar-1 in common years") {
  const auto birth = year_month_day{year{2000}, month{2}, day{29}};
  CHECK(completed_years(birth, year_month_day{year{2018}, month{2}, day{28}}) == 17);
  CHECK(completed_years(birth, year_month_day{year{2018}, month{3}, day{1}}) == 18);
  CHECK(completed_years(birth, year_month_day{year{2020}, month{2}, day{29}}) == 20);
}

TEST_CASE("age_over is monotone in time and consistent across thresholds") {
  test::Rng rng(43);
  for (int i = 0; i < 300; ++i) {
    const auto birth = shift(year_month_day{year{1950}, month{1}, day{1}}, static_cast<int>(rng.below(60 * 365)));
    const auto attrs = dob(format_date(birth));
    const auto t = noon(shift(birth, static_cast<int>(rng.below(80 * 365))));
    const auto later = t + days{static_cast<long>(rng.below(5000))};
    for (int n : {1, 16, 18, 21, 65}) {
      if (holds(Predicate::age_over(n), attrs, t)) {
        CHECK(holds(Predicate::age_over(n), attrs, later));
        for (int m = 1; m <= n; ++m) CHECK(holds(Predicate::age_over(m), attrs, t));
      }
    }
  }
}

TEST_CASE("equals, registered and reveal") {
  const auto attrs = dob("1990-04-12");
  const auto now = test::at("2026-01-01T00:00:00Z");
  const auto eq = evaluate(Predicate::equals("country", "DE"), attrs, now);
  CHECK(eq.attribute.key.rfind("proof:equals:country:", 0) == 0);
  CHECK(eq.attribute.key.find("DE") == std::string::npos);
  CHECK(eq.attribute.value == "true");
  CHECK(Predicate::equals("country", "DE").statement_key() != Predicate::equals("country", "FR").statement_key());
  CHECK(code_of([&] { (void)evaluate(Predicate::equals("country", "FR"), attrs, now); }) ==
        Errc::predicate_not_satisfied);
  CHECK(evaluate(Predicate::registered(), attrs, now).attribute == Attribute{"proof:registered", "true"});
  CHECK(evaluate(Predicate::reveal("country"), attrs, now).attribute == Attribute{"country", "DE"});
  CHECK(code_of([&] { (void)evaluate(Predicate::reveal("email"), attrs, now); }) == Errc::missing_attribute);
}

TEST_CASE("predicate validation and parsing") {
  CHECK(parse_predicate("age_over:16") == Predicate::age_over(16));
  CHECK(parse_predicate("registered") == Predicate::registered());
  CHECK(parse_predicate("equals:country=DE") == Predicate::equals("country", "DE"));
  CHECK(parse_predicate("country") == Predicate::reveal("country"));
  for (const char* text : {"age_over:16", "registered", "equals:country=DE", "country", "age_over:21:birth_date"}) {
    CHECK(parse_predicate(text).display_name() == text);
  }
  CHECK(Predicate::age_over(16).statement_key() == "proof:age_over:16");
  for (const char* bad : {"age_over:0", "age_over:151", "age_over:016", "age_over:x", "age_over:", "equals:country",
                          "proof:age_over:16", "Country", "", "a b"}) {
    CHECK_MESSAGE(code_of([&] { (void)parse_predicate(bad); }) == Errc::invalid_predicate, bad);
  }
  CHECK_NOTHROW(parse_predicate("age_over:150"));
  CHECK(code_of([] { Predicate{PredicateKind::registered, "x", ""}.validate(); }) == Errc::invalid_predicate);
  CHECK(code_of([] { Predicate{PredicateKind::reveal, "x", "y"}.validate(); }) == Errc::invalid_predicate);
  CHECK(predicate_kind_from_string("equals") == PredicateKind::equals);
  CHECK(code_of([] { (void)predicate_kind_from_string("greater"); }) == Errc::invalid_predicate);
}

TEST_CASE("serialized age statements carry no trace of the birth date") {
  const auto now = test::at("2026-03-01T12:00:00Z");
  // Birth dates chosen so no 4-byte window of them occurs in the timestamp.
  const std::string first = "1987-11-23";
  const std::string second = "1979-07-15";
  auto serialized = [&](const std::string& d) {
    idp::CertifiedStatement c;
    c.statement = evaluate(Predicate::age_over(18), dob(d), now);
    c.t_exp = test::at("2027-03-01T12:00:00Z");
    c.signature = crypto::Signature{1};
    return wire::make_envelope(wire::InferResponse{{c}}).body.dump();
  };
  const auto a = serialized(first);
  CHECK(a == serialized(second));
  for (const auto& d : {first, second}) {
    for (std::size_t i = 0; i + 4 <= d.size(); ++i) {
      CHECK_MESSAGE(a.find(d.substr(i, 4)) == std::string::npos, d.substr(i, 4));
    }
  }
}
