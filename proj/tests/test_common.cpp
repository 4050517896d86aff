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

#include <array>

#include "prima/bytes.hpp"
#include "prima/error.hpp"
#include "prima/time.hpp"
#include "support.hpp"

using namespace prima;

TEST_CASE("base64url matches the RFC 4648 vectors without padding") {
  const std::pair<const char*, const char*> vectors[] = {
      {"", ""}, {"f", "Zg"}, {"fo", "Zm8"}, {"foo", "Zm9v"}, {"foob", "Zm9vYg"}, {"fooba", "Zm9vYmE"}, {"foobar", "Zm9vYmFy"}};
  for (const auto& [plain, encoded] : vectors) {
    CHECK(base64url_encode(to_bytes(plain)) == encoded);
    CHECK(to_string(base64url_decode(encoded)) == plain);
  }
  const Bytes high = {0xfb, 0xff, 0xfe};
  CHECK(base64url_encode(high) == "-__-");
}

TEST_CASE("base64url rejects padding, foreign alphabets and non-canonical tails") {
  for (const char* bad : {"Zg==", "Zm9v+", "Zm9v/", "Z", "Zh", "Zm9=", "Zm 9v"}) {
    CHECK_THROWS_AS(base64url_decode(bad), Error);
  }
}

TEST_CASE("base64url round-trips random byte strings") {
  test::Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    Bytes b(rng.below(64));
    for (auto& x : b) x = static_cast<std::uint8_t>(rng.next());
    CHECK(base64url_decode(base64url_encode(b)) == b);
  }
}

TEST_CASE("sha256 and hex agree with the standard test vector") {
  CHECK(hex_encode(sha256(to_bytes("abc"))) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("random_array produces distinct values") {
  CHECK(random_array<16>() != random_array<16>());
}

TEST_CASE("ByteReader reports the failing offset") {
  ByteWriter w;
  w.u8(1).field(std::string_view("hello"));
  auto bytes = std::move(w).bytes();
  bytes.pop_back();
  ByteReader r(bytes);
  CHECK(r.u8() == 1);
  try {
    r.field();
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.code() == Errc::parse_error);
    CHECK(e.offset() == 5);
  }
}

TEST_CASE("ByteReader rejects trailing bytes") {
  ByteWriter w;
  w.u32(7).u8(0);
  ByteReader r(w.bytes());
  CHECK(r.u32() == 7);
  CHECK_THROWS_AS(r.expect_done(), ParseError);
}

TEST_CASE("RFC 3339 timestamps are strict UTC with seconds precision") {
  const auto t = parse_rfc3339("2016-02-29T23:59:59Z");
  CHECK(format_rfc3339(t) == "2016-02-29T23:59:59Z");
  CHECK(format_rfc3339(t + Seconds{1}) == "2016-03-01T00:00:00Z");
  for (const char* bad : {"2016-02-30T00:00:00Z", "2015-02-29T00:00:00Z", "2016-01-01 00:00:00Z",
                          "2016-01-01T00:00:00+01:00", "2016-01-01T00:00:00.5Z", "2016-01-01t00:00:00z",
                          "2016-01-01T24:00:00Z", "2016-1-01T00:00:00Z"}) {
    CHECK_THROWS_AS(parse_rfc3339(bad), Error);
  }
}

TEST_CASE("calendar dates parse strictly") {
  using namespace std::chrono;
  CHECK(parse_date("2000-02-29") == year_month_day{year{2000}, month{2}, day{29}});
  CHECK(format_date(parse_date("1990-04-12")) == "1990-04-12");
  CHECK_THROWS_AS(parse_date("1900-02-29"), Error);
  CHECK_THROWS_AS(parse_date("1990-4-12"), Error);
  CHECK_THROWS_AS(parse_date("1990-04-12T00:00:00Z"), Error);
  CHECK(format_rfc3339(at_midnight(parse_date("1990-04-12"))) == "1990-04-12T00:00:00Z");
}

TEST_CASE("error codes round-trip through their names") {
  for (int i = 0; i <= static_cast<int>(Errc::internal); ++i) {
    const auto code = static_cast<Errc>(i);
    CHECK(errc_from_string(to_string(code)) == code);
  }
  CHECK(to_string(Errc::session_consumed) == "session-consumed");
  CHECK(errc_from_string("no-such-code") == Errc::internal);
}
