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

#include <cstdint>
#include <set>
#include <string>
#include <string_view>

#include "prima/bytes.hpp"
#include "prima/error.hpp"
#include "prima/time.hpp"
#include "prima/wire.hpp"

namespace prima::wire::detail {

/// Strict reader over one JSON object: every field must be read exactly
/// once and finish() rejects anything left over.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string_view what) : j_(j), what_(what) {
    if (!j_.is_object()) fail("expected object");
  }

  const Json& at(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) fail("missing field '" + key + "'");
    seen_.insert(key);
    return *it;
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  std::string str(const std::string& key) {
    const auto& v = at(key);
    if (!v.is_string()) fail("field '" + key + "' must be a string");
    return v.get<std::string>();
  }

  Bytes b64(const std::string& key) {
    const auto text = str(key);
    try {
      return base64url_decode(text);
    } catch (const Error&) {
      fail("field '" + key + "' is not base64url");
    }
  }

  std::int64_t integer(const std::string& key) {
    const auto& v = at(key);
    if (!v.is_number_integer()) fail("field '" + key + "' must be an integer");
    return v.get<std::int64_t>();
  }

  bool boolean(const std::string& key) {
    const auto& v = at(key);
    if (!v.is_boolean()) fail("field '" + key + "' must be a boolean");
    return v.get<bool>();
  }

  Timestamp time(const std::string& key) {
    const auto text = str(key);
    try {
      return parse_rfc3339(text);
    } catch (const Error&) {
      fail("field '" + key + "' is not an RFC 3339 UTC timestamp");
    }
  }

  const Json& array(const std::string& key) {
    const auto& v = at(key);
    if (!v.is_array()) fail("field '" + key + "' must be an array");
    return v;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) fail("unknown field '" + key + "'");
    }
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(Errc::schema_violation, std::string(what_) + ": " + why);
  }

 private:
  const Json& j_;
  std::string_view what_;
  std::set<std::string> seen_;
};

}  // namespace prima::wire::detail
