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

#include <compare>
#include <string>

namespace prima {

/// A certified <KEY, VALUE> pair. Derived predicate statements use keys under
/// the reserved "proof:" prefix. Canonical-form checks live in
/// credential.hpp (canonicalize_attribute / validate_attribute).
struct Attribute {
  std::string key;
  std::string value;

  bool is_derived() const { return key.rfind("proof:", 0) == 0; }

  auto operator<=>(const Attribute&) const = default;
};

}  // namespace prima
