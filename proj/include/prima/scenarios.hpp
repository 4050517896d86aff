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

// Scripted end-to-end runs of the whole system, with assertions over the
// captured wire transcript.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prima/attribute.hpp"
#include "prima/inference.hpp"
#include "prima/wire.hpp"

namespace prima::scenarios {

/// Outcome string for a step that ended with an access token.
inline constexpr std::string_view kTokenGranted = "token-granted";
/// Outcome string for any other step that succeeded.
inline constexpr std::string_view kOk = "ok";

struct ActorSpec {
  std::string role;  // idp | sp | agent
  std::string name;
  unsigned key_bits = 2048;
  // sp only
  std::string service_name;
  std::vector<inference::Predicate> required;
  std::string trusts;

  bool operator==(const ActorSpec&) const = default;
};

/// One protocol action. Which fields apply depends on `action`:
///
///   enroll              agent idp attributes days [replace]
///   login               agent sp consent [fresh] [timestamp_offset] [tamper] [capture]
///   replay              sp capture
///   concurrent-replay   agent sp consent threads rounds
///   stolen-credential   thief victim sp mode (rekey | wrong-signer)
///   revoke / reinstate  idp agent
///   advance             seconds
struct Step {
  std::string action;
  std::string agent, idp, sp, thief, victim, capture, mode;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::int64_t days = 0;
  std::int64_t seconds = 0;
  std::int64_t timestamp_offset = 0;
  std::vector<std::string> consent;
  bool fresh = false;
  bool replace = false;
  std::optional<Attribute> tamper;
  int threads = 16;
  int rounds = 100;
  /// Required outcome; empty means the step must succeed. The last step is
  /// checked against the script's `expected` instead.
  std::string expect;

  bool operator==(const Step&) const = default;
};

/// Checks over the transcript and the final actor state:
///
///   absent         direction (to-sp | to-idp), value: bytes never appear
///   present        direction, value: bytes appear at least once
///   no-sp-identifiers-at-idp   SP names, endpoints, session ids and
///                  nonces outside the nonce-sign request never reach an IdP
///   idp-auth-messages  after the first login, IdP-bound requests are only
///                  of the listed message types; nonce-sign bodies carry
///                  exactly the minimal field set
///   sp-requests    sp, paths: requests the SP received, in order
///   sp-state-keys  sp, keys: attribute keys held in the SP's stored state
struct Assertion {
  std::string kind;
  std::string direction;
  std::string value;
  std::string sp;
  std::vector<std::string> list;

  bool operator==(const Assertion&) const = default;
};

struct ScenarioScript {
  std::string name;
  std::string description;
  std::vector<ActorSpec> actors;
  std::vector<Step> steps;
  std::string expected;
  std::vector<Assertion> wire_assertions;

  /// Throws Error(script_error) on unknown fields, unknown actions or
  /// references to undefined actors.
  static ScenarioScript from_json(const wire::Json& j);
  wire::Json to_json() const;

  bool operator==(const ScenarioScript&) const = default;
};

ScenarioScript load_script(const std::filesystem::path& file);
/// Every *.json in `dir`, sorted by file name.
std::vector<ScenarioScript> load_directory(const std::filesystem::path& dir);

/// $PRIMA_SCENARIOS_DIR, else ./scenarios, else the source tree copy.
std::filesystem::path default_scenario_dir();

enum class TransportKind { loopback, http };

std::string_view to_string(TransportKind kind);

struct RunOptions {
  TransportKind transport = TransportKind::loopback;
  /// Overrides every actor's key size.
  std::optional<unsigned> key_bits;
};

struct ScenarioReport {
  std::string name;
  bool passed = false;
  std::string outcome;
  std::string expected;
  /// First mismatch or violated assertion; empty when passed.
  std::string failure;
  std::size_t captured_messages = 0;
  double seconds = 0;
};

ScenarioReport run_scenario(const ScenarioScript& script, const RunOptions& options = {});

}  // namespace prima::scenarios
