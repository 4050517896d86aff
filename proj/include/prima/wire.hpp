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

// Envelopes and their canonical text encoding.
//
// Encoding: JSON with object keys in lexicographic order, no insignificant
// whitespace, binary fields as unpadded base64url, timestamps RFC 3339 UTC,
// integers only. Semantically equal envelopes therefore encode to identical
// bytes. Every body schema is closed: unknown fields are rejected when
// encoding and when decoding.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "prima/error.hpp"

namespace prima::wire {

using Json = nlohmann::json;

inline constexpr int kWireVersion = 1;
inline constexpr std::size_t kMaxMessageBytes = 1u << 20;
inline constexpr std::string_view kContentType = "application/prima+json; v=1";

enum class MessageType {
  register_req,
  register_resp,
  challenge_req,
  challenge_resp,
  nonce_sign_req,
  nonce_sign_resp,
  infer_req,
  infer_resp,
  present_req,
  present_resp,
  revoke_req,
  revoke_resp,
  idp_key_resp,
  policy_resp,
};

inline constexpr MessageType kAllMessageTypes[] = {
    MessageType::register_req,   MessageType::register_resp,   MessageType::challenge_req,
    MessageType::challenge_resp, MessageType::nonce_sign_req,  MessageType::nonce_sign_resp,
    MessageType::infer_req,      MessageType::infer_resp,      MessageType::present_req,
    MessageType::present_resp,   MessageType::revoke_req,      MessageType::revoke_resp,
    MessageType::idp_key_resp,   MessageType::policy_resp,
};

std::string_view to_string(MessageType type);
/// Throws Error(unknown_message_type).
MessageType message_type_from_string(std::string_view text);

struct WireError {
  Errc code = Errc::internal;
  std::string detail;

  bool operator==(const WireError&) const = default;
};

/// Exactly one of body / error is present.
struct Envelope {
  int version = kWireVersion;
  MessageType type = MessageType::register_req;
  Json body;
  std::optional<WireError> error;

  static Envelope failure(MessageType type, const Error& e);
  static Envelope failure(MessageType type, Errc code, std::string detail);

  bool operator==(const Envelope& other) const {
    return version == other.version && type == other.type && body == other.body && error == other.error;
  }
};

/// Throws Error(schema_violation) if the body does not match the closed
/// schema of its message type.
std::string encode(const Envelope& envelope);

/// Errors: oversize, malformed_message, duplicate_key, unsupported_version,
/// unknown_message_type, schema_violation.
Envelope decode(std::string_view bytes);

/// Parses JSON text rejecting duplicate object keys.
Json parse_strict(std::string_view text);

/// Checks `body` against the schema registered for `type`.
void validate_body(MessageType type, const Json& body);

}  // namespace prima::wire
