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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace prima {

/// Machine-readable failure codes shared by every component and carried
/// verbatim in wire error envelopes.
enum class Errc {
  // crypto
  unsupported_key_size,
  malformed_signature,
  duplicate_message,
  // credential
  invalid_attribute_key,
  invalid_attribute_value,
  duplicate_attribute_key,
  missing_attribute,
  invalid_credential,
  invalid_presentation,
  parse_error,
  unsupported_version,
  // inference
  invalid_predicate,
  unparsable_date,
  predicate_not_satisfied,
  // idp
  duplicate_registration,
  empty_attributes,
  account_unknown,
  account_revoked,
  bad_request_signature,
  stale_request,
  validation_rejected,
  rate_limited,
  // sp
  bad_user_signature,
  unknown_session,
  session_consumed,
  stale_timestamp,
  credential_expired,
  bad_idp_nonce_signature,
  missing_required,
  bad_packed_signature,
  // wire
  oversize,
  unknown_message_type,
  duplicate_key,
  schema_violation,
  malformed_message,
  not_found,
  network_error,
  // agent
  consent_denied,
  credential_rejected,
  not_enrolled,
  already_enrolled,
  wallet_locked,
  wallet_corrupt,
  io_error,
  // scenarios
  script_error,
  internal,
};

std::string_view to_string(Errc code);

/// Inverse of to_string. Unknown strings map to Errc::internal.
Errc errc_from_string(std::string_view code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string detail);

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

/// Binary deserialization failure; records the byte offset where parsing
/// stopped.
class ParseError : public Error {
 public:
  ParseError(Errc code, std::string detail, std::size_t offset);

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace prima
