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

#include "prima/error.hpp"

#include <array>
#include <utility>

namespace prima {
namespace {

struct Entry {
  Errc code;
  std::string_view name;
};

constexpr std::array kNames = {
    Entry{Errc::unsupported_key_size, "unsupported-key-size"},
    Entry{Errc::malformed_signature, "malformed-signature"},
    Entry{Errc::duplicate_message, "duplicate-message"},
    Entry{Errc::invalid_attribute_key, "invalid-attribute-key"},
    Entry{Errc::invalid_attribute_value, "invalid-attribute-value"},
    Entry{Errc::duplicate_attribute_key, "duplicate-attribute-key"},
    Entry{Errc::missing_attribute, "missing-attribute"},
    Entry{Errc::invalid_credential, "invalid-credential"},
    Entry{Errc::invalid_presentation, "invalid-presentation"},
    Entry{Errc::parse_error, "parse-error"},
    Entry{Errc::unsupported_version, "unsupported-version"},
    Entry{Errc::invalid_predicate, "invalid-predicate"},
    Entry{Errc::unparsable_date, "unparsable-date"},
    Entry{Errc::predicate_not_satisfied, "predicate-not-satisfied"},
    Entry{Errc::duplicate_registration, "duplicate-registration"},
    Entry{Errc::empty_attributes, "empty-attributes"},
    Entry{Errc::account_unknown, "account-unknown"},
    Entry{Errc::account_revoked, "account-revoked"},
    Entry{Errc::bad_request_signature, "bad-request-signature"},
    Entry{Errc::stale_request, "stale-request"},
    Entry{Errc::validation_rejected, "validation-rejected"},
    Entry{Errc::rate_limited, "rate-limited"},
    Entry{Errc::bad_user_signature, "bad-user-signature"},
    Entry{Errc::unknown_session, "unknown-session"},
    Entry{Errc::session_consumed, "session-consumed"},
    Entry{Errc::stale_timestamp, "stale-timestamp"},
    Entry{Errc::credential_expired, "credential-expired"},
    Entry{Errc::bad_idp_nonce_signature, "bad-idp-nonce-signature"},
    Entry{Errc::missing_required, "missing-required"},
    Entry{Errc::bad_packed_signature, "bad-packed-signature"},
    Entry{Errc::oversize, "oversize"},
    Entry{Errc::unknown_message_type, "unknown-message-type"},
    Entry{Errc::duplicate_key, "duplicate-key"},
    Entry{Errc::schema_violation, "schema-violation"},
    Entry{Errc::malformed_message, "malformed-message"},
    Entry{Errc::not_found, "not-found"},
    Entry{Errc::network_error, "network-error"},
    Entry{Errc::consent_denied, "consent-denied"},
    Entry{Errc::credential_rejected, "credential-rejected"},
    Entry{Errc::not_enrolled, "not-enrolled"},
    Entry{Errc::already_enrolled, "already-enrolled"},
    Entry{Errc::wallet_locked, "wallet-locked"},
    Entry{Errc::wallet_corrupt, "wallet-corrupt"},
    Entry{Errc::io_error, "io-error"},
    Entry{Errc::script_error, "script-error"},
    Entry{Errc::internal, "internal"},
};

std::string compose(Errc code, const std::string& detail) {
  std::string out{to_string(code)};
  if (!detail.empty()) {
    out += ": ";
    out += detail;
  }
  return out;
}

}  // namespace

std::string_view to_string(Errc code) {
  for (const auto& e : kNames) {
    if (e.code == code) return e.name;
  }
  return "internal";
}

Errc errc_from_string(std::string_view code) {
  for (const auto& e : kNames) {
    if (e.name == code) return e.code;
  }
  return Errc::internal;
}

Error::Error(Errc code, std::string detail)
    : std::runtime_error(compose(code, detail)), code_(code), detail_(std::move(detail)) {}

ParseError::ParseError(Errc code, std::string detail, std::size_t offset)
    : Error(code, detail + " at offset " + std::to_string(offset)), offset_(offset) {}

}  // namespace prima
