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

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "prima/credential.hpp"
#include "prima/crypto.hpp"
#include "prima/inference.hpp"
#include "prima/time.hpp"

namespace prima::sp {

using Nonce = std::array<std::uint8_t, 16>;
using TokenId = std::array<std::uint8_t, 16>;

inline constexpr Seconds kDefaultClockSkew{120};
inline constexpr Seconds kDefaultChallengeTtl{300};
inline constexpr Seconds kDefaultTokenTtl{3600};

struct ServicePolicy {
  std::string service_name;
  /// Plain attribute keys are reveal predicates.
  std::vector<inference::Predicate> required;
  crypto::VerificationKey idp_vk;
  Seconds clock_skew = kDefaultClockSkew;
  Seconds token_ttl = kDefaultTokenTtl;
  Seconds challenge_ttl = kDefaultChallengeTtl;

  /// Throws Error(invalid_predicate) for an empty or malformed requirement
  /// list, negative skew or non-positive TTLs.
  void validate() const;
};

struct Challenge {
  Nonce nonce{};
  SessionId session_id{};
  std::vector<inference::Predicate> required;
  Timestamp issued_at{};
  Seconds ttl{};
  std::string service_name;
  /// Fingerprint of the IdP key this SP trusts.
  std::string idp_key_id;

  bool operator==(const Challenge&) const = default;
};

struct AccessToken {
  TokenId token_id{};
  crypto::VerificationKey user_vk;
  Timestamp granted_at{};
  Timestamp expires_at{};
  std::vector<std::string> granted_keys;

  bool operator==(const AccessToken&) const = default;
};

/// What the SP keeps after a successful login: the token and the disclosed
/// attributes, nothing else.
struct SessionRecord {
  AccessToken token;
  std::vector<Attribute> disclosed;
};

class ServiceProvider {
 public:
  explicit ServiceProvider(ServicePolicy policy, Clock clock = system_clock());

  const ServicePolicy& policy() const { return policy_; }

  /// Fresh nonce and session id, recorded as pending and bound to `user_id`.
  Challenge create_challenge(const crypto::VerificationKey& user_id);

  /// Runs the seven checks in order and returns a token; each failure throws
  /// Error with its own code (bad_user_signature, unknown_session,
  /// session_consumed, stale_timestamp, credential_expired,
  /// bad_idp_nonce_signature, missing_required, bad_packed_signature).
  ///
  /// The IdP nonce signature is folded into the packed attribute check, so an
  /// accepted presentation costs one exponentiation with the IdP key (plus
  /// one with the user key for check 1).
  AccessToken verify_presentation(const Presentation& presentation, ByteView sp_nonce, Timestamp now);

  /// Drops pending challenges older than their TTL; returns how many.
  std::size_t expire_challenges(Timestamp now);

  bool validate_token(const TokenId& token_id, Timestamp now) const;

  std::size_t pending_count() const;

  /// Canonical JSON dump of every stored session record.
  std::string export_state() const;

  Timestamp now() const { return clock_(); }

 private:
  struct Pending {
    Nonce nonce;
    crypto::VerificationKey user_vk;
    Timestamp issued_at;
    Seconds ttl;
    bool consumed = false;
  };

  void check_coverage(const Presentation& presentation) const;

  ServicePolicy policy_;
  Clock clock_;

  mutable std::mutex pending_mutex_;
  std::map<SessionId, Pending> pending_;

  mutable std::shared_mutex tokens_mutex_;
  std::map<TokenId, SessionRecord> sessions_;
};

}  // namespace prima::sp
