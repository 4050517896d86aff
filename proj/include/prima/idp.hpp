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
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "prima/credential.hpp"
#include "prima/crypto.hpp"
#include "prima/inference.hpp"
#include "prima/time.hpp"

namespace prima::idp {

enum class AccountStatus { active, revoked };

std::string_view to_string(AccountStatus status);
AccountStatus account_status_from_string(std::string_view text);

struct AccountRecord {
  crypto::VerificationKey user_vk;
  std::vector<Attribute> attributes;
  AccountStatus status = AccountStatus::active;
  Timestamp registered_at{};
  /// Expiry of the credential issued at registration; derived statements
  /// inherit it.
  Timestamp t_exp{};
};

using RawAttributes = std::vector<std::pair<std::string, std::string>>;

/// Registration request. The signature proves possession of the user key.
struct RegisterRequest {
  RawAttributes attributes;
  crypto::VerificationKey user_vk;
  Seconds validity{};
  bool replace = false;
  Timestamp requested_at{};
  crypto::Signature request_signature;

  Bytes signing_bytes() const;
  static RegisterRequest make(const crypto::KeyPair& user, RawAttributes attributes, Seconds validity,
                              bool replace, Timestamp at);
};

/// Nonce-signing request. Its fields are the user key, the nonce and the
/// user's authentication of the request; there is no field that could name
/// a service provider.
struct NonceSignRequest {
  crypto::VerificationKey user_vk;
  Bytes nonce;
  Timestamp requested_at{};
  crypto::Signature request_signature;

  /// length-prefixed(tag) || vk_U || nonce || RFC 3339 requested_at
  Bytes signing_bytes() const;
  static NonceSignRequest make(const crypto::KeyPair& user, Bytes nonce, Timestamp at);
};

struct InferRequest {
  crypto::VerificationKey user_vk;
  std::vector<inference::Predicate> predicates;
  Timestamp requested_at{};
  crypto::Signature request_signature;

  Bytes signing_bytes() const;
  static InferRequest make(const crypto::KeyPair& user, std::vector<inference::Predicate> predicates,
                           Timestamp at);
};

struct CertifiedStatement {
  inference::DerivedStatement statement;
  crypto::Signature signature;
  Timestamp t_exp{};
};

/// Out-of-band attribute verification hook. Throw Error(validation_rejected)
/// to refuse a registration.
class AttributeValidator {
 public:
  virtual ~AttributeValidator() = default;
  virtual void check(const std::vector<Attribute>& attributes, const crypto::VerificationKey& user_vk) = 0;
};

class AcceptAllValidator final : public AttributeValidator {
 public:
  void check(const std::vector<Attribute>&, const crypto::VerificationKey&) override {}
};

struct RateLimit {
  double tokens_per_second = 1.0;
  double burst = 5.0;
};

struct IdpOptions {
  /// Empty path keeps the registry in memory only.
  std::filesystem::path journal_path;
  std::shared_ptr<AttributeValidator> validator;
  /// Per-user token bucket on sign_nonce; unset disables limiting.
  std::optional<RateLimit> nonce_rate_limit;
  Clock clock = system_clock();
  /// Accepted age of authenticated user requests.
  Seconds request_skew{300};
};

/// Account registry: in-memory index over an append-only journal. One
/// writer at a time, concurrent readers.
class Registry {
 public:
  explicit Registry(std::filesystem::path journal_path = {});

  /// Inserts, or overwrites when `replace` is set. Throws
  /// duplicate_registration / account_unknown / account_revoked.
  void put(AccountRecord record, bool replace);
  AccountStatus set_status(const crypto::VerificationKey& user_vk, AccountStatus status);
  std::optional<AccountRecord> get(const crypto::VerificationKey& user_vk) const;
  std::optional<AccountStatus> status(const crypto::VerificationKey& user_vk) const;
  std::size_t size() const;

 private:
  void load();
  void append(const std::string& line);

  std::filesystem::path journal_path_;
  mutable std::shared_mutex mutex_;
  std::map<Bytes, AccountRecord> accounts_;
};

class IdentityProvider {
 public:
  explicit IdentityProvider(crypto::KeyPair keys, IdpOptions options = {});

  const crypto::VerificationKey& verification_key() const { return keys_.verification_key; }

  /// Certifies canonicalized attributes: each is signed over
  /// (attribute, vk_U, t_exp) and a credential valid for `validity` is
  /// returned. `replace` re-certifies an existing active account.
  Credential register_user(const RawAttributes& attributes, const crypto::VerificationKey& user_vk,
                           Seconds validity, bool replace = false);

  /// Verifies the request's user signature and freshness, then the account
  /// status, and signs tag || vk_U || nonce.
  crypto::SignedMessage sign_nonce(const NonceSignRequest& request);

  AccountStatus revoke(const crypto::VerificationKey& user_vk);
  AccountStatus reinstate(const crypto::VerificationKey& user_vk);

  /// Runs the inference engine over the stored attributes and signs each
  /// resulting statement with the account's t_exp binding.
  std::vector<CertifiedStatement> certify_derived(const crypto::VerificationKey& user_vk,
                                                  const std::vector<inference::Predicate>& predicates);

  /// Authenticated entry points used by the network service.
  Credential register_authenticated(const RegisterRequest& request);
  std::vector<CertifiedStatement> infer_authenticated(const InferRequest& request);

  std::optional<AccountRecord> account(const crypto::VerificationKey& user_vk) const {
    return registry_.get(user_vk);
  }
  std::size_t account_count() const { return registry_.size(); }

 private:
  void check_fresh(Timestamp requested_at) const;
  void take_rate_token(const crypto::VerificationKey& user_vk);

  crypto::KeyPair keys_;
  IdpOptions options_;
  Registry registry_;

  struct Bucket {
    double tokens;
    Timestamp refilled;
  };
  std::mutex buckets_mutex_;
  std::map<Bytes, Bucket> buckets_;
};

}  // namespace prima::idp
