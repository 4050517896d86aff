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
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prima/attribute.hpp"
#include "prima/bytes.hpp"
#include "prima/crypto.hpp"
#include "prima/time.hpp"

namespace prima {

inline constexpr std::size_t kMaxAttributeKeyLength = 64;
inline constexpr std::size_t kMaxAttributeValueLength = 4096;
inline constexpr std::string_view kDerivedKeyPrefix = "proof:";
inline constexpr std::uint8_t kFormatVersion = 1;

/// Throws Error(invalid_attribute_key / invalid_attribute_value) unless the
/// attribute is already canonical: key in [a-z0-9_:]{1,64}, value valid
/// UTF-8 of at most 4096 bytes.
void validate_attribute(const Attribute& attribute);

/// Lower-cases the key and trims surrounding whitespace from both fields.
Attribute canonicalize_attribute(std::string_view raw_key, std::string_view raw_value);

/// dID = <A, sigma_A, vk_U, {t_isu, t_exp}> as plain data, before any
/// signature checks.
struct CredentialFields {
  std::vector<Attribute> attributes;
  std::vector<crypto::Signature> signatures;
  crypto::VerificationKey user_vk;
  Timestamp t_isu{};
  Timestamp t_exp{};

  bool operator==(const CredentialFields&) const = default;
};

/// A credential whose every attribute signature has been checked
/// individually against the issuing IdP key.
class Credential {
 public:
  /// Throws Error(invalid_credential) when a structural invariant fails or a
  /// signature does not verify.
  Credential(CredentialFields fields, crypto::VerificationKey issuer);

  const CredentialFields& fields() const { return fields_; }
  const std::vector<Attribute>& attributes() const { return fields_.attributes; }
  const std::vector<crypto::Signature>& signatures() const { return fields_.signatures; }
  const crypto::VerificationKey& user_vk() const { return fields_.user_vk; }
  Timestamp t_isu() const { return fields_.t_isu; }
  Timestamp t_exp() const { return fields_.t_exp; }
  const crypto::VerificationKey& issuer() const { return issuer_; }

  /// Index of `key`, or size() when absent.
  std::size_t find(std::string_view key) const;
  std::size_t size() const { return fields_.attributes.size(); }

  /// New credential with additional attributes signed by the same issuer
  /// under the same (vk_U, t_exp) binding; used for derived statements.
  Credential extended(std::span<const Attribute> attributes,
                      std::span<const crypto::Signature> signatures) const;

  bool operator==(const Credential& other) const {
    return fields_ == other.fields_ && issuer_ == other.issuer_;
  }

 private:
  CredentialFields fields_;
  crypto::VerificationKey issuer_;
};

struct Disclosure {
  std::vector<Attribute> attributes;  // sorted by key
  crypto::PackedSignature packed;
};

/// Exactly the requested attributes plus the pack of exactly their
/// signatures. Throws Error(missing_attribute) naming the first absent key.
Disclosure select_disclosure(const Credential& credential, const std::set<std::string>& requested_keys);

using SessionId = std::array<std::uint8_t, 16>;

/// dID* together with the IdP-signed nonce and the user's signature.
struct Presentation {
  std::vector<Attribute> disclosed;
  crypto::PackedSignature packed;
  crypto::VerificationKey user_vk;
  Timestamp t_exp{};
  Timestamp timestamp{};
  SessionId session_id{};
  crypto::SignedMessage signed_nonce;
  crypto::Signature user_signature;

  /// Canonical attributes, pairwise-distinct keys, packed.count matches.
  /// Throws Error(invalid_presentation).
  void validate_structure() const;

  bool operator==(const Presentation&) const = default;
};

/// The user's signing target: every presentation field except the user
/// signature, plus the SP nonce, all length-prefixed in a fixed order.
Bytes presentation_body(const Presentation& presentation, ByteView sp_nonce);

/// Payload the IdP signs for a nonce: tag || vk_U || nonce. Carries no
/// service-provider information by construction.
Bytes nonce_payload(const crypto::VerificationKey& user_vk, ByteView nonce);

Bytes serialize(const CredentialFields& credential);
inline Bytes serialize(const Credential& credential) { return serialize(credential.fields()); }
Bytes serialize(const Presentation& presentation);

/// Structural parse only. Throws ParseError.
CredentialFields deserialize_credential_fields(ByteView data);
/// Parse, then verify every signature against `issuer`.
Credential deserialize_credential(ByteView data, const crypto::VerificationKey& issuer);
Presentation deserialize_presentation(ByteView data);

}  // namespace prima
