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

// Typed bodies for every wire message and their closed JSON schemas.

#include <string>
#include <vector>

#include "prima/credential.hpp"
#include "prima/idp.hpp"
#include "prima/inference.hpp"
#include "prima/sp.hpp"
#include "prima/wire.hpp"

namespace prima::wire {

struct RegisterResponse {
  CredentialFields credential;
  bool operator==(const RegisterResponse&) const = default;
};

struct ChallengeRequest {
  crypto::VerificationKey user_vk;
  bool operator==(const ChallengeRequest&) const = default;
};

struct NonceSignResponse {
  crypto::SignedMessage signed_nonce;
  bool operator==(const NonceSignResponse&) const = default;
};

struct InferResponse {
  std::vector<idp::CertifiedStatement> statements;
};

struct PresentRequest {
  Presentation presentation;
  Bytes sp_nonce;
  bool operator==(const PresentRequest&) const = default;
};

struct RevokeRequest {
  crypto::VerificationKey user_vk;
  bool operator==(const RevokeRequest&) const = default;
};

struct RevokeResponse {
  idp::AccountStatus status = idp::AccountStatus::active;
  bool operator==(const RevokeResponse&) const = default;
};

struct IdpKeyResponse {
  crypto::VerificationKey idp_vk;
  bool operator==(const IdpKeyResponse&) const = default;
};

struct PolicyResponse {
  std::string service_name;
  std::vector<inference::Predicate> required;
  std::string idp_key_id;
  bool operator==(const PolicyResponse&) const = default;
};

template <class T>
struct MessageTraits;

#define PRIMA_WIRE_MESSAGE(Type, Tag)           \
  template <>                                   \
  struct MessageTraits<Type> {                  \
    static constexpr MessageType type = Tag;    \
    static Json to_json(const Type& value);     \
    static Type from_json(const Json& body);    \
  }

PRIMA_WIRE_MESSAGE(idp::RegisterRequest, MessageType::register_req);
PRIMA_WIRE_MESSAGE(RegisterResponse, MessageType::register_resp);
PRIMA_WIRE_MESSAGE(ChallengeRequest, MessageType::challenge_req);
PRIMA_WIRE_MESSAGE(sp::Challenge, MessageType::challenge_resp);
PRIMA_WIRE_MESSAGE(idp::NonceSignRequest, MessageType::nonce_sign_req);
PRIMA_WIRE_MESSAGE(NonceSignResponse, MessageType::nonce_sign_resp);
PRIMA_WIRE_MESSAGE(idp::InferRequest, MessageType::infer_req);
PRIMA_WIRE_MESSAGE(InferResponse, MessageType::infer_resp);
PRIMA_WIRE_MESSAGE(PresentRequest, MessageType::present_req);
PRIMA_WIRE_MESSAGE(sp::AccessToken, MessageType::present_resp);
PRIMA_WIRE_MESSAGE(RevokeRequest, MessageType::revoke_req);
PRIMA_WIRE_MESSAGE(RevokeResponse, MessageType::revoke_resp);
PRIMA_WIRE_MESSAGE(IdpKeyResponse, MessageType::idp_key_resp);
PRIMA_WIRE_MESSAGE(PolicyResponse, MessageType::policy_resp);

#undef PRIMA_WIRE_MESSAGE

template <class T>
Envelope make_envelope(const T& body) {
  Envelope e;
  e.type = MessageTraits<T>::type;
  e.body = MessageTraits<T>::to_json(body);
  return e;
}

/// Returns the typed body, or rethrows a carried error as prima::Error.
template <class T>
T open(const Envelope& envelope) {
  if (envelope.error) throw Error(envelope.error->code, envelope.error->detail);
  if (envelope.type != MessageTraits<T>::type) {
    throw Error(Errc::malformed_message, "unexpected message type " + std::string(to_string(envelope.type)));
  }
  return MessageTraits<T>::from_json(envelope.body);
}

// Shared structure codecs, also used for config and scenario files.
Json to_json(const crypto::VerificationKey& vk);
crypto::VerificationKey verification_key_from_json(const Json& j);
Json to_json(const inference::Predicate& p);
inference::Predicate predicate_from_json(const Json& j);
Json to_json(const Attribute& a);
Attribute attribute_from_json(const Json& j);
Json to_json(const CredentialFields& c);
CredentialFields credential_from_json(const Json& j);
Json to_json(const Presentation& p);
Presentation presentation_from_json(const Json& j);

}  // namespace prima::wire
