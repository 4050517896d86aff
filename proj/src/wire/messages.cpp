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

#include "prima/messages.hpp"

#include <algorithm>

#include "object_reader.hpp"

namespace prima::wire {
namespace {

using detail::ObjectReader;

std::string b64(ByteView b) { return base64url_encode(b); }
std::string b64(const mpz_class& v) { return base64url_encode(crypto::to_bytes_be(v)); }

crypto::Signature signature_from(ObjectReader& r, const std::string& key) {
  return crypto::Signature::from_bytes(r.b64(key));
}

template <std::size_t N>
std::array<std::uint8_t, N> fixed(ObjectReader& r, const std::string& key) {
  const auto raw = r.b64(key);
  if (raw.size() != N) r.fail("field '" + key + "' must be " + std::to_string(N) + " bytes");
  std::array<std::uint8_t, N> out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

Seconds seconds_from(ObjectReader& r, const std::string& key) {
  const auto v = r.integer(key);
  if (v < 0) r.fail("field '" + key + "' must be non-negative");
  return Seconds{v};
}

template <class T, class F>
std::vector<T> list(ObjectReader& r, const std::string& key, F&& each) {
  std::vector<T> out;
  for (const auto& item : r.array(key)) out.push_back(each(item));
  return out;
}

Json predicates_json(const std::vector<inference::Predicate>& ps) {
  Json a = Json::array();
  for (const auto& p : ps) a.push_back(to_json(p));
  return a;
}

Json attributes_json(const std::vector<Attribute>& as) {
  Json a = Json::array();
  for (const auto& x : as) a.push_back(to_json(x));
  return a;
}

Json signed_message_json(const crypto::SignedMessage& m) {
  return Json{{"payload", b64(m.payload)}, {"signature", b64(m.signature.value)}};
}

crypto::SignedMessage signed_message_from_json(const Json& j) {
  ObjectReader r(j, "signed message");
  crypto::SignedMessage m;
  m.payload = r.b64("payload");
  m.signature = signature_from(r, "signature");
  r.finish();
  return m;
}

Json statement_json(const idp::CertifiedStatement& s) {
  return Json{{"attribute", to_json(s.statement.attribute)},
              {"evaluated_at", format_rfc3339(s.statement.evaluated_at)},
              {"signature", b64(s.signature.value)},
              {"source_key", s.statement.source_key},
              {"t_exp", format_rfc3339(s.t_exp)}};
}

idp::CertifiedStatement statement_from_json(const Json& j) {
  ObjectReader r(j, "statement");
  idp::CertifiedStatement s;
  s.statement.attribute = attribute_from_json(r.at("attribute"));
  s.statement.evaluated_at = r.time("evaluated_at");
  s.signature = signature_from(r, "signature");
  s.statement.source_key = r.str("source_key");
  s.t_exp = r.time("t_exp");
  r.finish();
  return s;
}

}  // namespace

Json to_json(const crypto::VerificationKey& vk) {
  return Json{{"exponent", b64(vk.exponent())}, {"modulus", b64(vk.modulus())}};
}

crypto::VerificationKey verification_key_from_json(const Json& j) {
  ObjectReader r(j, "verification key");
  auto e = crypto::from_bytes_be(r.b64("exponent"));
  auto n = crypto::from_bytes_be(r.b64("modulus"));
  r.finish();
  if (n <= 1 || e <= 1) r.fail("degenerate key");
  return crypto::VerificationKey(std::move(n), std::move(e));
}

Json to_json(const inference::Predicate& p) {
  return Json{{"key", p.key}, {"kind", std::string(inference::to_string(p.kind))}, {"parameter", p.parameter}};
}

inference::Predicate predicate_from_json(const Json& j) {
  ObjectReader r(j, "predicate");
  inference::Predicate p;
  p.key = r.str("key");
  try {
    p.kind = inference::predicate_kind_from_string(r.str("kind"));
    p.parameter = r.str("parameter");
    r.finish();
    p.validate();
  } catch (const Error& e) {
    if (e.code() == Errc::schema_violation) throw;
    r.fail(e.what());
  }
  return p;
}

Json to_json(const Attribute& a) { return Json{{"key", a.key}, {"value", a.value}}; }

Attribute attribute_from_json(const Json& j) {
  ObjectReader r(j, "attribute");
  Attribute a;
  a.key = r.str("key");
  a.value = r.str("value");
  r.finish();
  return a;
}

Json to_json(const CredentialFields& c) {
  Json sigs = Json::array();
  for (const auto& s : c.signatures) sigs.push_back(b64(s.value));
  return Json{{"attributes", attributes_json(c.attributes)},
              {"signatures", sigs},
              {"t_exp", format_rfc3339(c.t_exp)},
              {"t_isu", format_rfc3339(c.t_isu)},
              {"user_vk", to_json(c.user_vk)}};
}

CredentialFields credential_from_json(const Json& j) {
  ObjectReader r(j, "credential");
  CredentialFields c;
  c.attributes = list<Attribute>(r, "attributes", attribute_from_json);
  c.signatures = list<crypto::Signature>(r, "signatures", [&](const Json& s) {
    if (!s.is_string()) r.fail("signature must be a string");
    try {
      return crypto::Signature::from_bytes(base64url_decode(s.get<std::string>()));
    } catch (const Error&) {
      r.fail("signature is not base64url");
    }
  });
  c.t_exp = r.time("t_exp");
  c.t_isu = r.time("t_isu");
  c.user_vk = verification_key_from_json(r.at("user_vk"));
  r.finish();
  return c;
}

Json to_json(const Presentation& p) {
  return Json{{"disclosed", attributes_json(p.disclosed)},
              {"packed", Json{{"count", p.packed.count}, {"value", b64(p.packed.value)}}},
              {"session_id", b64(p.session_id)},
              {"signed_nonce", signed_message_json(p.signed_nonce)},
              {"t_exp", format_rfc3339(p.t_exp)},
              {"timestamp", format_rfc3339(p.timestamp)},
              {"user_signature", b64(p.user_signature.value)},
              {"user_vk", to_json(p.user_vk)}};
}

Presentation presentation_from_json(const Json& j) {
  ObjectReader r(j, "presentation");
  Presentation p;
  p.disclosed = list<Attribute>(r, "disclosed", attribute_from_json);
  {
    ObjectReader pr(r.at("packed"), "packed");
    const auto count = pr.integer("count");
    if (count < 0) pr.fail("negative count");
    p.packed.count = static_cast<std::size_t>(count);
    p.packed.value = crypto::from_bytes_be(pr.b64("value"));
    pr.finish();
  }
  p.session_id = fixed<16>(r, "session_id");
  p.signed_nonce = signed_message_from_json(r.at("signed_nonce"));
  p.t_exp = r.time("t_exp");
  p.timestamp = r.time("timestamp");
  p.user_signature = signature_from(r, "user_signature");
  p.user_vk = verification_key_from_json(r.at("user_vk"));
  r.finish();
  return p;
}

// register-req
Json MessageTraits<idp::RegisterRequest>::to_json(const idp::RegisterRequest& v) {
  Json attrs = Json::array();
  for (const auto& [k, val] : v.attributes) attrs.push_back(Json{{"key", k}, {"value", val}});
  return Json{{"attributes", attrs},
              {"replace", v.replace},
              {"request_signature", b64(v.request_signature.value)},
              {"requested_at", format_rfc3339(v.requested_at)},
              {"user_vk", wire::to_json(v.user_vk)},
              {"validity_seconds", v.validity.count()}};
}

idp::RegisterRequest MessageTraits<idp::RegisterRequest>::from_json(const Json& j) {
  ObjectReader r(j, "register-req");
  idp::RegisterRequest v;
  v.attributes = list<std::pair<std::string, std::string>>(r, "attributes", [](const Json& a) {
    auto attr = attribute_from_json(a);
    return std::pair{attr.key, attr.value};
  });
  v.replace = r.boolean("replace");
  v.request_signature = signature_from(r, "request_signature");
  v.requested_at = r.time("requested_at");
  v.user_vk = verification_key_from_json(r.at("user_vk"));
  v.validity = seconds_from(r, "validity_seconds");
  r.finish();
  return v;
}

// register-resp
Json MessageTraits<RegisterResponse>::to_json(const RegisterResponse& v) {
  return Json{{"credential", wire::to_json(v.credential)}};
}

RegisterResponse MessageTraits<RegisterResponse>::from_json(const Json& j) {
  ObjectReader r(j, "register-resp");
  RegisterResponse v{credential_from_json(r.at("credential"))};
  r.finish();
  return v;
}

// challenge-req
Json MessageTraits<ChallengeRequest>::to_json(const ChallengeRequest& v) {
  return Json{{"user_vk", wire::to_json(v.user_vk)}};
}

ChallengeRequest MessageTraits<ChallengeRequest>::from_json(const Json& j) {
  ObjectReader r(j, "challenge-req");
  ChallengeRequest v{verification_key_from_json(r.at("user_vk"))};
  r.finish();
  return v;
}

// challenge-resp
Json MessageTraits<sp::Challenge>::to_json(const sp::Challenge& v) {
  return Json{{"idp_key_id", v.idp_key_id},
              {"issued_at", format_rfc3339(v.issued_at)},
              {"nonce", b64(v.nonce)},
              {"required", predicates_json(v.required)},
              {"service_name", v.service_name},
              {"session_id", b64(v.session_id)},
              {"ttl_seconds", v.ttl.count()}};
}

sp::Challenge MessageTraits<sp::Challenge>::from_json(const Json& j) {
  ObjectReader r(j, "challenge-resp");
  sp::Challenge v;
  v.idp_key_id = r.str("idp_key_id");
  v.issued_at = r.time("issued_at");
  v.nonce = fixed<16>(r, "nonce");
  v.required = list<inference::Predicate>(r, "required", predicate_from_json);
  v.service_name = r.str("service_name");
  v.session_id = fixed<16>(r, "session_id");
  v.ttl = seconds_from(r, "ttl_seconds");
  r.finish();
  return v;
}

// nonce-sign-req
Json MessageTraits<idp::NonceSignRequest>::to_json(const idp::NonceSignRequest& v) {
  return Json{{"nonce", b64(v.nonce)},
              {"request_signature", b64(v.request_signature.value)},
              {"requested_at", format_rfc3339(v.requested_at)},
              {"user_vk", wire::to_json(v.user_vk)}};
}

idp::NonceSignRequest MessageTraits<idp::NonceSignRequest>::from_json(const Json& j) {
  ObjectReader r(j, "nonce-sign-req");
  idp::NonceSignRequest v;
  v.nonce = r.b64("nonce");
  if (v.nonce.empty() || v.nonce.size() > 256) r.fail("nonce length");
  v.request_signature = signature_from(r, "request_signature");
  v.requested_at = r.time("requested_at");
  v.user_vk = verification_key_from_json(r.at("user_vk"));
  r.finish();
  return v;
}

// nonce-sign-resp
Json MessageTraits<NonceSignResponse>::to_json(const NonceSignResponse& v) {
  return Json{{"signed_nonce", signed_message_json(v.signed_nonce)}};
}

NonceSignResponse MessageTraits<NonceSignResponse>::from_json(const Json& j) {
  ObjectReader r(j, "nonce-sign-resp");
  NonceSignResponse v{signed_message_from_json(r.at("signed_nonce"))};
  r.finish();
  return v;
}

// infer-req
Json MessageTraits<idp::InferRequest>::to_json(const idp::InferRequest& v) {
  return Json{{"predicates", predicates_json(v.predicates)},
              {"request_signature", b64(v.request_signature.value)},
              {"requested_at", format_rfc3339(v.requested_at)},
              {"user_vk", wire::to_json(v.user_vk)}};
}

idp::InferRequest MessageTraits<idp::InferRequest>::from_json(const Json& j) {
  ObjectReader r(j, "infer-req");
  idp::InferRequest v;
  v.predicates = list<inference::Predicate>(r, "predicates", predicate_from_json);
  v.request_signature = signature_from(r, "request_signature");
  v.requested_at = r.time("requested_at");
  v.user_vk = verification_key_from_json(r.at("user_vk"));
  r.finish();
  return v;
}

// infer-resp
Json MessageTraits<InferResponse>::to_json(const InferResponse& v) {
  Json a = Json::array();
  for (const auto& s : v.statements) a.push_back(statement_json(s));
  return Json{{"statements", a}};
}

InferResponse MessageTraits<InferResponse>::from_json(const Json& j) {
  ObjectReader r(j, "infer-resp");
  InferResponse v{list<idp::CertifiedStatement>(r, "statements", statement_from_json)};
  r.finish();
  return v;
}

// present-req
Json MessageTraits<PresentRequest>::to_json(const PresentRequest& v) {
  return Json{{"presentation", wire::to_json(v.presentation)}, {"sp_nonce", b64(v.sp_nonce)}};
}

PresentRequest MessageTraits<PresentRequest>::from_json(const Json& j) {
  ObjectReader r(j, "present-req");
  PresentRequest v;
  v.presentation = presentation_from_json(r.at("presentation"));
  v.sp_nonce = r.b64("sp_nonce");
  r.finish();
  return v;
}

// present-resp
Json MessageTraits<sp::AccessToken>::to_json(const sp::AccessToken& v) {
  return Json{{"expires_at", format_rfc3339(v.expires_at)},
              {"granted_at", format_rfc3339(v.granted_at)},
              {"granted_keys", v.granted_keys},
              {"token_id", b64(v.token_id)},
              {"user_vk", wire::to_json(v.user_vk)}};
}

sp::AccessToken MessageTraits<sp::AccessToken>::from_json(const Json& j) {
  ObjectReader r(j, "present-resp");
  sp::AccessToken v;
  v.expires_at = r.time("expires_at");
  v.granted_at = r.time("granted_at");
  v.granted_keys = list<std::string>(r, "granted_keys", [&](const Json& k) {
    if (!k.is_string()) r.fail("granted key must be a string");
    return k.get<std::string>();
  });
  v.token_id = fixed<16>(r, "token_id");
  v.user_vk = verification_key_from_json(r.at("user_vk"));
  r.finish();
  return v;
}

// revoke-req
Json MessageTraits<RevokeRequest>::to_json(const RevokeRequest& v) {
  return Json{{"user_vk", wire::to_json(v.user_vk)}};
}

RevokeRequest MessageTraits<RevokeRequest>::from_json(const Json& j) {
  ObjectReader r(j, "revoke-req");
  RevokeRequest v{verification_key_from_json(r.at("user_vk"))};
  r.finish();
  return v;
}

// revoke-resp
Json MessageTraits<RevokeResponse>::to_json(const RevokeResponse& v) {
  return Json{{"status", std::string(idp::to_string(v.status))}};
}

RevokeResponse MessageTraits<RevokeResponse>::from_json(const Json& j) {
  ObjectReader r(j, "revoke-resp");
  RevokeResponse v;
  const auto status = r.str("status");
  r.finish();
  try {
    v.status = idp::account_status_from_string(status);
  } catch (const Error&) {
    r.fail("unknown status '" + status + "'");
  }
  return v;
}

// idp-key-resp
Json MessageTraits<IdpKeyResponse>::to_json(const IdpKeyResponse& v) {
  return Json{{"idp_vk", wire::to_json(v.idp_vk)}};
}

IdpKeyResponse MessageTraits<IdpKeyResponse>::from_json(const Json& j) {
  ObjectReader r(j, "idp-key-resp");
  IdpKeyResponse v{verification_key_from_json(r.at("idp_vk"))};
  r.finish();
  return v;
}

// policy-resp
Json MessageTraits<PolicyResponse>::to_json(const PolicyResponse& v) {
  return Json{{"idp_key_id", v.idp_key_id},
              {"required", predicates_json(v.required)},
              {"service_name", v.service_name}};
}

PolicyResponse MessageTraits<PolicyResponse>::from_json(const Json& j) {
  ObjectReader r(j, "policy-resp");
  PolicyResponse v;
  v.idp_key_id = r.str("idp_key_id");
  v.required = list<inference::Predicate>(r, "required", predicate_from_json);
  v.service_name = r.str("service_name");
  r.finish();
  return v;
}

}  // namespace prima::wire
