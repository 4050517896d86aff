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

#include "prima/sp.hpp"

#include <algorithm>

#include "prima/error.hpp"
#include "prima/messages.hpp"

namespace prima::sp {
namespace {

bool in_group(const mpz_class& v, const mpz_class& n) { return v > 0 && v < n; }

}  // namespace

void ServicePolicy::validate() const {
  if (required.empty()) throw Error(Errc::invalid_predicate, "policy requires at least one attribute");
  for (const auto& p : required) p.validate();
  if (clock_skew < Seconds{0}) throw Error(Errc::invalid_predicate, "negative clock skew");
  if (token_ttl <= Seconds{0} || challenge_ttl <= Seconds{0}) {
    throw Error(Errc::invalid_predicate, "TTLs must be positive");
  }
  if (idp_vk.modulus() <= 1) throw Error(Errc::invalid_predicate, "policy lacks a trusted IdP key");
}

ServiceProvider::ServiceProvider(ServicePolicy policy, Clock clock)
    : policy_(std::move(policy)), clock_(clock ? std::move(clock) : system_clock()) {
  policy_.validate();
}

Challenge ServiceProvider::create_challenge(const crypto::VerificationKey& user_id) {
  Challenge c;
  c.required = policy_.required;
  c.issued_at = clock_();
  c.ttl = policy_.challenge_ttl;
  c.service_name = policy_.service_name;
  c.idp_key_id = policy_.idp_vk.fingerprint();

  std::lock_guard lock(pending_mutex_);
  do {
    c.nonce = random_array<16>();
    c.session_id = random_array<16>();
  } while (pending_.count(c.session_id) != 0);
  pending_.emplace(c.session_id, Pending{c.nonce, user_id, c.issued_at, c.ttl, false});
  return c;
}

void ServiceProvider::check_coverage(const Presentation& p) const {
  std::string missing;
  for (const auto& req : policy_.required) {
    const auto key = req.statement_key();
    const auto it = std::find_if(p.disclosed.begin(), p.disclosed.end(),
                                 [&](const Attribute& a) { return a.key == key; });
    const bool ok = it != p.disclosed.end() && (!it->is_derived() || it->value == "true");
    if (!ok) {
      if (!missing.empty()) missing += ",";
      missing += key;
    }
  }
  if (!missing.empty()) throw Error(Errc::missing_required, missing);
}

AccessToken ServiceProvider::verify_presentation(const Presentation& p, ByteView sp_nonce, Timestamp now) {
  p.validate_structure();

  // (1) user signature over the presentation body
  if (!crypto::verify_bytes(p.user_vk, presentation_body(p, sp_nonce), p.user_signature)) {
    throw Error(Errc::bad_user_signature, "presentation signature does not verify");
  }

  // (2) session exists, is bound to this user and nonce, unexpired, unconsumed
  {
    std::lock_guard lock(pending_mutex_);
    auto it = pending_.find(p.session_id);
    if (it == pending_.end()) throw Error(Errc::unknown_session, "no such session");
    const auto& s = it->second;
    if (now > s.issued_at + s.ttl) throw Error(Errc::unknown_session, "session expired");
    if (!(s.user_vk == p.user_vk)) throw Error(Errc::unknown_session, "session issued to another user");
    if (!std::equal(s.nonce.begin(), s.nonce.end(), sp_nonce.begin(), sp_nonce.end())) {
      throw Error(Errc::unknown_session, "nonce does not match session");
    }
    if (s.consumed) throw Error(Errc::session_consumed, "session already used");
  }

  // (3) timestamp freshness
  const auto drift = now > p.timestamp ? now - p.timestamp : p.timestamp - now;
  if (drift > policy_.clock_skew) throw Error(Errc::stale_timestamp, format_rfc3339(p.timestamp));

  // (4) credential expiry
  if (!(now < p.t_exp)) throw Error(Errc::credential_expired, format_rfc3339(p.t_exp));

  // (5)-(7) The nonce signature and the packed attribute signature are
  // checked together: P * s_nonce must equal (prod H(a_i) * H(nonce))^d.
  // Only when that fails are the parts checked separately to pick the
  // error code in check order.
  const auto& idp_vk = policy_.idp_vk;
  const auto expected_payload = nonce_payload(p.user_vk, sp_nonce);
  if (p.signed_nonce.payload != expected_payload) {
    throw Error(Errc::bad_idp_nonce_signature, "nonce payload does not match the session");
  }
  const auto& n = idp_vk.modulus();
  bool combined_ok = false;
  if (in_group(p.packed.value, n) && in_group(p.signed_nonce.signature.value, n)) {
    std::vector<Bytes> messages;
    messages.reserve(p.disclosed.size() + 1);
    for (const auto& a : p.disclosed) messages.push_back(crypto::encode_attribute(a, p.user_vk, p.t_exp));
    messages.push_back(expected_payload);
    try {
      combined_ok = crypto::batch_verify_encoded(
          idp_vk, messages, crypto::pack_with(p.packed, p.signed_nonce.signature, n));
    } catch (const Error& e) {
      if (e.code() != Errc::duplicate_message) throw;
    }
  }
  if (!combined_ok) {
    if (!crypto::verify_message(idp_vk, p.signed_nonce)) {
      throw Error(Errc::bad_idp_nonce_signature, "nonce signature does not verify");
    }
    check_coverage(p);
    throw Error(Errc::bad_packed_signature, "packed signature does not verify");
  }
  check_coverage(p);

  AccessToken token;
  token.token_id = random_array<16>();
  token.user_vk = p.user_vk;
  token.granted_at = now;
  token.expires_at = now + policy_.token_ttl;
  for (const auto& a : p.disclosed) token.granted_keys.push_back(a.key);

  // Atomic consume: of any number of concurrent submissions of one session,
  // exactly one gets past this point.
  {
    std::lock_guard lock(pending_mutex_);
    auto it = pending_.find(p.session_id);
    if (it == pending_.end()) throw Error(Errc::unknown_session, "session expired");
    if (it->second.consumed) throw Error(Errc::session_consumed, "session already used");
    it->second.consumed = true;
  }
  {
    std::unique_lock lock(tokens_mutex_);
    sessions_.emplace(token.token_id, SessionRecord{token, p.disclosed});
  }
  return token;
}

std::size_t ServiceProvider::expire_challenges(Timestamp now) {
  std::lock_guard lock(pending_mutex_);
  return std::erase_if(pending_, [&](const auto& kv) { return now > kv.second.issued_at + kv.second.ttl; });
}

bool ServiceProvider::validate_token(const TokenId& token_id, Timestamp now) const {
  std::shared_lock lock(tokens_mutex_);
  auto it = sessions_.find(token_id);
  return it != sessions_.end() && now < it->second.token.expires_at;
}

std::size_t ServiceProvider::pending_count() const {
  std::lock_guard lock(pending_mutex_);
  return pending_.size();
}

std::string ServiceProvider::export_state() const {
  std::shared_lock lock(tokens_mutex_);
  wire::Json sessions = wire::Json::array();
  for (const auto& [id, record] : sessions_) {
    wire::Json disclosed = wire::Json::array();
    for (const auto& a : record.disclosed) disclosed.push_back(wire::to_json(a));
    sessions.push_back(wire::Json{{"disclosed", disclosed},
                                  {"token", wire::MessageTraits<AccessToken>::to_json(record.token)}});
  }
  return wire::Json{{"service_name", policy_.service_name}, {"sessions", sessions}}.dump();
}

}  // namespace prima::sp
