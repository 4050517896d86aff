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

#include "prima/agent.hpp"

#include <algorithm>

#include "prima/error.hpp"
#include "prima/services.hpp"

namespace prima::agent {

namespace paths = services::paths;

bool Consent::allows(const inference::Predicate& requirement) const {
  if (requirement.kind == inference::PredicateKind::reveal && disclose.count(requirement.key) != 0) return true;
  return std::find(proofs.begin(), proofs.end(), requirement) != proofs.end();
}

Agent::Agent(Wallet& wallet, wire::Transport& transport, Clock clock)
    : wallet_(wallet), transport_(transport), clock_(clock ? std::move(clock) : system_clock()) {}

const WalletCredential& Agent::enroll(const std::string& idp_endpoint, const idp::RawAttributes& attributes,
                                      Seconds validity, bool replace) {
  const auto idp_vk = wire::get<wire::IdpKeyResponse>(transport_, idp_endpoint, paths::kIdpKey).idp_vk;
  if (!replace && wallet_.find_by_idp(idp_vk.fingerprint()) != nullptr) {
    throw Error(Errc::already_enrolled, idp_vk.fingerprint());
  }

  std::vector<Attribute> expected;
  for (const auto& [k, v] : attributes) expected.push_back(canonicalize_attribute(k, v));
  std::sort(expected.begin(), expected.end());

  const auto request = idp::RegisterRequest::make(wallet_.keypair(), attributes, validity, replace, clock_());
  auto fields = wire::call<wire::RegisterResponse>(transport_, idp_endpoint, paths::kRegister, request).credential;

  auto issued = fields.attributes;
  std::sort(issued.begin(), issued.end());
  if (issued != expected) throw Error(Errc::credential_rejected, "IdP certified different attributes");
  if (!(fields.user_vk == wallet_.user_vk())) {
    throw Error(Errc::credential_rejected, "credential is bound to another user key");
  }

  std::optional<Credential> credential;
  try {
    credential.emplace(std::move(fields), idp_vk);
  } catch (const Error& e) {
    throw Error(Errc::credential_rejected, e.detail());
  }

  wallet_.put_credential(WalletCredential{idp_endpoint, std::move(*credential)}, replace);
  wallet_.save();
  return *wallet_.find_by_idp(idp_vk.fingerprint());
}

const WalletCredential& Agent::credential_for(const sp::Challenge& challenge) const {
  const auto* held = wallet_.find_by_idp(challenge.idp_key_id);
  if (held == nullptr) throw Error(Errc::not_enrolled, "no credential from IdP " + challenge.idp_key_id);
  return *held;
}

std::vector<idp::CertifiedStatement> Agent::derive(const WalletCredential& held,
                                                   const std::vector<inference::Predicate>& needed) {
  const auto request = idp::InferRequest::make(wallet_.keypair(), needed, clock_());
  auto statements =
      wire::call<wire::InferResponse>(transport_, held.idp_endpoint, paths::kInfer, request).statements;
  if (statements.size() != needed.size()) throw Error(Errc::credential_rejected, "IdP answered a different set");

  for (std::size_t i = 0; i < needed.size(); ++i) {
    const auto& s = statements[i];
    const auto& attr = s.statement.attribute;
    if (attr.key != needed[i].statement_key() || s.t_exp != held.credential.t_exp() ||
        !crypto::verify_attribute(held.idp_vk(), attr, wallet_.user_vk(), s.t_exp, s.signature)) {
      throw Error(Errc::credential_rejected, "derived statement " + attr.key + " does not verify");
    }
  }
  return statements;
}

PreparedLogin Agent::prepare(const std::string& sp_endpoint, const ConsentPrompt& prompt, LoginOptions options) {
  PreparedLogin out;
  out.challenge = wire::call<sp::Challenge>(transport_, sp_endpoint, paths::kRequestAccess,
                                            wire::ChallengeRequest{wallet_.user_vk()});
  const auto& challenge = out.challenge;
  const auto& held = credential_for(challenge);

  const auto consent = prompt(challenge);
  std::string excess;
  for (const auto& req : challenge.required) {
    if (consent.allows(req)) continue;
    if (!excess.empty()) excess += ",";
    excess += req.display_name();
  }
  if (!excess.empty()) throw Error(Errc::consent_denied, excess);

  const auto now = clock_();
  const auto id = held.idp_key_id();
  std::vector<inference::Predicate> needed;
  std::set<std::string> keys;
  for (const auto& req : challenge.required) {
    keys.insert(req.statement_key());
    if (req.kind == inference::PredicateKind::reveal) continue;
    const auto* cached = wallet_.find_statement(id, req.statement_key());
    const bool usable = cached != nullptr && !options.fresh && cached->certified.t_exp == held.credential.t_exp() &&
                        now < cached->certified.t_exp;
    if (!usable) needed.push_back(req);
  }
  if (!needed.empty()) {
    for (auto& s : derive(held, needed)) wallet_.put_statement(CachedStatement{id, std::move(s)});
    wallet_.save();
  }

  std::vector<Attribute> extra;
  std::vector<crypto::Signature> extra_sigs;
  for (const auto& req : challenge.required) {
    if (req.kind == inference::PredicateKind::reveal) continue;
    const auto* cached = wallet_.find_statement(id, req.statement_key());
    extra.push_back(cached->certified.statement.attribute);
    extra_sigs.push_back(cached->certified.signature);
  }
  const auto working = extra.empty() ? held.credential : held.credential.extended(extra, extra_sigs);
  auto disclosure = select_disclosure(working, keys);

  const auto nonce_request =
      idp::NonceSignRequest::make(wallet_.keypair(), Bytes(challenge.nonce.begin(), challenge.nonce.end()), now);
  auto signed_nonce =
      wire::call<wire::NonceSignResponse>(transport_, held.idp_endpoint, paths::kSignNonce, nonce_request)
          .signed_nonce;
  if (signed_nonce.payload != nonce_payload(wallet_.user_vk(), challenge.nonce) ||
      !crypto::verify_message(held.idp_vk(), signed_nonce)) {
    throw Error(Errc::bad_idp_nonce_signature, "IdP returned an invalid nonce signature");
  }

  auto& p = out.request.presentation;
  p.disclosed = std::move(disclosure.attributes);
  p.packed = std::move(disclosure.packed);
  p.user_vk = wallet_.user_vk();
  p.t_exp = held.credential.t_exp();
  p.timestamp = clock_() + options.timestamp_offset;
  p.session_id = challenge.session_id;
  p.signed_nonce = std::move(signed_nonce);
  out.request.sp_nonce.assign(challenge.nonce.begin(), challenge.nonce.end());
  p.user_signature = crypto::sign_bytes(wallet_.keypair().signing_key, presentation_body(p, out.request.sp_nonce));
  return out;
}

sp::AccessToken Agent::submit(const std::string& sp_endpoint, const wire::PresentRequest& request) {
  return wire::call<sp::AccessToken>(transport_, sp_endpoint, paths::kPresent, request);
}

sp::AccessToken Agent::login(const std::string& sp_endpoint, const ConsentPrompt& prompt, LoginOptions options) {
  return submit(sp_endpoint, prepare(sp_endpoint, prompt, options).request);
}

sp::AccessToken Agent::login(const std::string& sp_endpoint, const Consent& consent, LoginOptions options) {
  return login(sp_endpoint, ConsentPrompt([consent](const sp::Challenge&) { return consent; }), options);
}

}  // namespace prima::agent
