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

#include "prima/idp.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "prima/error.hpp"
#include "prima/messages.hpp"

namespace prima::idp {
namespace {

constexpr std::string_view kRegisterTag = "PRIMA-REGISTER-v1";
constexpr std::string_view kNonceRequestTag = "PRIMA-NONCE-REQUEST-v1";
constexpr std::string_view kInferTag = "PRIMA-INFER-v1";

std::vector<Attribute> canonical_attributes(const RawAttributes& raw) {
  if (raw.empty()) throw Error(Errc::empty_attributes, "at least one attribute is required");
  std::vector<Attribute> out;
  std::set<std::string> keys;
  for (const auto& [k, v] : raw) {
    auto a = canonicalize_attribute(k, v);
    if (!keys.insert(a.key).second) throw Error(Errc::duplicate_attribute_key, a.key);
    out.push_back(std::move(a));
  }
  return out;
}

wire::Json record_json(const AccountRecord& r) {
  wire::Json attrs = wire::Json::array();
  for (const auto& a : r.attributes) attrs.push_back(wire::to_json(a));
  return wire::Json{{"attributes", attrs},
                    {"registered_at", format_rfc3339(r.registered_at)},
                    {"status", std::string(to_string(r.status))},
                    {"t_exp", format_rfc3339(r.t_exp)},
                    {"user_vk", wire::to_json(r.user_vk)}};
}

AccountRecord record_from_json(const wire::Json& j) {
  AccountRecord r;
  for (const auto& a : j.at("attributes")) r.attributes.push_back(wire::attribute_from_json(a));
  r.registered_at = parse_rfc3339(j.at("registered_at").get<std::string>());
  r.status = account_status_from_string(j.at("status").get<std::string>());
  r.t_exp = parse_rfc3339(j.at("t_exp").get<std::string>());
  r.user_vk = wire::verification_key_from_json(j.at("user_vk"));
  return r;
}

}  // namespace

std::string_view to_string(AccountStatus status) {
  return status == AccountStatus::active ? "active" : "revoked";
}

AccountStatus account_status_from_string(std::string_view text) {
  if (text == "active") return AccountStatus::active;
  if (text == "revoked") return AccountStatus::revoked;
  throw Error(Errc::malformed_message, "account status '" + std::string(text) + "'");
}

Bytes RegisterRequest::signing_bytes() const {
  ByteWriter w;
  w.field(kRegisterTag).field(user_vk.to_bytes());
  w.u32(static_cast<std::uint32_t>(attributes.size()));
  for (const auto& [k, v] : attributes) w.field(k).field(v);
  w.field(std::to_string(validity.count()));
  w.u8(replace ? 1 : 0);
  w.field(format_rfc3339(requested_at));
  return std::move(w).bytes();
}

RegisterRequest RegisterRequest::make(const crypto::KeyPair& user, RawAttributes attributes, Seconds validity,
                                      bool replace, Timestamp at) {
  RegisterRequest r{std::move(attributes), user.verification_key, validity, replace, at, {}};
  r.request_signature = crypto::sign_bytes(user.signing_key, r.signing_bytes());
  return r;
}

Bytes NonceSignRequest::signing_bytes() const {
  ByteWriter w;
  w.field(kNonceRequestTag).field(user_vk.to_bytes()).field(nonce).field(format_rfc3339(requested_at));
  return std::move(w).bytes();
}

NonceSignRequest NonceSignRequest::make(const crypto::KeyPair& user, Bytes nonce, Timestamp at) {
  NonceSignRequest r{user.verification_key, std::move(nonce), at, {}};
  r.request_signature = crypto::sign_bytes(user.signing_key, r.signing_bytes());
  return r;
}

Bytes InferRequest::signing_bytes() const {
  ByteWriter w;
  w.field(kInferTag).field(user_vk.to_bytes());
  w.u32(static_cast<std::uint32_t>(predicates.size()));
  for (const auto& p : predicates) w.field(inference::to_string(p.kind)).field(p.key).field(p.parameter);
  w.field(format_rfc3339(requested_at));
  return std::move(w).bytes();
}

InferRequest InferRequest::make(const crypto::KeyPair& user, std::vector<inference::Predicate> predicates,
                                Timestamp at) {
  InferRequest r{user.verification_key, std::move(predicates), at, {}};
  r.request_signature = crypto::sign_bytes(user.signing_key, r.signing_bytes());
  return r;
}

// Registry

Registry::Registry(std::filesystem::path journal_path) : journal_path_(std::move(journal_path)) {
  if (!journal_path_.empty()) load();
}

void Registry::load() {
  std::ifstream in(journal_path_);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = wire::parse_strict(line);
      const auto op = j.at("op").get<std::string>();
      if (op == "put") {
        auto rec = record_from_json(j.at("record"));
        auto key = rec.user_vk.to_bytes();
        accounts_[std::move(key)] = std::move(rec);
      } else if (op == "status") {
        const auto vk = wire::verification_key_from_json(j.at("user_vk"));
        auto it = accounts_.find(vk.to_bytes());
        if (it != accounts_.end()) it->second.status = account_status_from_string(j.at("status").get<std::string>());
      }
    } catch (const std::exception& e) {
      // A torn final line is the expected result of a crash mid-append.
      if (in.peek() == EOF) break;
      throw Error(Errc::io_error, "journal line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void Registry::append(const std::string& line) {
  if (journal_path_.empty()) return;
  std::ofstream out(journal_path_, std::ios::app);
  out << line << '\n';
  out.flush();
  if (!out) throw Error(Errc::io_error, "cannot append to " + journal_path_.string());
}

void Registry::put(AccountRecord record, bool replace) {
  std::unique_lock lock(mutex_);
  auto key = record.user_vk.to_bytes();
  auto it = accounts_.find(key);
  if (!replace && it != accounts_.end()) {
    throw Error(Errc::duplicate_registration, record.user_vk.fingerprint());
  }
  if (replace) {
    if (it == accounts_.end()) throw Error(Errc::account_unknown, record.user_vk.fingerprint());
    if (it->second.status == AccountStatus::revoked) {
      throw Error(Errc::account_revoked, record.user_vk.fingerprint());
    }
    record.registered_at = it->second.registered_at;
  }
  append(wire::Json{{"op", "put"}, {"record", record_json(record)}}.dump());
  accounts_[std::move(key)] = std::move(record);
}

AccountStatus Registry::set_status(const crypto::VerificationKey& user_vk, AccountStatus status) {
  std::unique_lock lock(mutex_);
  auto it = accounts_.find(user_vk.to_bytes());
  if (it == accounts_.end()) throw Error(Errc::account_unknown, user_vk.fingerprint());
  append(wire::Json{{"op", "status"}, {"status", std::string(to_string(status))}, {"user_vk", wire::to_json(user_vk)}}
             .dump());
  it->second.status = status;
  return status;
}

std::optional<AccountRecord> Registry::get(const crypto::VerificationKey& user_vk) const {
  std::shared_lock lock(mutex_);
  auto it = accounts_.find(user_vk.to_bytes());
  if (it == accounts_.end()) return std::nullopt;
  return it->second;
}

std::optional<AccountStatus> Registry::status(const crypto::VerificationKey& user_vk) const {
  std::shared_lock lock(mutex_);
  auto it = accounts_.find(user_vk.to_bytes());
  if (it == accounts_.end()) return std::nullopt;
  return it->second.status;
}

std::size_t Registry::size() const {
  std::shared_lock lock(mutex_);
  return accounts_.size();
}

// IdentityProvider

IdentityProvider::IdentityProvider(crypto::KeyPair keys, IdpOptions options)
    : keys_(std::move(keys)), options_(std::move(options)), registry_(options_.journal_path) {
  if (!options_.validator) options_.validator = std::make_shared<AcceptAllValidator>();
  if (!options_.clock) options_.clock = system_clock();
}

Credential IdentityProvider::register_user(const RawAttributes& raw, const crypto::VerificationKey& user_vk,
                                           Seconds validity, bool replace) {
  if (validity <= Seconds{0}) throw Error(Errc::invalid_credential, "validity must be positive");
  if (!crypto::is_supported_modulus_bits(user_vk.bits())) {
    throw Error(Errc::unsupported_key_size, "user key of " + std::to_string(user_vk.bits()) + " bits");
  }
  auto attributes = canonical_attributes(raw);
  options_.validator->check(attributes, user_vk);

  // Fail fast before signing; the authoritative uniqueness check happens
  // atomically in Registry::put.
  if (const auto st = registry_.status(user_vk); st && !replace) {
    throw Error(Errc::duplicate_registration, user_vk.fingerprint());
  }

  const Timestamp now = options_.clock();
  CredentialFields fields;
  fields.user_vk = user_vk;
  fields.t_isu = now;
  fields.t_exp = now + validity;
  for (const auto& a : attributes) {
    fields.signatures.push_back(crypto::sign_attribute(keys_.signing_key, a, user_vk, fields.t_exp));
  }
  fields.attributes = attributes;

  registry_.put(AccountRecord{user_vk, std::move(attributes), AccountStatus::active, now, fields.t_exp}, replace);
  return Credential(std::move(fields), keys_.verification_key);
}

void IdentityProvider::check_fresh(Timestamp requested_at) const {
  const auto now = options_.clock();
  const auto skew = options_.request_skew;
  if (requested_at > now + skew || requested_at + skew < now) {
    throw Error(Errc::stale_request, format_rfc3339(requested_at));
  }
}

void IdentityProvider::take_rate_token(const crypto::VerificationKey& user_vk) {
  if (!options_.nonce_rate_limit) return;
  const auto& limit = *options_.nonce_rate_limit;
  const auto now = options_.clock();
  std::lock_guard lock(buckets_mutex_);
  auto [it, inserted] = buckets_.try_emplace(user_vk.to_bytes(), Bucket{limit.burst, now});
  auto& b = it->second;
  const double elapsed = std::chrono::duration<double>(now - b.refilled).count();
  b.tokens = std::min(limit.burst, b.tokens + std::max(0.0, elapsed) * limit.tokens_per_second);
  b.refilled = now;
  if (b.tokens < 1.0) throw Error(Errc::rate_limited, user_vk.fingerprint());
  b.tokens -= 1.0;
}

crypto::SignedMessage IdentityProvider::sign_nonce(const NonceSignRequest& request) {
  if (!crypto::verify_bytes(request.user_vk, request.signing_bytes(), request.request_signature)) {
    throw Error(Errc::bad_request_signature, "nonce-sign request");
  }
  check_fresh(request.requested_at);
  const auto status = registry_.status(request.user_vk);
  if (!status) throw Error(Errc::account_unknown, request.user_vk.fingerprint());
  if (*status == AccountStatus::revoked) throw Error(Errc::account_revoked, request.user_vk.fingerprint());
  take_rate_token(request.user_vk);
  return crypto::sign_message(keys_.signing_key, nonce_payload(request.user_vk, request.nonce));
}

AccountStatus IdentityProvider::revoke(const crypto::VerificationKey& user_vk) {
  return registry_.set_status(user_vk, AccountStatus::revoked);
}

AccountStatus IdentityProvider::reinstate(const crypto::VerificationKey& user_vk) {
  return registry_.set_status(user_vk, AccountStatus::active);
}

std::vector<CertifiedStatement> IdentityProvider::certify_derived(
    const crypto::VerificationKey& user_vk, const std::vector<inference::Predicate>& predicates) {
  const auto record = registry_.get(user_vk);
  if (!record) throw Error(Errc::account_unknown, user_vk.fingerprint());
  if (record->status == AccountStatus::revoked) throw Error(Errc::account_revoked, user_vk.fingerprint());

  const auto now = options_.clock();
  std::vector<CertifiedStatement> out;
  std::set<std::string> keys;
  for (const auto& p : predicates) {
    auto statement = inference::evaluate(p, record->attributes, now);
    if (!keys.insert(statement.attribute.key).second) continue;
    auto sig = crypto::sign_attribute(keys_.signing_key, statement.attribute, user_vk, record->t_exp);
    out.push_back(CertifiedStatement{std::move(statement), std::move(sig), record->t_exp});
  }
  return out;
}

Credential IdentityProvider::register_authenticated(const RegisterRequest& request) {
  if (!crypto::verify_bytes(request.user_vk, request.signing_bytes(), request.request_signature)) {
    throw Error(Errc::bad_request_signature, "register request");
  }
  check_fresh(request.requested_at);
  return register_user(request.attributes, request.user_vk, request.validity, request.replace);
}

std::vector<CertifiedStatement> IdentityProvider::infer_authenticated(const InferRequest& request) {
  if (!crypto::verify_bytes(request.user_vk, request.signing_bytes(), request.request_signature)) {
    throw Error(Errc::bad_request_signature, "infer request");
  }
  check_fresh(request.requested_at);
  return certify_derived(request.user_vk, request.predicates);
}

}  // namespace prima::idp
