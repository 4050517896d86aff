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

#include "prima/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "prima/agent.hpp"
#include "prima/error.hpp"
#include "prima/idp.hpp"
#include "prima/messages.hpp"
#include "prima/services.hpp"
#include "prima/sp.hpp"
#include "prima/transport.hpp"
#include "wire/object_reader.hpp"

namespace prima::scenarios {
namespace {

using wire::Json;
using wire::detail::ObjectReader;
namespace paths = services::paths;

constexpr std::size_t kMinSentinelBytes = 16;

[[noreturn]] void script_error(const std::string& detail) { throw Error(Errc::script_error, detail); }

std::vector<std::string> string_list(const Json& j, const std::string& what) {
  if (!j.is_array()) script_error(what + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) script_error(what + " must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

ActorSpec actor_from_json(const Json& j) {
  ObjectReader r(j, "actor");
  ActorSpec a;
  a.role = r.str("role");
  a.name = r.str("name");
  if (r.has("key_bits")) a.key_bits = static_cast<unsigned>(r.integer("key_bits"));
  if (a.role == "sp") {
    a.service_name = r.str("service_name");
    for (const auto& p : string_list(r.at("requires"), "requires")) a.required.push_back(inference::parse_predicate(p));
    a.trusts = r.str("trusts");
  } else if (a.role != "idp" && a.role != "agent") {
    script_error("unknown actor role '" + a.role + "'");
  }
  r.finish();
  return a;
}

Json actor_to_json(const ActorSpec& a) {
  Json j{{"role", a.role}, {"name", a.name}, {"key_bits", a.key_bits}};
  if (a.role == "sp") {
    Json req = Json::array();
    for (const auto& p : a.required) req.push_back(p.display_name());
    j["service_name"] = a.service_name;
    j["requires"] = req;
    j["trusts"] = a.trusts;
  }
  return j;
}

Step step_from_json(const Json& j) {
  ObjectReader r(j, "step");
  Step s;
  s.action = r.str("action");
  auto opt_str = [&](const char* key, std::string& out) {
    if (r.has(key)) out = r.str(key);
  };
  opt_str("agent", s.agent);
  opt_str("idp", s.idp);
  opt_str("sp", s.sp);
  opt_str("thief", s.thief);
  opt_str("victim", s.victim);
  opt_str("capture", s.capture);
  opt_str("mode", s.mode);
  opt_str("expect", s.expect);
  if (r.has("attributes")) {
    const auto& attrs = r.at("attributes");
    if (!attrs.is_object()) script_error("attributes must be an object");
    for (const auto& [k, v] : attrs.items()) {
      if (!v.is_string()) script_error("attribute values must be strings");
      s.attributes.emplace_back(k, v.get<std::string>());
    }
  }
  if (r.has("days")) s.days = r.integer("days");
  if (r.has("seconds")) s.seconds = r.integer("seconds");
  if (r.has("timestamp_offset")) s.timestamp_offset = r.integer("timestamp_offset");
  if (r.has("consent")) s.consent = string_list(r.at("consent"), "consent");
  if (r.has("fresh")) s.fresh = r.boolean("fresh");
  if (r.has("replace")) s.replace = r.boolean("replace");
  if (r.has("tamper")) {
    ObjectReader t(r.at("tamper"), "tamper");
    s.tamper = Attribute{t.str("key"), t.str("value")};
    t.finish();
  }
  if (r.has("threads")) s.threads = static_cast<int>(r.integer("threads"));
  if (r.has("rounds")) s.rounds = static_cast<int>(r.integer("rounds"));
  r.finish();
  return s;
}

Json step_to_json(const Step& s) {
  Json j{{"action", s.action}};
  auto put = [&](const char* key, const std::string& v) {
    if (!v.empty()) j[key] = v;
  };
  put("agent", s.agent);
  put("idp", s.idp);
  put("sp", s.sp);
  put("thief", s.thief);
  put("victim", s.victim);
  put("capture", s.capture);
  put("mode", s.mode);
  put("expect", s.expect);
  if (!s.attributes.empty()) {
    Json attrs = Json::object();
    for (const auto& [k, v] : s.attributes) attrs[k] = v;
    j["attributes"] = attrs;
  }
  if (s.days != 0) j["days"] = s.days;
  if (s.seconds != 0) j["seconds"] = s.seconds;
  if (s.timestamp_offset != 0) j["timestamp_offset"] = s.timestamp_offset;
  if (!s.consent.empty()) j["consent"] = s.consent;
  if (s.fresh) j["fresh"] = true;
  if (s.replace) j["replace"] = true;
  if (s.tamper) j["tamper"] = Json{{"key", s.tamper->key}, {"value", s.tamper->value}};
  if (s.action == "concurrent-replay") {
    j["threads"] = s.threads;
    j["rounds"] = s.rounds;
  }
  return j;
}

Assertion assertion_from_json(const Json& j) {
  ObjectReader r(j, "assertion");
  Assertion a;
  a.kind = r.str("kind");
  if (a.kind == "absent" || a.kind == "present") {
    a.direction = r.str("direction");
    if (a.direction != "to-sp" && a.direction != "to-idp") script_error("direction must be to-sp or to-idp");
    a.value = r.str("value");
    if (a.value.empty()) script_error("empty assertion value");
  } else if (a.kind == "idp-auth-messages") {
    a.list = string_list(r.at("allowed"), "allowed");
    for (const auto& t : a.list) (void)wire::message_type_from_string(t);
  } else if (a.kind == "sp-requests") {
    a.sp = r.str("sp");
    a.list = string_list(r.at("paths"), "paths");
  } else if (a.kind == "sp-state-keys") {
    a.sp = r.str("sp");
    a.list = string_list(r.at("keys"), "keys");
  } else if (a.kind != "no-sp-identifiers-at-idp") {
    script_error("unknown assertion kind '" + a.kind + "'");
  }
  r.finish();
  return a;
}

Json assertion_to_json(const Assertion& a) {
  Json j{{"kind", a.kind}};
  if (a.kind == "absent" || a.kind == "present") {
    j["direction"] = a.direction;
    j["value"] = a.value;
  } else if (a.kind == "idp-auth-messages") {
    j["allowed"] = a.list;
  } else if (a.kind == "sp-requests") {
    j["sp"] = a.sp;
    j["paths"] = a.list;
  } else if (a.kind == "sp-state-keys") {
    j["sp"] = a.sp;
    j["keys"] = a.list;
  }
  return j;
}

void check_outcome_name(const std::string& outcome) {
  if (outcome == kTokenGranted || outcome == kOk) return;
  if (to_string(errc_from_string(outcome)) != outcome) script_error("unknown outcome '" + outcome + "'");
}

void check_references(const ScenarioScript& s) {
  std::map<std::string, std::string> roles;
  for (const auto& a : s.actors) {
    if (!roles.emplace(a.name, a.role).second) script_error("duplicate actor '" + a.name + "'");
  }
  auto need = [&](const std::string& name, const char* role, const std::string& where) {
    auto it = roles.find(name);
    if (name.empty()) script_error(where + " needs a " + role);
    if (it == roles.end()) script_error(where + " references undefined actor '" + name + "'");
    if (it->second != role) script_error(where + ": '" + name + "' is not a " + role);
  };
  for (const auto& a : s.actors) {
    if (a.role == "sp") need(a.trusts, "idp", "sp " + a.name);
  }
  std::set<std::string> captures;
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    const auto& st = s.steps[i];
    const auto where = "step " + std::to_string(i + 1) + " (" + st.action + ")";
    if (st.action == "enroll") {
      need(st.agent, "agent", where);
      need(st.idp, "idp", where);
      if (st.days <= 0) script_error(where + " needs positive days");
    } else if (st.action == "login" || st.action == "concurrent-replay") {
      need(st.agent, "agent", where);
      need(st.sp, "sp", where);
      if (!st.capture.empty()) captures.insert(st.capture);
      if (st.action == "concurrent-replay" && (st.threads < 2 || st.rounds < 1)) {
        script_error(where + " needs threads >= 2 and rounds >= 1");
      }
    } else if (st.action == "replay") {
      need(st.sp, "sp", where);
      if (!captures.count(st.capture)) script_error(where + " replays unknown capture '" + st.capture + "'");
    } else if (st.action == "stolen-credential") {
      need(st.thief, "agent", where);
      need(st.victim, "agent", where);
      need(st.sp, "sp", where);
      if (st.mode != "rekey" && st.mode != "wrong-signer") script_error(where + " mode must be rekey or wrong-signer");
    } else if (st.action == "revoke" || st.action == "reinstate") {
      need(st.idp, "idp", where);
      need(st.agent, "agent", where);
    } else if (st.action == "advance") {
      if (st.seconds == 0) script_error(where + " needs seconds");
    } else {
      script_error(where + ": unknown action");
    }
    if (!st.expect.empty()) check_outcome_name(st.expect);
  }
  for (const auto& a : s.wire_assertions) {
    if (!a.sp.empty()) need(a.sp, "sp", "assertion " + a.kind);
  }
}

// ---- runtime -------------------------------------------------------------

struct StepResult {
  std::string outcome;
  std::string detail;
};

class World {
 public:
  World(const ScenarioScript& script, const RunOptions& options) : options_(options) {
    capture_ = std::make_shared<wire::CaptureLog>();
    if (options.transport == TransportKind::http) {
      transport_ = std::make_unique<wire::HttpTransport>();
    } else {
      auto loop = std::make_unique<wire::LoopbackNetwork>();
      loop_ = loop.get();
      transport_ = std::move(loop);
    }
    transport_->set_capture(capture_);

    for (const auto& a : script.actors) {
      if (a.role == "idp") {
        idp::IdpOptions o;
        o.clock = clock();
        auto provider = std::make_shared<idp::IdentityProvider>(crypto::keygen(bits(a)), o);
        idps_[a.name] = provider;
        idp_endpoints_.insert(endpoints_[a.name] = serve(a.name, services::make_idp_service(provider)));
      }
    }
    for (const auto& a : script.actors) {
      if (a.role == "sp") {
        sp::ServicePolicy policy;
        policy.service_name = a.service_name;
        policy.required = a.required;
        policy.idp_vk = idps_.at(a.trusts)->verification_key();
        auto provider = std::make_shared<sp::ServiceProvider>(policy, clock());
        sps_[a.name] = provider;
        sp_endpoints_.insert(endpoints_[a.name] = serve(a.name, services::make_sp_service(provider)));
      } else if (a.role == "agent") {
        auto wallet = std::make_unique<agent::Wallet>(agent::Wallet::from_keypair(crypto::keygen(bits(a))));
        agents_[a.name] = std::make_unique<agent::Agent>(*wallet, *transport_, clock());
        wallets_[a.name] = std::move(wallet);
      }
    }
  }

  ~World() {
    for (auto& s : servers_) s->stop();
  }

  StepResult run(const Step& step) {
    try {
      return StepResult{dispatch(step), {}};
    } catch (const Error& e) {
      return StepResult{std::string(to_string(e.code())), e.detail()};
    }
  }

  std::optional<std::string> check(const Assertion& a) const;

  std::size_t captured() const { return capture_->size(); }

 private:
  unsigned bits(const ActorSpec& a) const { return options_.key_bits.value_or(a.key_bits); }

  Clock clock() {
    return [this] { return base_ + Seconds{offset_.load()}; };
  }

  std::string serve(const std::string& name, std::shared_ptr<wire::Router> router) {
    if (loop_ != nullptr) return loop_->bind(name, std::move(router));
    servers_.push_back(std::make_unique<wire::HttpServer>(std::move(router)));
    return servers_.back()->endpoint();
  }

  static agent::Consent consent_from(const std::vector<std::string>& items) {
    agent::Consent c;
    for (const auto& item : items) {
      auto p = inference::parse_predicate(item);
      if (p.kind == inference::PredicateKind::reveal) {
        c.disclose.insert(p.key);
      } else {
        c.proofs.push_back(std::move(p));
      }
    }
    return c;
  }

  static agent::ConsentPrompt approve_all() {
    return [](const sp::Challenge& challenge) {
      agent::Consent c;
      for (const auto& p : challenge.required) c.proofs.push_back(p);
      return c;
    };
  }

  sp::AccessToken submit(const std::string& sp_name, const wire::PresentRequest& request) {
    return wire::call<sp::AccessToken>(*transport_, endpoints_.at(sp_name), paths::kPresent, request);
  }

  void mark_auth_phase() {
    if (!auth_start_) auth_start_ = capture_->size();
  }

  std::string dispatch(const Step& step) {
    const auto& action = step.action;
    if (action == "enroll") {
      agents_.at(step.agent)->enroll(endpoints_.at(step.idp), step.attributes, Seconds{step.days * 86400},
                                     step.replace);
      return std::string(kOk);
    }
    if (action == "login") {
      mark_auth_phase();
      auto& agent = *agents_.at(step.agent);
      const auto consent = consent_from(step.consent);
      agent::LoginOptions opts{step.fresh, Seconds{step.timestamp_offset}};
      auto prepared =
          agent.prepare(endpoints_.at(step.sp), [&](const sp::Challenge&) { return consent; }, opts);
      if (step.tamper) {
        auto& p = prepared.request.presentation;
        auto it = std::find_if(p.disclosed.begin(), p.disclosed.end(),
                               [&](const Attribute& a) { return a.key == step.tamper->key; });
        if (it == p.disclosed.end()) script_error("tamper key '" + step.tamper->key + "' was not disclosed");
        it->value = step.tamper->value;
        const auto& keys = wallets_.at(step.agent)->keypair();
        p.user_signature = crypto::sign_bytes(keys.signing_key, presentation_body(p, prepared.request.sp_nonce));
      }
      if (!step.capture.empty()) captured_[step.capture] = prepared.request;
      submit(step.sp, prepared.request);
      return std::string(kTokenGranted);
    }
    if (action == "replay") {
      submit(step.sp, captured_.at(step.capture));
      return std::string(kTokenGranted);
    }
    if (action == "concurrent-replay") return concurrent_replay(step);
    if (action == "stolen-credential") {
      mark_auth_phase();
      return stolen_credential(step);
    }
    if (action == "revoke") {
      idps_.at(step.idp)->revoke(wallets_.at(step.agent)->user_vk());
      return std::string(kOk);
    }
    if (action == "reinstate") {
      idps_.at(step.idp)->reinstate(wallets_.at(step.agent)->user_vk());
      return std::string(kOk);
    }
    if (action == "advance") {
      offset_ += step.seconds;
      return std::string(kOk);
    }
    script_error("unknown action '" + action + "'");
  }

  std::string concurrent_replay(const Step& step) {
    mark_auth_phase();
    auto& agent = *agents_.at(step.agent);
    const auto consent = consent_from(step.consent);
    for (int round = 0; round < step.rounds; ++round) {
      auto prepared = agent.prepare(endpoints_.at(step.sp), [&](const sp::Challenge&) { return consent; });
      std::atomic<int> granted{0}, consumed{0}, other{0};
      std::atomic<bool> go{false};
      std::vector<std::thread> threads;
      for (int t = 0; t < step.threads; ++t) {
        threads.emplace_back([&] {
          while (!go.load()) std::this_thread::yield();
          try {
            submit(step.sp, prepared.request);
            ++granted;
          } catch (const Error& e) {
            ++(e.code() == Errc::session_consumed ? consumed : other);
          }
        });
      }
      go = true;
      for (auto& t : threads) t.join();
      if (granted != 1 || other != 0) {
        throw Error(Errc::internal, "round " + std::to_string(round + 1) + ": " + std::to_string(granted.load()) +
                                        " tokens, " + std::to_string(other.load()) + " unexpected errors");
      }
    }
    return std::string(kOk);
  }

  std::string stolen_credential(const Step& step) {
    auto& thief = *agents_.at(step.thief);
    const auto& thief_keys = wallets_.at(step.thief)->keypair();
    const auto& victim_wallet = *wallets_.at(step.victim);

    auto prepared = thief.prepare(endpoints_.at(step.sp), approve_all());
    const auto& challenge = prepared.challenge;
    const auto* stolen = victim_wallet.find_by_idp(challenge.idp_key_id);
    if (stolen == nullptr) script_error("victim holds no credential from the SP's IdP");
    std::set<std::string> keys;
    for (const auto& p : challenge.required) keys.insert(p.statement_key());
    auto disclosure = select_disclosure(stolen->credential, keys);

    auto& p = prepared.request.presentation;
    p.disclosed = std::move(disclosure.attributes);
    p.packed = std::move(disclosure.packed);
    p.t_exp = stolen->credential.t_exp();
    if (step.mode == "wrong-signer") p.user_vk = victim_wallet.user_vk();
    p.user_signature = crypto::sign_bytes(thief_keys.signing_key, presentation_body(p, prepared.request.sp_nonce));
    submit(step.sp, prepared.request);
    return std::string(kTokenGranted);
  }

  bool is_sp(const wire::CaptureRecord& r) const { return sp_endpoints_.count(r.endpoint) != 0; }
  bool is_idp(const wire::CaptureRecord& r) const { return idp_endpoints_.count(r.endpoint) != 0; }

  RunOptions options_;
  Timestamp base_ = std::chrono::floor<Seconds>(std::chrono::system_clock::now());
  std::atomic<std::int64_t> offset_{0};
  std::shared_ptr<wire::CaptureLog> capture_;
  std::unique_ptr<wire::Transport> transport_;
  wire::LoopbackNetwork* loop_ = nullptr;
  std::vector<std::unique_ptr<wire::HttpServer>> servers_;
  std::map<std::string, std::shared_ptr<idp::IdentityProvider>> idps_;
  std::map<std::string, std::shared_ptr<sp::ServiceProvider>> sps_;
  std::map<std::string, std::string> endpoints_;
  std::set<std::string> sp_endpoints_, idp_endpoints_;
  std::map<std::string, std::unique_ptr<agent::Wallet>> wallets_;
  std::map<std::string, std::unique_ptr<agent::Agent>> agents_;
  std::map<std::string, wire::PresentRequest> captured_;
  std::optional<std::size_t> auth_start_;
};

bool contains(const std::string& haystack, const std::string& needle) {
  return !needle.empty() && haystack.find(needle) != std::string::npos;
}

bool contains_any(const wire::CaptureRecord& r, const std::string& needle) {
  return contains(r.request, needle) || contains(r.response, needle);
}

std::optional<std::string> World::check(const Assertion& a) const {
  const auto records = capture_->snapshot();

  if (a.kind == "absent" || a.kind == "present") {
    const bool to_sp = a.direction == "to-sp";
    const auto encoded = base64url_encode(to_bytes(a.value));
    bool seen = false;
    for (const auto& r : records) {
      if (to_sp ? !is_sp(r) : !is_idp(r)) continue;
      if (contains_any(r, a.value) || (a.kind == "absent" && contains_any(r, encoded))) {
        seen = true;
        break;
      }
    }
    if (a.kind == "absent" && seen) return "'" + a.value + "' appears in " + a.direction + " traffic";
    if (a.kind == "present" && !seen) return "'" + a.value + "' never appears in " + a.direction + " traffic";
    return std::nullopt;
  }

  if (a.kind == "no-sp-identifiers-at-idp") {
    // Sentinels: everything an SP could be recognized by.
    std::vector<std::pair<std::string, std::string>> everywhere;
    std::vector<std::string> nonces;
    for (const auto& [name, provider] : sps_) {
      everywhere.emplace_back("service name", provider->policy().service_name);
      everywhere.emplace_back("endpoint", endpoints_.at(name));
    }
    for (const auto& r : records) {
      if (!is_sp(r) || r.path != paths::kRequestAccess || r.response.empty()) continue;
      const auto env = wire::decode(r.response);
      if (env.error) continue;
      const auto challenge = wire::open<sp::Challenge>(env);
      const Bytes sid(challenge.session_id.begin(), challenge.session_id.end());
      everywhere.emplace_back("session id", base64url_encode(sid));
      everywhere.emplace_back("session id", hex_encode(sid));
      nonces.push_back(base64url_encode(Bytes(challenge.nonce.begin(), challenge.nonce.end())));
    }
    for (const auto& [what, value] : everywhere) {
      if (value.size() < kMinSentinelBytes) return what + " sentinel '" + value + "' is shorter than 16 bytes";
    }
    for (const auto& r : records) {
      if (!is_idp(r)) continue;
      for (const auto& [what, value] : everywhere) {
        if (contains_any(r, value)) return what + " reached the IdP at " + r.path;
      }
      if (r.path == paths::kSignNonce) continue;
      for (const auto& n : nonces) {
        if (contains_any(r, n)) return "SP nonce reached the IdP outside the nonce-sign request at " + r.path;
      }
    }
    return std::nullopt;
  }

  if (a.kind == "idp-auth-messages") {
    const auto start = auth_start_.value_or(records.size());
    for (std::size_t i = start; i < records.size(); ++i) {
      const auto& r = records[i];
      if (!is_idp(r)) continue;
      if (r.request.empty()) return "body-less request to the IdP at " + r.path + " during authentication";
      const auto env = wire::decode(r.request);
      const auto type = std::string(wire::to_string(env.type));
      if (std::find(a.list.begin(), a.list.end(), type) == a.list.end()) {
        return "IdP received " + type + " during authentication";
      }
      if (env.type == wire::MessageType::nonce_sign_req) {
        std::set<std::string> fields;
        for (const auto& [k, v] : env.body.items()) fields.insert(k);
        const std::set<std::string> minimal = {"nonce", "request_signature", "requested_at", "user_vk"};
        if (fields != minimal) return "nonce-sign request carries fields beyond the minimal set";
      }
    }
    return std::nullopt;
  }

  if (a.kind == "sp-requests") {
    const auto& endpoint = endpoints_.at(a.sp);
    std::vector<std::string> seen;
    for (const auto& r : records) {
      if (r.endpoint == endpoint) seen.push_back(r.path);
    }
    if (seen != a.list) {
      std::string got;
      for (const auto& p : seen) got += (got.empty() ? "" : ",") + p;
      return "SP " + a.sp + " received [" + got + "]";
    }
    return std::nullopt;
  }

  if (a.kind == "sp-state-keys") {
    const auto state = Json::parse(sps_.at(a.sp)->export_state());
    std::set<std::string> keys;
    for (const auto& session : state.at("sessions")) {
      for (const auto& attr : session.at("disclosed")) keys.insert(attr.at("key").get<std::string>());
    }
    const std::set<std::string> expected(a.list.begin(), a.list.end());
    if (keys != expected) {
      std::string got;
      for (const auto& k : keys) got += (got.empty() ? "" : ",") + k;
      return "SP " + a.sp + " stores keys [" + got + "]";
    }
    return std::nullopt;
  }

  return "unknown assertion kind " + a.kind;
}

}  // namespace

ScenarioScript ScenarioScript::from_json(const Json& j) {
  try {
    ObjectReader r(j, "scenario");
    ScenarioScript s;
    s.name = r.str("name");
    if (r.has("description")) s.description = r.str("description");
    for (const auto& a : r.array("actors")) s.actors.push_back(actor_from_json(a));
    for (const auto& st : r.array("steps")) s.steps.push_back(step_from_json(st));
    s.expected = r.str("expected");
    if (r.has("wire_assertions")) {
      for (const auto& a : r.array("wire_assertions")) s.wire_assertions.push_back(assertion_from_json(a));
    }
    r.finish();
    if (s.steps.empty()) script_error("scenario has no steps");
    check_outcome_name(s.expected);
    check_references(s);
    return s;
  } catch (const Error& e) {
    if (e.code() == Errc::script_error) throw;
    throw Error(Errc::script_error, std::string(to_string(e.code())) + ": " + e.detail());
  }
}

Json ScenarioScript::to_json() const {
  Json actors_j = Json::array(), steps_j = Json::array(), asserts_j = Json::array();
  for (const auto& a : actors) actors_j.push_back(actor_to_json(a));
  for (const auto& s : steps) steps_j.push_back(step_to_json(s));
  for (const auto& a : wire_assertions) asserts_j.push_back(assertion_to_json(a));
  Json j{{"name", name}, {"actors", actors_j}, {"steps", steps_j}, {"expected", expected}};
  if (!description.empty()) j["description"] = description;
  if (!wire_assertions.empty()) j["wire_assertions"] = asserts_j;
  return j;
}

ScenarioScript load_script(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::io_error, "cannot open " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return ScenarioScript::from_json(wire::parse_strict(buf.str()));
  } catch (const Error& e) {
    if (e.code() == Errc::script_error) throw Error(Errc::script_error, file.filename().string() + ": " + e.detail());
    throw Error(Errc::script_error, file.filename().string() + ": " + e.detail());
  }
}

std::vector<ScenarioScript> load_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  if (ec) throw Error(Errc::io_error, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  std::vector<ScenarioScript> out;
  for (const auto& f : files) out.push_back(load_script(f));
  return out;
}

std::filesystem::path default_scenario_dir() {
  if (const char* env = std::getenv("PRIMA_SCENARIOS_DIR"); env != nullptr && *env != '\0') return env;
  if (std::filesystem::is_directory("scenarios")) return "scenarios";
#ifdef PRIMA_SOURCE_SCENARIOS_DIR
  return PRIMA_SOURCE_SCENARIOS_DIR;
#else
  return "scenarios";
#endif
}

std::string_view to_string(TransportKind kind) { return kind == TransportKind::http ? "http" : "loopback"; }

ScenarioReport run_scenario(const ScenarioScript& script, const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioReport report;
  report.name = script.name;
  report.expected = script.expected;

  World world(script, options);
  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    const auto& step = script.steps[i];
    const bool last = i + 1 == script.steps.size();
    const auto result = world.run(step);
    const auto& want = last ? script.expected : step.expect;
    const bool ok = want.empty() ? (result.outcome == kOk || result.outcome == kTokenGranted) : result.outcome == want;
    if (last) report.outcome = result.outcome;
    if (!ok) {
      report.outcome = result.outcome;
      report.failure = "step " + std::to_string(i + 1) + " (" + step.action + ") ended with " + result.outcome +
                       (result.detail.empty() ? "" : " [" + result.detail + "]") + ", expected " +
                       (want.empty() ? std::string("success") : want);
      break;
    }
  }
  if (report.failure.empty()) {
    for (const auto& a : script.wire_assertions) {
      if (auto violation = world.check(a)) {
        report.failure = "assertion " + a.kind + ": " + *violation;
        break;
      }
    }
  }
  report.passed = report.failure.empty();
  report.captured_messages = world.captured();
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace prima::scenarios
