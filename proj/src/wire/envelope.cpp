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

#include <array>
#include <set>
#include <vector>

#include "object_reader.hpp"
#include "prima/messages.hpp"
#include "prima/wire.hpp"

namespace prima::wire {
namespace {

struct TypeName {
  MessageType type;
  std::string_view name;
};

constexpr std::array kTypeNames = {
    TypeName{MessageType::register_req, "register-req"},
    TypeName{MessageType::register_resp, "register-resp"},
    TypeName{MessageType::challenge_req, "challenge-req"},
    TypeName{MessageType::challenge_resp, "challenge-resp"},
    TypeName{MessageType::nonce_sign_req, "nonce-sign-req"},
    TypeName{MessageType::nonce_sign_resp, "nonce-sign-resp"},
    TypeName{MessageType::infer_req, "infer-req"},
    TypeName{MessageType::infer_resp, "infer-resp"},
    TypeName{MessageType::present_req, "present-req"},
    TypeName{MessageType::present_resp, "present-resp"},
    TypeName{MessageType::revoke_req, "revoke-req"},
    TypeName{MessageType::revoke_resp, "revoke-resp"},
    TypeName{MessageType::idp_key_resp, "idp-key-resp"},
    TypeName{MessageType::policy_resp, "policy-resp"},
};

template <class T>
void check(const Json& body) {
  (void)MessageTraits<T>::from_json(body);
}

}  // namespace

std::string_view to_string(MessageType type) {
  for (const auto& t : kTypeNames) {
    if (t.type == type) return t.name;
  }
  return "unknown";
}

MessageType message_type_from_string(std::string_view text) {
  for (const auto& t : kTypeNames) {
    if (t.name == text) return t.type;
  }
  throw Error(Errc::unknown_message_type, std::string(text));
}

Envelope Envelope::failure(MessageType type, const Error& e) { return failure(type, e.code(), e.detail()); }

Envelope Envelope::failure(MessageType type, Errc code, std::string detail) {
  Envelope out;
  out.type = type;
  out.error = WireError{code, std::move(detail)};
  return out;
}

void validate_body(MessageType type, const Json& body) {
  switch (type) {
    case MessageType::register_req:
      return check<idp::RegisterRequest>(body);
    case MessageType::register_resp:
      return check<RegisterResponse>(body);
    case MessageType::challenge_req:
      return check<ChallengeRequest>(body);
    case MessageType::challenge_resp:
      return check<sp::Challenge>(body);
    case MessageType::nonce_sign_req:
      return check<idp::NonceSignRequest>(body);
    case MessageType::nonce_sign_resp:
      return check<NonceSignResponse>(body);
    case MessageType::infer_req:
      return check<idp::InferRequest>(body);
    case MessageType::infer_resp:
      return check<InferResponse>(body);
    case MessageType::present_req:
      return check<PresentRequest>(body);
    case MessageType::present_resp:
      return check<sp::AccessToken>(body);
    case MessageType::revoke_req:
      return check<RevokeRequest>(body);
    case MessageType::revoke_resp:
      return check<RevokeResponse>(body);
    case MessageType::idp_key_resp:
      return check<IdpKeyResponse>(body);
    case MessageType::policy_resp:
      return check<PolicyResponse>(body);
  }
  throw Error(Errc::unknown_message_type, "unhandled type");
}

std::string encode(const Envelope& envelope) {
  if (envelope.version != kWireVersion) {
    throw Error(Errc::unsupported_version, "wire version " + std::to_string(envelope.version));
  }
  Json j = Json::object();
  j["version"] = envelope.version;
  j["message_type"] = std::string(to_string(envelope.type));
  if (envelope.error) {
    if (!envelope.body.is_null()) throw Error(Errc::schema_violation, "envelope carries both body and error");
    j["error"] = Json{{"code", std::string(to_string(envelope.error->code))}, {"detail", envelope.error->detail}};
  } else {
    validate_body(envelope.type, envelope.body);
    j["body"] = envelope.body;
  }
  // nlohmann::json objects are std::map-backed, so dump() emits keys sorted.
  return j.dump();
}

Json parse_strict(std::string_view text) {
  std::vector<std::set<std::string>> scopes;
  bool duplicate = false;
  std::string duplicate_name;
  auto callback = [&](int /*depth*/, Json::parse_event_t event, Json& parsed) {
    switch (event) {
      case Json::parse_event_t::object_start:
        scopes.emplace_back();
        break;
      case Json::parse_event_t::object_end:
        if (!scopes.empty()) scopes.pop_back();
        break;
      case Json::parse_event_t::key:
        if (!scopes.empty() && !scopes.back().insert(parsed.get<std::string>()).second) {
          duplicate = true;
          duplicate_name = parsed.get<std::string>();
        }
        break;
      default:
        break;
    }
    return true;
  };
  Json j;
  try {
    j = Json::parse(text.begin(), text.end(), callback);
  } catch (const Json::exception& e) {
    throw Error(Errc::malformed_message, e.what());
  }
  if (duplicate) throw Error(Errc::duplicate_key, duplicate_name);
  return j;
}

Envelope decode(std::string_view bytes) {
  if (bytes.size() > kMaxMessageBytes) {
    throw Error(Errc::oversize, std::to_string(bytes.size()) + " bytes");
  }
  const Json j = parse_strict(bytes);
  if (!j.is_object()) throw Error(Errc::malformed_message, "envelope must be an object");

  Envelope out;
  {
    auto it = j.find("version");
    if (it == j.end() || !it->is_number_integer()) throw Error(Errc::schema_violation, "envelope: version");
    out.version = it->get<int>();
    if (out.version != kWireVersion) {
      throw Error(Errc::unsupported_version, "wire version " + std::to_string(out.version));
    }
  }
  detail::ObjectReader r(j, "envelope");
  (void)r.at("version");
  out.type = message_type_from_string(r.str("message_type"));
  const bool has_body = r.has("body");
  const bool has_error = r.has("error");
  if (has_body == has_error) r.fail("exactly one of body/error required");
  if (has_body) {
    out.body = r.at("body");
    validate_body(out.type, out.body);
  } else {
    detail::ObjectReader er(r.at("error"), "error");
    WireError err;
    err.code = errc_from_string(er.str("code"));
    err.detail = er.str("detail");
    er.finish();
    out.error = std::move(err);
  }
  r.finish();
  return out;
}

}  // namespace prima::wire
