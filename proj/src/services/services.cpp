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

#include "prima/services.hpp"

#include <string>

#include "prima/messages.hpp"

namespace prima::services {

using wire::Envelope;
using wire::MessageType;
using wire::Method;

std::shared_ptr<wire::Router> make_idp_service(std::shared_ptr<idp::IdentityProvider> idp) {
  auto router = std::make_shared<wire::Router>();

  router->add(Method::post, std::string(paths::kRegister), MessageType::register_resp, [idp](const Envelope& e) {
    auto req = wire::open<idp::RegisterRequest>(e);
    return wire::make_envelope(wire::RegisterResponse{idp->register_authenticated(req).fields()});
  });

  router->add(Method::post, std::string(paths::kSignNonce), MessageType::nonce_sign_resp, [idp](const Envelope& e) {
    auto req = wire::open<idp::NonceSignRequest>(e);
    return wire::make_envelope(wire::NonceSignResponse{idp->sign_nonce(req)});
  });

  router->add(Method::post, std::string(paths::kInfer), MessageType::infer_resp, [idp](const Envelope& e) {
    auto req = wire::open<idp::InferRequest>(e);
    return wire::make_envelope(wire::InferResponse{idp->infer_authenticated(req)});
  });

  // Administrative; deployments expose these on an operator-only listener.
  router->add(Method::post, std::string(paths::kRevoke), MessageType::revoke_resp, [idp](const Envelope& e) {
    auto req = wire::open<wire::RevokeRequest>(e);
    return wire::make_envelope(wire::RevokeResponse{idp->revoke(req.user_vk)});
  });

  router->add(Method::post, std::string(paths::kReinstate), MessageType::revoke_resp, [idp](const Envelope& e) {
    auto req = wire::open<wire::RevokeRequest>(e);
    return wire::make_envelope(wire::RevokeResponse{idp->reinstate(req.user_vk)});
  });

  router->add(Method::get, std::string(paths::kIdpKey), MessageType::idp_key_resp, [idp](const Envelope&) {
    return wire::make_envelope(wire::IdpKeyResponse{idp->verification_key()});
  });

  return router;
}

std::shared_ptr<wire::Router> make_sp_service(std::shared_ptr<sp::ServiceProvider> sp) {
  auto router = std::make_shared<wire::Router>();

  router->add(Method::post, std::string(paths::kRequestAccess), MessageType::challenge_resp,
              [sp](const Envelope& e) {
                auto req = wire::open<wire::ChallengeRequest>(e);
                return wire::make_envelope(sp->create_challenge(req.user_vk));
              });

  router->add(Method::post, std::string(paths::kPresent), MessageType::present_resp, [sp](const Envelope& e) {
    auto req = wire::open<wire::PresentRequest>(e);
    return wire::make_envelope(sp->verify_presentation(req.presentation, req.sp_nonce, sp->now()));
  });

  router->add(Method::get, std::string(paths::kPolicy), MessageType::policy_resp, [sp](const Envelope&) {
    const auto& policy = sp->policy();
    return wire::make_envelope(
        wire::PolicyResponse{policy.service_name, policy.required, policy.idp_vk.fingerprint()});
  });

  return router;
}

}  // namespace prima::services
