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

// Network faces of the IdP and SP: endpoint paths and the routers that map
// them onto the in-process objects.

#include <memory>
#include <string_view>

#include "prima/idp.hpp"
#include "prima/sp.hpp"
#include "prima/transport.hpp"

namespace prima::services {

namespace paths {
inline constexpr std::string_view kRegister = "/register";
inline constexpr std::string_view kSignNonce = "/sign-nonce";
inline constexpr std::string_view kInfer = "/infer";
inline constexpr std::string_view kRevoke = "/revoke";
inline constexpr std::string_view kReinstate = "/reinstate";
inline constexpr std::string_view kIdpKey = "/idp-key";
inline constexpr std::string_view kRequestAccess = "/request-access";
inline constexpr std::string_view kPresent = "/present";
inline constexpr std::string_view kPolicy = "/policy";
}  // namespace paths

std::shared_ptr<wire::Router> make_idp_service(std::shared_ptr<idp::IdentityProvider> idp);
std::shared_ptr<wire::Router> make_sp_service(std::shared_ptr<sp::ServiceProvider> sp);

}  // namespace prima::services
