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

// Server configuration files for `prima idp serve` and `prima sp serve`.
// JSON on disk; PRIMA_* environment variables override single fields.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prima/crypto.hpp"
#include "prima/idp.hpp"
#include "prima/inference.hpp"
#include "prima/sp.hpp"

namespace prima::config {

struct ListenAddress {
  std::string host = "127.0.0.1";
  int port = 0;
};

/// "host:port". Throws Error(schema_violation).
ListenAddress parse_listen(const std::string& text);

struct IdpConfig {
  std::filesystem::path key_file;      // PRIMA_IDP_KEY_FILE
  unsigned key_bits = crypto::kDefaultModulusBits;  // PRIMA_IDP_KEY_BITS
  std::filesystem::path journal;       // PRIMA_IDP_JOURNAL
  ListenAddress listen{"127.0.0.1", 8700};  // PRIMA_IDP_LISTEN
  std::optional<idp::RateLimit> nonce_rate_limit;
};

/// The policy file holds {"service_name", "requires": ["age_over:16", ...]}
/// and optionally clock_skew_s, challenge_ttl_s, token_ttl_s.
struct SpConfig {
  std::filesystem::path policy_file;            // PRIMA_SP_POLICY_FILE
  std::string service_name;
  std::vector<inference::Predicate> required;
  std::filesystem::path idp_public_key_file;    // PRIMA_SP_IDP_KEY_FILE
  ListenAddress listen{"127.0.0.1", 8800};      // PRIMA_SP_LISTEN
  Seconds clock_skew = sp::kDefaultClockSkew;
  Seconds challenge_ttl = sp::kDefaultChallengeTtl;
  Seconds token_ttl = sp::kDefaultTokenTtl;
};

/// Missing file means defaults; relative paths resolve against the file's
/// directory. Throws Error(schema_violation) on unknown or mistyped fields.
IdpConfig load_idp_config(const std::filesystem::path& file);
SpConfig load_sp_config(const std::filesystem::path& file);

/// Signing key as JSON {"e","p","q"} (base64url big-endian), mode 0600.
void save_keypair(const crypto::KeyPair& keys, const std::filesystem::path& file);
crypto::KeyPair load_keypair(const std::filesystem::path& file);
/// Loads `file` when it exists, else generates and saves a new key.
crypto::KeyPair load_or_create_keypair(const std::filesystem::path& file, unsigned bits);

/// Public key as JSON {"exponent","modulus"}.
void save_public_key(const crypto::VerificationKey& vk, const std::filesystem::path& file);
crypto::VerificationKey load_public_key(const std::filesystem::path& file);

}  // namespace prima::config
