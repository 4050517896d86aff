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

#include <gmpxx.h>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "prima/agent.hpp"
#include "prima/attribute.hpp"
#include "prima/crypto.hpp"
#include "prima/idp.hpp"
#include "prima/services.hpp"
#include "prima/sp.hpp"
#include "prima/time.hpp"
#include "prima/transport.hpp"

namespace prima::test {

/// Key pairs are expensive; tests share one per (bits, slot).
const crypto::KeyPair& key(unsigned bits, int slot = 0);

/// Deterministic generator for property tests.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  std::uint64_t next();
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }
  bool coin() { return (next() & 1) != 0; }
  std::string text(std::size_t min_len, std::size_t max_len, std::string_view alphabet);

 private:
  std::uint64_t state_;
};

inline constexpr std::string_view kKeyAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789_";

/// Independent re-implementation of the signing math, used as the oracle.
namespace oracle {
mpz_class fdh(const mpz_class& modulus, const std::string& message);
std::string encode(const Attribute& a, const crypto::VerificationKey& user_vk, Timestamp t_exp);
bool verify(const crypto::VerificationKey& issuer, const Attribute& a, const crypto::VerificationKey& user_vk,
            Timestamp t_exp, const crypto::Signature& s);

struct Date {
  int y, m, d;
};
/// Walks the calendar one day at a time from `birth` to `on`, counting
/// birthdays; Feb-29 birthdays are celebrated on Mar-1 in common years.
int age_by_days(Date birth, Date on);
}  // namespace oracle

Timestamp at(const char* rfc3339);

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::filesystem::path path;
};

/// IdP + SP + one agent on a loopback network (or HTTP), sharing a clock.
struct Stack {
  explicit Stack(std::vector<inference::Predicate> required, bool http = false, unsigned bits = 2048);
  ~Stack();

  Timestamp now() const { return base + Seconds{offset}; }
  Clock clock() const {
    return [this] { return now(); };
  }
  agent::Agent& user() { return *agent; }
  void enroll(const idp::RawAttributes& attrs, Seconds validity = Seconds{365 * 86400});

  Timestamp base = at("2026-03-01T12:00:00Z");
  std::int64_t offset = 0;
  std::shared_ptr<wire::CaptureLog> capture = std::make_shared<wire::CaptureLog>();
  std::unique_ptr<wire::Transport> transport;
  wire::LoopbackNetwork* loop = nullptr;
  std::vector<std::unique_ptr<wire::HttpServer>> servers;
  std::shared_ptr<idp::IdentityProvider> idp;
  std::shared_ptr<sp::ServiceProvider> sp;
  std::string idp_url, sp_url;
  std::unique_ptr<agent::Wallet> wallet;
  std::unique_ptr<agent::Agent> agent;
};

/// Consent to exactly the given display names ("country", "age_over:16").
agent::Consent consent_for(const std::vector<std::string>& items);

}  // namespace prima::test
