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

#include "support.hpp"

#include <openssl/sha.h>

#include <unistd.h>

#include <atomic>
#include <map>
#include <mutex>

#include "prima/inference.hpp"

namespace prima::test {

const crypto::KeyPair& key(unsigned bits, int slot) {
  static std::mutex mutex;
  static std::map<std::pair<unsigned, int>, std::unique_ptr<crypto::KeyPair>> cache;
  std::lock_guard lock(mutex);
  auto& entry = cache[{bits, slot}];
  if (!entry) entry = std::make_unique<crypto::KeyPair>(crypto::keygen(bits));
  return *entry;
}

std::uint64_t Rng::next() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::string Rng::text(std::size_t min_len, std::size_t max_len, std::string_view alphabet) {
  const auto len = min_len + below(max_len - min_len + 1);
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s += alphabet[below(alphabet.size())];
  return s;
}

namespace oracle {
namespace {

std::string be32(std::uint32_t v) {
  return {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8), static_cast<char>(v)};
}

std::string lp(const std::string& s) { return be32(static_cast<std::uint32_t>(s.size())) + s; }

std::string magnitude(const mpz_class& v) {
  std::string out((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8, '\0');
  std::size_t written = 0;
  mpz_export(out.data(), &written, 1, 1, 1, 0, v.get_mpz_t());
  out.resize(written);
  return out;
}

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int month_length(int y, int m) {
  static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && leap(y) ? 29 : days[m - 1];
}

}  // namespace

mpz_class fdh(const mpz_class& modulus, const std::string& message) {
  const std::size_t width = (mpz_sizeinbase(modulus.get_mpz_t(), 2) + 7) / 8;
  std::string stream;
  for (std::uint32_t ctr = 0; stream.size() < width; ++ctr) {
    const std::string block = "PRIMA-FDH-v1" + be32(ctr) + message;
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(block.data()), block.size(), digest);
    stream.append(reinterpret_cast<const char*>(digest), sizeof digest);
  }
  stream.resize(width);
  mpz_class h;
  mpz_import(h.get_mpz_t(), stream.size(), 1, 1, 1, 0, stream.data());
  return h % modulus;
}

std::string encode(const Attribute& a, const crypto::VerificationKey& user_vk, Timestamp t_exp) {
  const std::string vk = lp(magnitude(user_vk.modulus())) + lp(magnitude(user_vk.exponent()));
  return lp(a.key + "=" + a.value) + lp(vk) + lp(format_rfc3339(t_exp));
}

bool verify(const crypto::VerificationKey& issuer, const Attribute& a, const crypto::VerificationKey& user_vk,
            Timestamp t_exp, const crypto::Signature& s) {
  if (s.value <= 0 || s.value >= issuer.modulus()) return false;
  mpz_class lhs;
  mpz_powm(lhs.get_mpz_t(), s.value.get_mpz_t(), issuer.exponent().get_mpz_t(), issuer.modulus().get_mpz_t());
  return lhs == fdh(issuer.modulus(), encode(a, user_vk, t_exp));
}

int age_by_days(Date birth, Date on) {
  int age = 0;
  Date cur = birth;
  auto before = [](Date a, Date b) {
    return a.y != b.y ? a.y < b.y : a.m != b.m ? a.m < b.m : a.d < b.d;
  };
  while (before(cur, on)) {
    if (++cur.d > month_length(cur.y, cur.m)) {
      cur.d = 1;
      if (++cur.m > 12) {
        cur.m = 1;
        ++cur.y;
      }
    }
    if (cur.y == birth.y) continue;
    const bool anniversary = (cur.m == birth.m && cur.d == birth.d) ||
                             (birth.m == 2 && birth.d == 29 && !leap(cur.y) && cur.m == 3 && cur.d == 1);
    if (anniversary) ++age;
  }
  return age;
}

}  // namespace oracle

Timestamp at(const char* rfc3339) { return parse_rfc3339(rfc3339); }

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  path = std::filesystem::temp_directory_path() /
         ("prima-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path);
  std::filesystem::create_directories(path);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path, ec);
}

Stack::Stack(std::vector<inference::Predicate> required, bool http, unsigned bits) {
  if (http) {
    transport = std::make_unique<wire::HttpTransport>();
  } else {
    auto l = std::make_unique<wire::LoopbackNetwork>();
    loop = l.get();
    transport = std::move(l);
  }
  transport->set_capture(capture);

  idp::IdpOptions options;
  options.clock = clock();
  idp = std::make_shared<idp::IdentityProvider>(key(bits, 0), options);

  sp::ServicePolicy policy;
  policy.service_name = "test-service-sentinel-0001";
  policy.required = std::move(required);
  policy.idp_vk = idp->verification_key();
  sp = std::make_shared<sp::ServiceProvider>(policy, clock());

  auto serve = [&](const std::string& name, std::shared_ptr<wire::Router> router) {
    if (loop) return loop->bind(name, std::move(router));
    servers.push_back(std::make_unique<wire::HttpServer>(std::move(router)));
    return servers.back()->endpoint();
  };
  idp_url = serve("idp", services::make_idp_service(idp));
  sp_url = serve("sp-endpoint-sentinel-0001", services::make_sp_service(sp));

  wallet = std::make_unique<agent::Wallet>(agent::Wallet::from_keypair(key(bits, 1)));
  agent = std::make_unique<agent::Agent>(*wallet, *transport, clock());
}

Stack::~Stack() {
  for (auto& s : servers) s->stop();
}

void Stack::enroll(const idp::RawAttributes& attrs, Seconds validity) {
  agent->enroll(idp_url, attrs, validity);
}

agent::Consent consent_for(const std::vector<std::string>& items) {
  agent::Consent c;
  for (const auto& item : items) {
    auto p = inference::parse_predicate(item);
    if (p.kind == inference::PredicateKind::reveal) {
      c.disclose.insert(p.key);
    } else {
      c.proofs.push_back(p);
    }
  }
  return c;
}

}  // namespace prima::test
