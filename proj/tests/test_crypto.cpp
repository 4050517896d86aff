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

#include <doctest.h>

#include <set>

#include "prima/credential.hpp"
#include "prima/crypto.hpp"
#include "prima/error.hpp"
#include "support.hpp"

using namespace prima;
using namespace prima::crypto;

namespace {

const Timestamp kExp = test::at("2027-01-01T00:00:00Z");

std::string str(const Bytes& b) { return std::string(b.begin(), b.end()); }

std::vector<Attribute> random_attributes(test::Rng& rng, std::size_t count) {
  std::set<std::string> keys;
  std::vector<Attribute> out;
  while (out.size() < count) {
    auto k = rng.text(1, 12, test::kKeyAlphabet);
    if (!keys.insert(k).second) continue;
    out.push_back({k, rng.text(0, 24, "abcdefghijklmnopqrstuvwxyz0123456789 -=")});
  }
  return out;
}

}  // namespace

TEST_CASE("keygen produces consistent keys of the requested width") {
  for (unsigned bits : {1024u, 2048u}) {
    const auto& kp = test::key(bits, 0);
    CHECK(kp.modulus_bits == bits);
    CHECK(kp.verification_key.bits() == bits);
    CHECK(kp.consistent());
    CHECK(kp.verification_key.exponent() == kPublicExponent);
    CHECK(kp.signing_key.prime_p() * kp.signing_key.prime_q() == kp.verification_key.modulus());
  }
  CHECK(test::key(2048, 0).verification_key != test::key(2048, 1).verification_key);
}

TEST_CASE("keygen rejects unsupported sizes") {
  for (unsigned bits : {0u, 512u, 1000u, 2047u, 8192u}) {
    try {
      (void)keygen(bits);
      FAIL("keygen accepted " << bits);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::unsupported_key_size);
    }
  }
}

TEST_CASE("verification key bytes round-trip and fingerprint is stable") {
  const auto& vk = test::key(2048, 0).verification_key;
  CHECK(VerificationKey::from_bytes(vk.to_bytes()) == vk);
  CHECK(vk.fingerprint().size() == 16);
  CHECK(vk.fingerprint() == hex_encode(sha256(vk.to_bytes())).substr(0, 16));
  CHECK(vk.fingerprint() != test::key(2048, 1).verification_key.fingerprint());
}

TEST_CASE("big-endian conversion is minimal") {
  CHECK(to_bytes_be(mpz_class(0)) == Bytes{0});
  CHECK(to_bytes_be(mpz_class(65537)) == Bytes{1, 0, 1});
  CHECK(from_bytes_be(Bytes{0, 0, 1, 0, 1}) == 65537);
}

TEST_CASE("hash and encoding agree with the independent oracle") {
  test::Rng rng(11);
  const auto& issuer = test::key(2048, 0).verification_key;
  const auto& user = test::key(2048, 1).verification_key;
  for (int i = 0; i < 50; ++i) {
    const auto msg = rng.text(0, 300, "abcxyz=:\n\x01");
    CHECK(full_domain_hash(issuer.modulus(), to_bytes(msg)) == test::oracle::fdh(issuer.modulus(), msg));
    const Attribute a{rng.text(1, 10, test::kKeyAlphabet), rng.text(0, 20, "abc =")};
    CHECK(str(encode_attribute(a, user, kExp)) == test::oracle::encode(a, user, kExp));
  }
  const auto& small = test::key(1024, 0).verification_key;
  CHECK(full_domain_hash(small.modulus(), to_bytes("x")) == test::oracle::fdh(small.modulus(), "x"));
}

TEST_CASE("signatures verify under the oracle and only for the signed binding") {
  const auto& kp = test::key(2048, 0);
  const auto& user = test::key(2048, 1).verification_key;
  const auto& other_user = test::key(2048, 2).verification_key;
  const Attribute a{"country", "DE"};
  const auto sig = sign_attribute(kp.signing_key, a, user, kExp);

  CHECK(verify_attribute(kp.verification_key, a, user, kExp, sig));
  CHECK(test::oracle::verify(kp.verification_key, a, user, kExp, sig));

  CHECK_FALSE(verify_attribute(kp.verification_key, {"country", "FR"}, user, kExp, sig));
  CHECK_FALSE(verify_attribute(kp.verification_key, {"countr", "yDE"}, user, kExp, sig));
  CHECK_FALSE(verify_attribute(kp.verification_key, a, other_user, kExp, sig));
  CHECK_FALSE(verify_attribute(kp.verification_key, a, user, kExp + Seconds{1}, sig));
  CHECK_FALSE(verify_attribute(test::key(2048, 1).verification_key, a, user, kExp, sig));
  CHECK_FALSE(test::oracle::verify(kp.verification_key, {"country", "FR"}, user, kExp, sig));
}

TEST_CASE("sign_bytes handles empty, truncated and out-of-range inputs") {
  const auto& kp = test::key(1024, 0);
  const auto empty = sign_message(kp.signing_key, {});
  CHECK(verify_message(kp.verification_key, empty));

  auto msg = sign_message(kp.signing_key, to_bytes("payload-bytes"));
  CHECK(verify_message(kp.verification_key, msg));
  msg.payload.pop_back();
  CHECK_FALSE(verify_message(kp.verification_key, msg));

  const auto& n = kp.verification_key.modulus();
  CHECK_FALSE(verify_bytes(kp.verification_key, {}, Signature{0}));
  CHECK_FALSE(verify_bytes(kp.verification_key, {}, Signature{n}));
  CHECK_FALSE(verify_bytes(kp.verification_key, {}, Signature{empty.signature.value + n}));
  CHECK_FALSE(verify_bytes(VerificationKey{}, {}, empty.signature));
}

TEST_CASE("pack of nothing is the identity with count zero") {
  const auto& kp = test::key(1024, 0);
  const auto p = pack({}, kp.verification_key.modulus());
  CHECK(p.value == 1);
  CHECK(p.count == 0);
  CHECK(batch_verify_encoded(kp.verification_key, {}, p));
}

TEST_CASE("pack is order independent and multiplicative") {
  const auto& kp = test::key(1024, 0);
  const auto& n = kp.verification_key.modulus();
  std::vector<Signature> sigs;
  for (int i = 0; i < 6; ++i) sigs.push_back(sign_bytes(kp.signing_key, to_bytes("m" + std::to_string(i))));
  CHECK(pack(std::span(sigs).first(1), n).value == sigs[0].value);

  auto reversed = sigs;
  std::reverse(reversed.begin(), reversed.end());
  CHECK(pack(sigs, n) == pack(reversed, n));

  const auto left = pack(std::span(sigs).first(2), n);
  const auto right = pack(std::span(sigs).subspan(2), n);
  mpz_class product = left.value * right.value % n;
  CHECK(product == pack(sigs, n).value);

  CHECK_THROWS_AS(pack(std::vector<Signature>{Signature{0}}, n), Error);
  CHECK_THROWS_AS(pack_with({}, Signature{n}, n), Error);
}

TEST_CASE("batch verification matches per-message oracle verification") {
  test::Rng rng(23);
  const auto& kp = test::key(2048, 0);
  const auto& user = test::key(2048, 1).verification_key;
  for (std::size_t k : {1u, 5u, 20u, 50u}) {
    const auto attrs = random_attributes(rng, k);
    std::vector<BoundAttribute> bound;
    std::vector<Signature> sigs;
    for (const auto& a : attrs) {
      bound.push_back({a, user, kExp});
      sigs.push_back(sign_attribute(kp.signing_key, a, user, kExp));
      CHECK(test::oracle::verify(kp.verification_key, a, user, kExp, sigs.back()));
    }
    const auto packed = pack(sigs, kp.verification_key.modulus());
    ExponentiationProbe probe;
    CHECK(batch_verify(kp.verification_key, bound, packed));
    CHECK(probe.count_for(kp.verification_key) == 1);

    auto short_count = packed;
    short_count.count -= 1;
    CHECK_FALSE(batch_verify(kp.verification_key, bound, short_count));
  }
}

TEST_CASE("batch verification rejects any single tampered message") {
  test::Rng rng(29);
  const auto& kp = test::key(1024, 0);
  const auto& user = test::key(1024, 1).verification_key;
  const auto attrs = random_attributes(rng, 12);
  std::vector<BoundAttribute> bound;
  std::vector<Signature> sigs;
  for (const auto& a : attrs) {
    bound.push_back({a, user, kExp});
    sigs.push_back(sign_attribute(kp.signing_key, a, user, kExp));
  }
  const auto packed = pack(sigs, kp.verification_key.modulus());
  for (int trial = 0; trial < 100; ++trial) {
    auto tampered = bound;
    auto& victim = tampered[rng.below(tampered.size())];
    switch (rng.below(3)) {
      case 0: victim.attribute.value += static_cast<char>('a' + rng.below(26)); break;
      case 1: victim.t_exp += Seconds{1 + static_cast<long>(rng.below(1000))}; break;
      default: victim.user_vk = test::key(1024, 2).verification_key; break;
    }
    CHECK_FALSE(batch_verify(kp.verification_key, tampered, packed));
  }
  auto wrong = packed;
  wrong.value = wrong.value * 2 % kp.verification_key.modulus();
  CHECK_FALSE(batch_verify(kp.verification_key, bound, wrong));
}

TEST_CASE("batch verification refuses duplicated messages") {
  const auto& kp = test::key(1024, 0);
  const auto& user = test::key(1024, 1).verification_key;
  const Attribute a{"country", "DE"};
  const auto s = sign_attribute(kp.signing_key, a, user, kExp);
  const std::vector<BoundAttribute> twice{{a, user, kExp}, {a, user, kExp}};
  const std::vector<Signature> sigs{s, s};
  CHECK_THROWS_WITH_AS(batch_verify(kp.verification_key, twice, pack(sigs, kp.verification_key.modulus())),
                       doctest::Contains("repeated"), Error);
}

TEST_CASE("exponentiation probes nest and count per key") {
  const auto& a = test::key(1024, 0);
  const auto& b = test::key(1024, 1);
  const auto msg = sign_message(a.signing_key, to_bytes("x"));
  const auto msg_b = sign_message(b.signing_key, to_bytes("x"));
  ExponentiationProbe outer;
  (void)verify_message(a.verification_key, msg);
  {
    ExponentiationProbe inner;
    CHECK(verify_message(b.verification_key, msg_b));
    CHECK(inner.total() == 1);
    CHECK(inner.count_for(b.verification_key) == 1);
  }
  (void)verify_message(a.verification_key, msg);
  CHECK(outer.total() == 2);
  CHECK(outer.count_for(a.verification_key) == 2);
  CHECK(outer.count_for(b.verification_key) == 0);
}

TEST_CASE("attribute encoding is injective over short canonical inputs") {
  const auto& user = test::key(1024, 1).verification_key;
  auto words = [](const std::string& alphabet, std::size_t max_len) {
    std::vector<std::string> out{""};
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i].size() == max_len) continue;
      for (char c : alphabet) out.push_back(out[i] + c);
    }
    return out;
  };
  const auto keys = words("a:", 3);
  const auto values = words("a=:", 3);
  std::set<Bytes> seen;
  std::size_t total = 0;
  for (const auto& k : keys) {
    if (k.empty()) continue;
    for (const auto& v : values) {
      ++total;
      seen.insert(encode_attribute({k, v}, user, kExp));
    }
  }
  CHECK(total > 500);
  CHECK(seen.size() == total);
  CHECK(encode_attribute({"a", "b"}, user, kExp) != encode_attribute({"a", "b"}, user, kExp + Seconds{1}));
  CHECK(encode_attribute({"a", "b"}, user, kExp) !=
        encode_attribute({"a", "b"}, test::key(1024, 2).verification_key, kExp));
}
