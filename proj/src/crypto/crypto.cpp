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

#include "prima/crypto.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <iostream>
#include <memory>
#include <mutex>

#include "prima/error.hpp"

namespace prima::crypto {
namespace {

constexpr std::string_view kFdhTag = "PRIMA-FDH-v1";

thread_local ExponentiationProbe* active_probe = nullptr;

mpz_class public_exponentiation(const VerificationKey& key, const mpz_class& base) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), key.exponent().get_mpz_t(), key.modulus().get_mpz_t());
  if (active_probe != nullptr) active_probe->record(key.modulus());
  return out;
}

mpz_class random_odd(unsigned bits) {
  Bytes buf((bits + 7) / 8);
  random_bytes(buf);
  mpz_class v = from_bytes_be(buf);
  // Trim to exactly `bits`, then force the two top bits so p*q has full width.
  mpz_fdiv_r_2exp(v.get_mpz_t(), v.get_mpz_t(), bits);
  mpz_setbit(v.get_mpz_t(), bits - 1);
  mpz_setbit(v.get_mpz_t(), bits - 2);
  mpz_setbit(v.get_mpz_t(), 0);
  return v;
}

mpz_class generate_prime(unsigned bits, const mpz_class& e) {
  for (;;) {
    mpz_class p;
    mpz_nextprime(p.get_mpz_t(), random_odd(bits).get_mpz_t());
    if (mpz_sizeinbase(p.get_mpz_t(), 2) != bits) continue;
    if (mpz_probab_prime_p(p.get_mpz_t(), 40) == 0) continue;
    mpz_class g;
    mpz_class pm1 = p - 1;
    mpz_gcd(g.get_mpz_t(), pm1.get_mpz_t(), e.get_mpz_t());
    if (g == 1) return p;
  }
}

void warn_legacy_size_once() {
  static std::once_flag flag;
  std::call_once(flag, [] {
    std::clog << "warning: 1024-bit keys are deprecated and supported for benchmark parity only\n";
  });
}

bool in_group(const mpz_class& v, const mpz_class& n) { return v > 0 && v < n; }

}  // namespace

bool is_supported_modulus_bits(unsigned bits) {
  return bits == 1024 || bits == 2048 || bits == 3072 || bits == 4096;
}

Bytes to_bytes_be(const mpz_class& v) {
  if (v == 0) return Bytes{0};
  const std::size_t len = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
  Bytes out(len);
  std::size_t written = 0;
  mpz_export(out.data(), &written, 1, 1, 1, 0, v.get_mpz_t());
  out.resize(written);
  return out;
}

mpz_class from_bytes_be(ByteView b) {
  mpz_class v;
  if (!b.empty()) mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
  return v;
}

VerificationKey::VerificationKey(mpz_class modulus, mpz_class exponent)
    : modulus_(std::move(modulus)), exponent_(std::move(exponent)) {}

unsigned VerificationKey::bits() const {
  if (modulus_ == 0) return 0;
  return static_cast<unsigned>(mpz_sizeinbase(modulus_.get_mpz_t(), 2));
}

Bytes VerificationKey::to_bytes() const {
  ByteWriter w;
  w.field(to_bytes_be(modulus_)).field(to_bytes_be(exponent_));
  return std::move(w).bytes();
}

VerificationKey VerificationKey::from_bytes(ByteView b) {
  ByteReader r(b);
  auto n = from_bytes_be(r.field(1024));
  auto e = from_bytes_be(r.field(1024));
  r.expect_done();
  return VerificationKey(std::move(n), std::move(e));
}

std::string VerificationKey::fingerprint() const {
  const auto digest = sha256(to_bytes());
  return hex_encode(ByteView(digest.data(), 8));
}

SigningKey::SigningKey(mpz_class p, mpz_class q, mpz_class e)
    : p_(std::move(p)), q_(std::move(q)), e_(std::move(e)) {
  if (p_ < 3 || q_ < 3 || p_ == q_ || e_ < 3) {
    throw Error(Errc::unsupported_key_size, "malformed key material");
  }
  n_ = p_ * q_;
  mpz_class phi = (p_ - 1) * (q_ - 1);
  if (mpz_invert(d_.get_mpz_t(), e_.get_mpz_t(), phi.get_mpz_t()) == 0) {
    throw Error(Errc::unsupported_key_size, "public exponent not invertible");
  }
  dp_ = d_ % (p_ - 1);
  dq_ = d_ % (q_ - 1);
  mpz_invert(qinv_.get_mpz_t(), q_.get_mpz_t(), p_.get_mpz_t());
}

mpz_class SigningKey::apply_private(const mpz_class& x) const {
  mpz_class m1, m2, xp = x % p_, xq = x % q_;
  mpz_powm_sec(m1.get_mpz_t(), xp.get_mpz_t(), dp_.get_mpz_t(), p_.get_mpz_t());
  mpz_powm_sec(m2.get_mpz_t(), xq.get_mpz_t(), dq_.get_mpz_t(), q_.get_mpz_t());
  mpz_class h = (qinv_ * (m1 - m2)) % p_;
  if (h < 0) h += p_;
  return m2 + h * q_;
}

bool KeyPair::consistent() const {
  return verification_key.bits() == modulus_bits && signing_key.verification_key() == verification_key;
}

KeyPair keygen(unsigned modulus_bits) {
  if (!is_supported_modulus_bits(modulus_bits)) {
    throw Error(Errc::unsupported_key_size, std::to_string(modulus_bits) + "-bit modulus");
  }
  if (modulus_bits == 1024) warn_legacy_size_once();
  const mpz_class e{kPublicExponent};
  for (;;) {
    auto p = generate_prime(modulus_bits / 2, e);
    auto q = generate_prime(modulus_bits / 2, e);
    if (p == q) continue;
    SigningKey sk(std::move(p), std::move(q), e);
    KeyPair kp{sk, sk.verification_key(), modulus_bits};
    if (kp.verification_key.bits() == modulus_bits) return kp;
  }
}

mpz_class full_domain_hash(const mpz_class& modulus, ByteView message) {
  const std::size_t width = (mpz_sizeinbase(modulus.get_mpz_t(), 2) + 7) / 8;
  Bytes expanded;
  expanded.reserve(width + 32);

  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::uint8_t digest[32];
  for (std::uint32_t ctr = 0; expanded.size() < width; ++ctr) {
    const std::uint8_t ctr_be[4] = {static_cast<std::uint8_t>(ctr >> 24), static_cast<std::uint8_t>(ctr >> 16),
                                    static_cast<std::uint8_t>(ctr >> 8), static_cast<std::uint8_t>(ctr)};
    unsigned int len = 0;
    if (EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), kFdhTag.data(), kFdhTag.size()) != 1 ||
        EVP_DigestUpdate(ctx.get(), ctr_be, sizeof ctr_be) != 1 ||
        EVP_DigestUpdate(ctx.get(), message.data(), message.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
      throw Error(Errc::internal, "sha256 failure");
    }
    expanded.insert(expanded.end(), digest, digest + len);
  }
  expanded.resize(width);
  mpz_class h = from_bytes_be(expanded);
  mpz_mod(h.get_mpz_t(), h.get_mpz_t(), modulus.get_mpz_t());
  return h;
}

Bytes encode_attribute(const Attribute& attribute, const VerificationKey& user_vk, Timestamp t_exp) {
  ByteWriter w;
  w.field(attribute.key + "=" + attribute.value);
  w.field(user_vk.to_bytes());
  w.field(format_rfc3339(t_exp));
  return std::move(w).bytes();
}

Signature sign_bytes(const SigningKey& key, ByteView payload) {
  return Signature{key.apply_private(full_domain_hash(key.modulus(), payload))};
}

bool verify_bytes(const VerificationKey& key, ByteView payload, const Signature& signature) {
  if (key.modulus() <= 0 || !in_group(signature.value, key.modulus())) return false;
  return public_exponentiation(key, signature.value) == full_domain_hash(key.modulus(), payload);
}

SignedMessage sign_message(const SigningKey& key, Bytes payload) {
  auto sig = sign_bytes(key, payload);
  return SignedMessage{std::move(payload), std::move(sig)};
}

bool verify_message(const VerificationKey& key, const SignedMessage& message) {
  return verify_bytes(key, message.payload, message.signature);
}

Signature sign_attribute(const SigningKey& key, const Attribute& attribute,
                         const VerificationKey& user_vk, Timestamp t_exp) {
  return sign_bytes(key, encode_attribute(attribute, user_vk, t_exp));
}

bool verify_attribute(const VerificationKey& key, const Attribute& attribute,
                      const VerificationKey& user_vk, Timestamp t_exp, const Signature& signature) {
  return verify_bytes(key, encode_attribute(attribute, user_vk, t_exp), signature);
}

PackedSignature pack(std::span<const Signature> signatures, const mpz_class& modulus) {
  PackedSignature out;
  for (const auto& s : signatures) out = pack_with(std::move(out), s, modulus);
  return out;
}

PackedSignature pack_with(PackedSignature packed, const Signature& extra, const mpz_class& modulus) {
  if (!in_group(extra.value, modulus)) {
    throw Error(Errc::malformed_signature, "signature outside the group");
  }
  packed.value *= extra.value;
  mpz_mod(packed.value.get_mpz_t(), packed.value.get_mpz_t(), modulus.get_mpz_t());
  ++packed.count;
  return packed;
}

bool batch_verify(const VerificationKey& key, std::span<const BoundAttribute> messages,
                  const PackedSignature& packed) {
  std::vector<Bytes> encoded;
  encoded.reserve(messages.size());
  for (const auto& m : messages) encoded.push_back(encode_attribute(m.attribute, m.user_vk, m.t_exp));
  return batch_verify_encoded(key, encoded, packed);
}

bool batch_verify_encoded(const VerificationKey& key, std::span<const Bytes> messages,
                          const PackedSignature& packed) {
  std::vector<const Bytes*> order;
  order.reserve(messages.size());
  for (const auto& m : messages) order.push_back(&m);
  std::sort(order.begin(), order.end(), [](const Bytes* a, const Bytes* b) { return *a < *b; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (*order[i] == *order[i - 1]) {
      throw Error(Errc::duplicate_message, "batch contains a repeated message");
    }
  }

  if (packed.count != messages.size()) return false;
  const auto& n = key.modulus();
  if (n <= 0 || !in_group(packed.value, n)) return false;

  mpz_class expected{1};
  for (const auto& m : messages) {
    expected *= full_domain_hash(n, m);
    mpz_mod(expected.get_mpz_t(), expected.get_mpz_t(), n.get_mpz_t());
  }
  return public_exponentiation(key, packed.value) == expected;
}

ExponentiationProbe::ExponentiationProbe() : previous_(active_probe) { active_probe = this; }

ExponentiationProbe::~ExponentiationProbe() { active_probe = previous_; }

std::size_t ExponentiationProbe::count_for(const VerificationKey& key) const {
  return static_cast<std::size_t>(
      std::count(moduli_.begin(), moduli_.end(), key.modulus()));
}

}  // namespace prima::crypto
