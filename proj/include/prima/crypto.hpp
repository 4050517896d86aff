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

// RSA full-domain-hash signatures with same-signer multiplicative packing.
//
//   sign:    s = H*(m)^d mod n
//   pack:    P = prod(s_i) mod n
//   verify:  P^e == prod(H*(m_i)) mod n        (one exponentiation)
//
// H* expands SHA-256("PRIMA-FDH-v1" || ctr || m) to the modulus width and
// reduces mod n. Packed verification is only sound over pairwise-distinct
// messages, so batch verification rejects duplicates outright.

#include <gmpxx.h>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "prima/attribute.hpp"
#include "prima/bytes.hpp"
#include "prima/time.hpp"

namespace prima::crypto {

inline constexpr unsigned kDefaultModulusBits = 2048;
inline constexpr unsigned long kPublicExponent = 65537;

bool is_supported_modulus_bits(unsigned bits);

/// Unsigned big-endian, minimal length (zero encodes as a single 0x00).
Bytes to_bytes_be(const mpz_class& v);
mpz_class from_bytes_be(ByteView b);

class VerificationKey {
 public:
  VerificationKey() = default;
  VerificationKey(mpz_class modulus, mpz_class exponent);

  const mpz_class& modulus() const { return modulus_; }
  const mpz_class& exponent() const { return exponent_; }
  unsigned bits() const;

  /// Canonical byte form: length-prefixed modulus then exponent. This is the
  /// "vk_U" that attribute signatures bind to.
  Bytes to_bytes() const;
  static VerificationKey from_bytes(ByteView b);

  /// First 16 hex digits of SHA-256 over to_bytes().
  std::string fingerprint() const;

  bool operator==(const VerificationKey& other) const {
    return modulus_ == other.modulus_ && exponent_ == other.exponent_;
  }

 private:
  mpz_class modulus_;
  mpz_class exponent_;
};

class SigningKey {
 public:
  SigningKey() = default;
  /// Derives the private exponent and CRT parameters. Throws
  /// Error(unsupported_key_size) for malformed material.
  SigningKey(mpz_class p, mpz_class q, mpz_class e);

  const mpz_class& modulus() const { return n_; }
  const mpz_class& public_exponent() const { return e_; }
  const mpz_class& prime_p() const { return p_; }
  const mpz_class& prime_q() const { return q_; }

  VerificationKey verification_key() const { return VerificationKey(n_, e_); }

  /// x^d mod n via CRT.
  mpz_class apply_private(const mpz_class& x) const;

 private:
  mpz_class p_, q_, n_, e_, d_, dp_, dq_, qinv_;
};

struct KeyPair {
  SigningKey signing_key;
  VerificationKey verification_key;
  unsigned modulus_bits = 0;

  /// modulus size matches and verification_key is the one derived from
  /// signing_key.
  bool consistent() const;
};

/// Fresh key pair. Supported sizes: 1024 (benchmark parity only, warns),
/// 2048, 3072, 4096.
KeyPair keygen(unsigned modulus_bits = kDefaultModulusBits);

struct Signature {
  mpz_class value;

  Bytes to_bytes() const { return to_bytes_be(value); }
  static Signature from_bytes(ByteView b) { return Signature{from_bytes_be(b)}; }

  bool operator==(const Signature& other) const { return value == other.value; }
};

struct PackedSignature {
  mpz_class value{1};
  std::size_t count = 0;

  bool operator==(const PackedSignature& other) const {
    return value == other.value && count == other.count;
  }
};

struct SignedMessage {
  Bytes payload;
  Signature signature;

  bool operator==(const SignedMessage&) const = default;
};

/// Deterministic hash of a message into Z_n.
mpz_class full_domain_hash(const mpz_class& modulus, ByteView message);

/// length-prefixed("key=value") || length-prefixed(vk bytes) ||
/// length-prefixed(RFC 3339 t_exp)
Bytes encode_attribute(const Attribute& attribute, const VerificationKey& user_vk, Timestamp t_exp);

Signature sign_bytes(const SigningKey& key, ByteView payload);
bool verify_bytes(const VerificationKey& key, ByteView payload, const Signature& signature);

SignedMessage sign_message(const SigningKey& key, Bytes payload);
bool verify_message(const VerificationKey& key, const SignedMessage& message);

Signature sign_attribute(const SigningKey& key, const Attribute& attribute,
                         const VerificationKey& user_vk, Timestamp t_exp);
bool verify_attribute(const VerificationKey& key, const Attribute& attribute,
                      const VerificationKey& user_vk, Timestamp t_exp, const Signature& signature);

/// Throws Error(malformed_signature) if any value is outside (0, n).
PackedSignature pack(std::span<const Signature> signatures, const mpz_class& modulus);

/// Adds one more signature to an existing pack.
PackedSignature pack_with(PackedSignature packed, const Signature& extra, const mpz_class& modulus);

struct BoundAttribute {
  Attribute attribute;
  VerificationKey user_vk;
  Timestamp t_exp;
};

/// One exponentiation with the public exponent. Throws
/// Error(duplicate_message) when two bound messages encode identically.
bool batch_verify(const VerificationKey& key, std::span<const BoundAttribute> messages,
                  const PackedSignature& packed);

/// Same check over already-encoded messages.
bool batch_verify_encoded(const VerificationKey& key, std::span<const Bytes> messages,
                          const PackedSignature& packed);

/// Counts public-exponent exponentiations performed on the constructing
/// thread while the probe is alive. Probes nest; the innermost is active.
class ExponentiationProbe {
 public:
  ExponentiationProbe();
  ~ExponentiationProbe();
  ExponentiationProbe(const ExponentiationProbe&) = delete;
  ExponentiationProbe& operator=(const ExponentiationProbe&) = delete;

  std::size_t total() const { return moduli_.size(); }
  std::size_t count_for(const VerificationKey& key) const;

  void record(const mpz_class& modulus) { moduli_.push_back(modulus); }

 private:
  std::vector<mpz_class> moduli_;
  ExponentiationProbe* previous_;
};

}  // namespace prima::crypto
