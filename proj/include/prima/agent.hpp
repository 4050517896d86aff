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

#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "prima/credential.hpp"
#include "prima/crypto.hpp"
#include "prima/idp.hpp"
#include "prima/inference.hpp"
#include "prima/messages.hpp"
#include "prima/sp.hpp"
#include "prima/transport.hpp"

namespace prima::agent {

struct WalletCredential {
  std::string idp_endpoint;
  Credential credential;

  const crypto::VerificationKey& idp_vk() const { return credential.issuer(); }
  std::string idp_key_id() const { return credential.issuer().fingerprint(); }

  bool operator==(const WalletCredential&) const = default;
};

/// A derived statement certified by an IdP, cached until its t_exp.
struct CachedStatement {
  std::string idp_key_id;
  idp::CertifiedStatement certified;

  bool operator==(const CachedStatement& other) const {
    return idp_key_id == other.idp_key_id && certified.statement == other.certified.statement &&
           certified.signature == other.certified.signature && certified.t_exp == other.certified.t_exp;
  }
};

/// Wallet file layout (all integers big-endian):
///
///   "PRIMAWLT" | version u8 (=1) | flags u8 (bit 0: encrypted, must be 0)
///   keypair      lp(p) lp(q) lp(e)
///   credentials  u32 n, n x [lp(endpoint) lp(idp vk) lp(credential)]
///   derived      u32 n, n x [lp(idp key id) lp(key) lp(value) lp(source)
///                            lp(evaluated_at) lp(signature) lp(t_exp)]
///   SHA-256 of everything above
///
/// lp(x) is a 4-byte length followed by x.
class Wallet {
 public:
  /// Fresh keypair; not written until save().
  static Wallet create(std::filesystem::path path, unsigned modulus_bits = crypto::kDefaultModulusBits);
  static Wallet from_keypair(crypto::KeyPair keys, std::filesystem::path path = {});

  /// Throws Error(wallet_corrupt) on a bad checksum, an inconsistent key,
  /// a credential that does not verify, or a credential for another user.
  static Wallet load(const std::filesystem::path& path);
  static Wallet parse(ByteView data, std::filesystem::path path = {});

  /// Writes atomically (temp file + rename) with owner-only permissions.
  /// No-op for a wallet without a path.
  void save() const;
  Bytes serialize() const;

  const crypto::KeyPair& keypair() const { return keys_; }
  const crypto::VerificationKey& user_vk() const { return keys_.verification_key; }
  const std::filesystem::path& path() const { return path_; }

  const std::vector<WalletCredential>& credentials() const { return credentials_; }
  const WalletCredential* find_by_idp(const std::string& idp_key_id) const;
  /// Throws Error(already_enrolled) unless `replace` is set.
  void put_credential(WalletCredential credential, bool replace);

  const std::vector<CachedStatement>& derived() const { return derived_; }
  const CachedStatement* find_statement(const std::string& idp_key_id, const std::string& key) const;
  void put_statement(CachedStatement statement);

  bool operator==(const Wallet& other) const;

 private:
  Wallet(crypto::KeyPair keys, std::filesystem::path path) : keys_(std::move(keys)), path_(std::move(path)) {}

  crypto::KeyPair keys_;
  std::filesystem::path path_;
  std::vector<WalletCredential> credentials_;
  std::vector<CachedStatement> derived_;
};

/// Exclusive advisory lock on "<wallet>.lock"; a second holder fails fast
/// with Error(wallet_locked).
class WalletLock {
 public:
  explicit WalletLock(const std::filesystem::path& wallet_path);
  ~WalletLock();
  WalletLock(const WalletLock&) = delete;
  WalletLock& operator=(const WalletLock&) = delete;

 private:
  int fd_ = -1;
};

/// What the human agreed to reveal: plain attribute keys and predicate
/// proofs.
struct Consent {
  std::set<std::string> disclose;
  std::vector<inference::Predicate> proofs;

  bool allows(const inference::Predicate& requirement) const;
};

/// Called with the SP's challenge when no fixed consent was given.
using ConsentPrompt = std::function<Consent(const sp::Challenge&)>;

struct LoginOptions {
  /// Ignore cached derived statements and ask the IdP again.
  bool fresh = false;
  /// Added to the presentation timestamp; scenario scripts use it to
  /// simulate a skewed or replaying client.
  Seconds timestamp_offset{0};
};

/// Everything produced before the final submission to the SP.
struct PreparedLogin {
  sp::Challenge challenge;
  wire::PresentRequest request;
};

class Agent {
 public:
  Agent(Wallet& wallet, wire::Transport& transport, Clock clock = system_clock());

  /// Registers with the IdP, verifies every returned attribute signature,
  /// and stores the credential. A credential that fails verification is
  /// discarded with Error(credential_rejected).
  const WalletCredential& enroll(const std::string& idp_endpoint, const idp::RawAttributes& attributes,
                                 Seconds validity, bool replace = false);

  /// Full login: request access, consent gate, optional inference, nonce
  /// signing, presentation, submission.
  sp::AccessToken login(const std::string& sp_endpoint, const Consent& consent, LoginOptions options = {});
  sp::AccessToken login(const std::string& sp_endpoint, const ConsentPrompt& prompt, LoginOptions options = {});

  /// login() up to, not including, the submission.
  PreparedLogin prepare(const std::string& sp_endpoint, const ConsentPrompt& prompt, LoginOptions options = {});
  sp::AccessToken submit(const std::string& sp_endpoint, const wire::PresentRequest& request);

 private:
  const WalletCredential& credential_for(const sp::Challenge& challenge) const;
  std::vector<idp::CertifiedStatement> derive(const WalletCredential& held,
                                              const std::vector<inference::Predicate>& needed);

  Wallet& wallet_;
  wire::Transport& transport_;
  Clock clock_;
};

}  // namespace prima::agent
