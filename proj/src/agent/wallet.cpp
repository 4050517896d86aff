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

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>

#include "prima/agent.hpp"
#include "prima/error.hpp"

namespace prima::agent {
namespace {

constexpr std::string_view kMagic = "PRIMAWLT";
constexpr std::uint8_t kWalletVersion = 1;
constexpr std::uint8_t kFlagEncrypted = 0x01;
constexpr std::size_t kDigestSize = 32;

[[noreturn]] void corrupt(const std::string& detail) { throw Error(Errc::wallet_corrupt, detail); }

[[noreturn]] void io_failure(const std::string& what, const std::filesystem::path& path) {
  throw Error(Errc::io_error, what + " " + path.string() + ": " + std::strerror(errno));
}

void write_all(int fd, const Bytes& data, const std::filesystem::path& path) {
  std::size_t done = 0;
  while (done < data.size()) {
    const auto n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_failure("write", path);
    }
    done += static_cast<std::size_t>(n);
  }
}

}  // namespace

Wallet Wallet::create(std::filesystem::path path, unsigned modulus_bits) {
  return Wallet(crypto::keygen(modulus_bits), std::move(path));
}

Wallet Wallet::from_keypair(crypto::KeyPair keys, std::filesystem::path path) {
  if (!keys.consistent()) throw Error(Errc::wallet_corrupt, "inconsistent key pair");
  return Wallet(std::move(keys), std::move(path));
}

const WalletCredential* Wallet::find_by_idp(const std::string& idp_key_id) const {
  auto it = std::find_if(credentials_.begin(), credentials_.end(),
                         [&](const WalletCredential& c) { return c.idp_key_id() == idp_key_id; });
  return it == credentials_.end() ? nullptr : &*it;
}

void Wallet::put_credential(WalletCredential credential, bool replace) {
  if (!(credential.credential.user_vk() == user_vk())) {
    throw Error(Errc::credential_rejected, "credential is bound to another user key");
  }
  const auto id = credential.idp_key_id();
  auto it = std::find_if(credentials_.begin(), credentials_.end(),
                         [&](const WalletCredential& c) { return c.idp_key_id() == id; });
  if (it == credentials_.end()) {
    credentials_.push_back(std::move(credential));
    return;
  }
  if (!replace) throw Error(Errc::already_enrolled, id);
  *it = std::move(credential);
  // Statements derived from the old attributes no longer apply.
  std::erase_if(derived_, [&](const CachedStatement& s) { return s.idp_key_id == id; });
}

const CachedStatement* Wallet::find_statement(const std::string& idp_key_id, const std::string& key) const {
  auto it = std::find_if(derived_.begin(), derived_.end(), [&](const CachedStatement& s) {
    return s.idp_key_id == idp_key_id && s.certified.statement.attribute.key == key;
  });
  return it == derived_.end() ? nullptr : &*it;
}

void Wallet::put_statement(CachedStatement statement) {
  std::erase_if(derived_, [&](const CachedStatement& s) {
    return s.idp_key_id == statement.idp_key_id &&
           s.certified.statement.attribute.key == statement.certified.statement.attribute.key;
  });
  derived_.push_back(std::move(statement));
}

bool Wallet::operator==(const Wallet& other) const {
  return keys_.verification_key == other.keys_.verification_key &&
         keys_.signing_key.prime_p() == other.keys_.signing_key.prime_p() &&
         keys_.signing_key.prime_q() == other.keys_.signing_key.prime_q() && credentials_ == other.credentials_ &&
         derived_ == other.derived_;
}

Bytes Wallet::serialize() const {
  ByteWriter w;
  w.raw(to_bytes(kMagic)).u8(kWalletVersion).u8(0);
  const auto& sk = keys_.signing_key;
  w.field(crypto::to_bytes_be(sk.prime_p()))
      .field(crypto::to_bytes_be(sk.prime_q()))
      .field(crypto::to_bytes_be(sk.public_exponent()));

  w.u32(static_cast<std::uint32_t>(credentials_.size()));
  for (const auto& c : credentials_) {
    w.field(std::string_view(c.idp_endpoint)).field(c.idp_vk().to_bytes()).field(prima::serialize(c.credential));
  }

  w.u32(static_cast<std::uint32_t>(derived_.size()));
  for (const auto& s : derived_) {
    const auto& st = s.certified.statement;
    w.field(std::string_view(s.idp_key_id))
        .field(std::string_view(st.attribute.key))
        .field(std::string_view(st.attribute.value))
        .field(std::string_view(st.source_key))
        .field(std::string_view(format_rfc3339(st.evaluated_at)))
        .field(s.certified.signature.to_bytes())
        .field(std::string_view(format_rfc3339(s.certified.t_exp)));
  }

  auto out = std::move(w).bytes();
  const auto digest = sha256(out);
  out.insert(out.end(), digest.begin(), digest.end());
  return out;
}

Wallet Wallet::parse(ByteView data, std::filesystem::path path) {
  const std::size_t header = kMagic.size() + 2;
  if (data.size() < header + kDigestSize) corrupt("wallet file truncated");
  const auto body = data.first(data.size() - kDigestSize);
  const auto digest = sha256(body);
  if (!std::equal(digest.begin(), digest.end(), data.end() - kDigestSize)) corrupt("wallet checksum mismatch");
  if (!std::equal(kMagic.begin(), kMagic.end(), body.begin())) corrupt("not a wallet file");

  const std::uint8_t version = body[kMagic.size()];
  const std::uint8_t flags = body[kMagic.size() + 1];
  if (version != kWalletVersion) {
    throw Error(Errc::unsupported_version, "wallet version " + std::to_string(version));
  }
  if (flags & kFlagEncrypted) corrupt("encrypted wallet; no decryption hook is configured");
  if (flags != 0) corrupt("unknown wallet flags");

  try {
    ByteReader r(body.subspan(header));
    auto p = crypto::from_bytes_be(r.field());
    auto q = crypto::from_bytes_be(r.field());
    auto e = crypto::from_bytes_be(r.field());
    crypto::SigningKey sk(std::move(p), std::move(q), std::move(e));
    auto vk = sk.verification_key();
    const auto bits = vk.bits();
    Wallet wallet(crypto::KeyPair{std::move(sk), std::move(vk), bits}, std::move(path));
    if (!wallet.keys_.consistent()) corrupt("inconsistent key pair");

    const auto n_creds = r.u32();
    for (std::uint32_t i = 0; i < n_creds; ++i) {
      auto endpoint = r.text_field();
      auto issuer = crypto::VerificationKey::from_bytes(r.field());
      auto credential = deserialize_credential(r.field(), issuer);
      if (!(credential.user_vk() == wallet.user_vk())) corrupt("credential bound to another user key");
      wallet.put_credential(WalletCredential{std::move(endpoint), std::move(credential)}, false);
    }

    const auto n_derived = r.u32();
    for (std::uint32_t i = 0; i < n_derived; ++i) {
      CachedStatement s;
      s.idp_key_id = r.text_field();
      s.certified.statement.attribute.key = r.text_field();
      s.certified.statement.attribute.value = r.text_field();
      s.certified.statement.source_key = r.text_field();
      s.certified.statement.evaluated_at = parse_rfc3339(r.text_field());
      s.certified.signature = crypto::Signature::from_bytes(r.field());
      s.certified.t_exp = parse_rfc3339(r.text_field());
      const auto* held = wallet.find_by_idp(s.idp_key_id);
      if (held == nullptr) corrupt("derived statement from an unknown IdP");
      if (!crypto::verify_attribute(held->idp_vk(), s.certified.statement.attribute, wallet.user_vk(),
                                    s.certified.t_exp, s.certified.signature)) {
        corrupt("derived statement signature does not verify");
      }
      wallet.put_statement(std::move(s));
    }
    r.expect_done();
    return wallet;
  } catch (const Error& e) {
    if (e.code() == Errc::wallet_corrupt) throw;
    corrupt(std::string(to_string(e.code())) + ": " + e.detail());
  }
}

Wallet Wallet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_failure("open", path);
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(data, path);
}

void Wallet::save() const {
  if (path_.empty()) return;
  const auto data = serialize();
  auto tmp = path_;
  tmp += ".tmp";
  const int fd = ::open(tmp.c_str(), O_CREAT | O_TRUNC | O_WRONLY | O_CLOEXEC, 0600);
  if (fd < 0) io_failure("create", tmp);
  try {
    if (::fchmod(fd, 0600) != 0) io_failure("chmod", tmp);
    write_all(fd, data, tmp);
    if (::fsync(fd) != 0) io_failure("fsync", tmp);
  } catch (...) {
    ::close(fd);
    ::unlink(tmp.c_str());
    throw;
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path_.c_str()) != 0) io_failure("rename", path_);
}

WalletLock::WalletLock(const std::filesystem::path& wallet_path) {
  auto lock_path = wallet_path;
  lock_path += ".lock";
  fd_ = ::open(lock_path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0600);
  if (fd_ < 0) io_failure("open", lock_path);
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw Error(Errc::wallet_locked, wallet_path.string());
  }
}

WalletLock::~WalletLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace prima::agent
