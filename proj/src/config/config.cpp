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

#include "prima/config.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "prima/error.hpp"
#include "prima/messages.hpp"
#include "wire/object_reader.hpp"

namespace prima::config {
namespace {

using wire::Json;
using wire::detail::ObjectReader;

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

Json read_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::io_error, "cannot open " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return wire::parse_strict(buf.str());
}

void write_private(const std::filesystem::path& file, const std::string& text) {
  const int fd = ::open(file.c_str(), O_CREAT | O_TRUNC | O_WRONLY | O_CLOEXEC, 0600);
  if (fd < 0) throw Error(Errc::io_error, "cannot create " + file.string());
  const bool ok = ::write(fd, text.data(), text.size()) == static_cast<ssize_t>(text.size()) && ::fsync(fd) == 0;
  ::close(fd);
  if (!ok) throw Error(Errc::io_error, "cannot write " + file.string());
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  std::filesystem::path p(value);
  return p.is_absolute() || base.empty() ? p : base / p;
}

unsigned parse_bits(const std::string& text) {
  try {
    std::size_t used = 0;
    const auto v = std::stoul(text, &used);
    if (used == text.size()) return static_cast<unsigned>(v);
  } catch (const std::exception&) {
  }
  throw Error(Errc::schema_violation, "key bits must be a number: " + text);
}

}  // namespace

ListenAddress parse_listen(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0) throw Error(Errc::schema_violation, "listen must be host:port");
  ListenAddress a;
  a.host = text.substr(0, colon);
  try {
    std::size_t used = 0;
    const auto port = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1 || port < 0 || port > 65535) throw std::out_of_range("port");
    a.port = port;
  } catch (const std::exception&) {
    throw Error(Errc::schema_violation, "bad port in listen address " + text);
  }
  return a;
}

IdpConfig load_idp_config(const std::filesystem::path& file) {
  IdpConfig c;
  const auto base = file.parent_path();
  c.key_file = resolve(base, "idp.key");
  if (!file.empty() && std::filesystem::exists(file)) {
    const auto j = read_json(file);
    ObjectReader r(j, "idp config");
    if (r.has("key_file")) c.key_file = resolve(base, r.str("key_file"));
    if (r.has("key_bits")) c.key_bits = static_cast<unsigned>(r.integer("key_bits"));
    if (r.has("journal")) c.journal = resolve(base, r.str("journal"));
    if (r.has("listen")) c.listen = parse_listen(r.str("listen"));
    if (r.has("nonce_rate_limit")) {
      ObjectReader rl(r.at("nonce_rate_limit"), "nonce_rate_limit");
      idp::RateLimit limit;
      const auto& per = rl.at("per_second");
      const auto& burst = rl.at("burst");
      if (!per.is_number() || !burst.is_number()) rl.fail("rate limit fields must be numbers");
      limit.tokens_per_second = per.get<double>();
      limit.burst = burst.get<double>();
      rl.finish();
      c.nonce_rate_limit = limit;
    }
    r.finish();
  }
  if (auto v = env("PRIMA_IDP_KEY_FILE")) c.key_file = *v;
  if (auto v = env("PRIMA_IDP_KEY_BITS")) c.key_bits = parse_bits(*v);
  if (auto v = env("PRIMA_IDP_JOURNAL")) c.journal = *v;
  if (auto v = env("PRIMA_IDP_LISTEN")) c.listen = parse_listen(*v);
  return c;
}

SpConfig load_sp_config(const std::filesystem::path& file) {
  SpConfig c;
  const auto base = file.parent_path();
  c.policy_file = resolve(base, "policy.json");
  c.idp_public_key_file = resolve(base, "idp.key.pub");
  if (!file.empty() && std::filesystem::exists(file)) {
    const auto j = read_json(file);
    ObjectReader r(j, "sp config");
    if (r.has("policy_file")) c.policy_file = resolve(base, r.str("policy_file"));
    if (r.has("idp_public_key_file")) c.idp_public_key_file = resolve(base, r.str("idp_public_key_file"));
    if (r.has("listen")) c.listen = parse_listen(r.str("listen"));
    r.finish();
  }
  if (auto v = env("PRIMA_SP_POLICY_FILE")) c.policy_file = *v;
  if (auto v = env("PRIMA_SP_IDP_KEY_FILE")) c.idp_public_key_file = *v;
  if (auto v = env("PRIMA_SP_LISTEN")) c.listen = parse_listen(*v);

  const auto policy = read_json(c.policy_file);
  ObjectReader r(policy, "policy");
  c.service_name = r.str("service_name");
  for (const auto& item : r.array("requires")) {
    if (!item.is_string()) r.fail("requires must list predicate strings");
    c.required.push_back(inference::parse_predicate(item.get<std::string>()));
  }
  if (r.has("clock_skew_s")) c.clock_skew = Seconds{r.integer("clock_skew_s")};
  if (r.has("challenge_ttl_s")) c.challenge_ttl = Seconds{r.integer("challenge_ttl_s")};
  if (r.has("token_ttl_s")) c.token_ttl = Seconds{r.integer("token_ttl_s")};
  r.finish();
  return c;
}

void save_keypair(const crypto::KeyPair& keys, const std::filesystem::path& file) {
  const auto& sk = keys.signing_key;
  const Json j{{"e", base64url_encode(crypto::to_bytes_be(sk.public_exponent()))},
               {"p", base64url_encode(crypto::to_bytes_be(sk.prime_p()))},
               {"q", base64url_encode(crypto::to_bytes_be(sk.prime_q()))}};
  write_private(file, j.dump(2) + "\n");
}

crypto::KeyPair load_keypair(const std::filesystem::path& file) {
  const auto j = read_json(file);
  ObjectReader r(j, "key file");
  crypto::SigningKey sk(crypto::from_bytes_be(r.b64("p")), crypto::from_bytes_be(r.b64("q")),
                        crypto::from_bytes_be(r.b64("e")));
  r.finish();
  auto vk = sk.verification_key();
  const auto bits = vk.bits();
  crypto::KeyPair kp{std::move(sk), std::move(vk), bits};
  if (!crypto::is_supported_modulus_bits(bits) || !kp.consistent()) {
    throw Error(Errc::unsupported_key_size, file.string() + " holds an unusable key");
  }
  return kp;
}

crypto::KeyPair load_or_create_keypair(const std::filesystem::path& file, unsigned bits) {
  if (std::filesystem::exists(file)) return load_keypair(file);
  auto kp = crypto::keygen(bits);
  save_keypair(kp, file);
  return kp;
}

void save_public_key(const crypto::VerificationKey& vk, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error(Errc::io_error, "cannot create " + file.string());
  out << wire::to_json(vk).dump(2) << "\n";
}

crypto::VerificationKey load_public_key(const std::filesystem::path& file) {
  try {
    return wire::verification_key_from_json(read_json(file));
  } catch (const Error& e) {
    if (e.code() == Errc::io_error) throw;
    throw Error(Errc::schema_violation, file.string() + ": " + e.detail());
  }
}

}  // namespace prima::config
