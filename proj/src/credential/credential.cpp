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

#include "prima/credential.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

#include "prima/error.hpp"

namespace prima {
namespace {

constexpr std::uint8_t kCredentialTag = 'C';
constexpr std::uint8_t kPresentationTag = 'P';
constexpr std::uint32_t kMaxAttributes = 10000;
constexpr std::string_view kNonceTag = "PRIMA-NONCE-v1";
constexpr std::string_view kBodyTag = "PRIMA-PRESENTATION-v1";

bool valid_key_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == ':';
}

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates, out of range.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

void check_distinct_keys(const std::vector<Attribute>& attributes, Errc code) {
  std::set<std::string_view> seen;
  for (const auto& a : attributes) {
    if (!seen.insert(a.key).second) throw Error(code, "duplicate attribute key " + a.key);
  }
}

Timestamp parse_time_field(ByteReader& r) {
  const auto at = r.offset();
  const auto text = r.text_field(32);
  try {
    return parse_rfc3339(text);
  } catch (const Error& e) {
    throw ParseError(Errc::parse_error, "bad timestamp", at);
  }
}

Attribute read_attribute(ByteReader& r) {
  const auto at = r.offset();
  Attribute a;
  a.key = r.text_field(kMaxAttributeKeyLength);
  a.value = r.text_field(kMaxAttributeValueLength);
  try {
    validate_attribute(a);
  } catch (const Error& e) {
    throw ParseError(Errc::parse_error, e.what(), at);
  }
  return a;
}

void read_header(ByteReader& r, std::uint8_t tag) {
  const auto version = r.u8();
  if (version != kFormatVersion) {
    throw ParseError(Errc::unsupported_version, "format version " + std::to_string(version), 0);
  }
  if (r.u8() != tag) throw ParseError(Errc::parse_error, "unexpected record type", 1);
}

crypto::VerificationKey read_vk(ByteReader& r) {
  const auto at = r.offset();
  auto raw = r.field(2048);
  try {
    return crypto::VerificationKey::from_bytes(raw);
  } catch (const Error&) {
    throw ParseError(Errc::parse_error, "bad verification key", at);
  }
}

}  // namespace

void validate_attribute(const Attribute& attribute) {
  const auto& key = attribute.key;
  if (key.empty() || key.size() > kMaxAttributeKeyLength ||
      !std::all_of(key.begin(), key.end(), valid_key_char)) {
    throw Error(Errc::invalid_attribute_key, "'" + key + "'");
  }
  if (attribute.value.size() > kMaxAttributeValueLength) {
    throw Error(Errc::invalid_attribute_value, "value of '" + key + "' exceeds 4096 bytes");
  }
  if (!valid_utf8(attribute.value)) {
    throw Error(Errc::invalid_attribute_value, "value of '" + key + "' is not UTF-8");
  }
}

Attribute canonicalize_attribute(std::string_view raw_key, std::string_view raw_value) {
  Attribute a;
  for (char c : trim(raw_key)) a.key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  a.value = std::string(trim(raw_value));
  validate_attribute(a);
  return a;
}

Credential::Credential(CredentialFields fields, crypto::VerificationKey issuer)
    : fields_(std::move(fields)), issuer_(std::move(issuer)) {
  const auto& f = fields_;
  if (f.attributes.empty()) throw Error(Errc::invalid_credential, "no attributes");
  if (f.attributes.size() != f.signatures.size()) {
    throw Error(Errc::invalid_credential, "attribute/signature count mismatch");
  }
  if (!(f.t_isu < f.t_exp)) throw Error(Errc::invalid_credential, "t_isu must precede t_exp");
  for (const auto& a : f.attributes) validate_attribute(a);
  check_distinct_keys(f.attributes, Errc::invalid_credential);
  for (std::size_t i = 0; i < f.attributes.size(); ++i) {
    if (!crypto::verify_attribute(issuer_, f.attributes[i], f.user_vk, f.t_exp, f.signatures[i])) {
      throw Error(Errc::invalid_credential, "signature for '" + f.attributes[i].key + "' does not verify");
    }
  }
}

std::size_t Credential::find(std::string_view key) const {
  const auto& attrs = fields_.attributes;
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (attrs[i].key == key) return i;
  }
  return attrs.size();
}

Credential Credential::extended(std::span<const Attribute> attributes,
                                std::span<const crypto::Signature> signatures) const {
  CredentialFields f = fields_;
  f.attributes.insert(f.attributes.end(), attributes.begin(), attributes.end());
  f.signatures.insert(f.signatures.end(), signatures.begin(), signatures.end());
  return Credential(std::move(f), issuer_);
}

Disclosure select_disclosure(const Credential& credential, const std::set<std::string>& requested_keys) {
  Disclosure out;
  std::vector<crypto::Signature> sigs;
  // std::set iterates in key order, which is the canonical presentation order.
  for (const auto& key : requested_keys) {
    const auto i = credential.find(key);
    if (i == credential.size()) throw Error(Errc::missing_attribute, key);
    out.attributes.push_back(credential.attributes()[i]);
    sigs.push_back(credential.signatures()[i]);
  }
  out.packed = crypto::pack(sigs, credential.issuer().modulus());
  return out;
}

void Presentation::validate_structure() const {
  for (const auto& a : disclosed) {
    try {
      validate_attribute(a);
    } catch (const Error& e) {
      throw Error(Errc::invalid_presentation, e.what());
    }
  }
  check_distinct_keys(disclosed, Errc::invalid_presentation);
  if (packed.count != disclosed.size()) {
    throw Error(Errc::invalid_presentation, "packed count does not match disclosed set");
  }
}

Bytes presentation_body(const Presentation& p, ByteView sp_nonce) {
  ByteWriter w;
  w.field(kBodyTag);
  w.u32(static_cast<std::uint32_t>(p.disclosed.size()));
  for (const auto& a : p.disclosed) w.field(a.key).field(a.value);
  w.field(crypto::to_bytes_be(p.packed.value));
  w.u32(static_cast<std::uint32_t>(p.packed.count));
  w.field(p.user_vk.to_bytes());
  w.field(format_rfc3339(p.t_exp));
  w.field(format_rfc3339(p.timestamp));
  w.field(p.session_id);
  w.field(sp_nonce);
  w.field(p.signed_nonce.payload);
  w.field(p.signed_nonce.signature.to_bytes());
  return std::move(w).bytes();
}

Bytes nonce_payload(const crypto::VerificationKey& user_vk, ByteView nonce) {
  ByteWriter w;
  w.field(kNonceTag).field(user_vk.to_bytes()).field(nonce);
  return std::move(w).bytes();
}

Bytes serialize(const CredentialFields& c) {
  ByteWriter w;
  w.u8(kFormatVersion).u8(kCredentialTag);
  w.u32(static_cast<std::uint32_t>(c.attributes.size()));
  for (std::size_t i = 0; i < c.attributes.size(); ++i) {
    w.field(c.attributes[i].key).field(c.attributes[i].value);
    w.field(i < c.signatures.size() ? c.signatures[i].to_bytes() : Bytes{});
  }
  w.field(c.user_vk.to_bytes());
  w.field(format_rfc3339(c.t_isu));
  w.field(format_rfc3339(c.t_exp));
  return std::move(w).bytes();
}

CredentialFields deserialize_credential_fields(ByteView data) {
  ByteReader r(data);
  read_header(r, kCredentialTag);
  CredentialFields c;
  const auto count_at = r.offset();
  const auto n = r.u32();
  if (n > kMaxAttributes) throw ParseError(Errc::parse_error, "attribute count", count_at);
  for (std::uint32_t i = 0; i < n; ++i) {
    c.attributes.push_back(read_attribute(r));
    c.signatures.push_back(crypto::Signature::from_bytes(r.field(1024)));
  }
  c.user_vk = read_vk(r);
  c.t_isu = parse_time_field(r);
  c.t_exp = parse_time_field(r);
  r.expect_done();
  return c;
}

Credential deserialize_credential(ByteView data, const crypto::VerificationKey& issuer) {
  return Credential(deserialize_credential_fields(data), issuer);
}

Bytes serialize(const Presentation& p) {
  ByteWriter w;
  w.u8(kFormatVersion).u8(kPresentationTag);
  w.u32(static_cast<std::uint32_t>(p.disclosed.size()));
  for (const auto& a : p.disclosed) w.field(a.key).field(a.value);
  w.field(crypto::to_bytes_be(p.packed.value));
  w.u32(static_cast<std::uint32_t>(p.packed.count));
  w.field(p.user_vk.to_bytes());
  w.field(format_rfc3339(p.t_exp));
  w.field(format_rfc3339(p.timestamp));
  w.field(p.session_id);
  w.field(p.signed_nonce.payload);
  w.field(p.signed_nonce.signature.to_bytes());
  w.field(p.user_signature.to_bytes());
  return std::move(w).bytes();
}

Presentation deserialize_presentation(ByteView data) {
  ByteReader r(data);
  read_header(r, kPresentationTag);
  Presentation p;
  const auto count_at = r.offset();
  const auto n = r.u32();
  if (n > kMaxAttributes) throw ParseError(Errc::parse_error, "attribute count", count_at);
  for (std::uint32_t i = 0; i < n; ++i) p.disclosed.push_back(read_attribute(r));
  p.packed.value = crypto::from_bytes_be(r.field(1024));
  p.packed.count = r.u32();
  p.user_vk = read_vk(r);
  p.t_exp = parse_time_field(r);
  p.timestamp = parse_time_field(r);
  const auto sid_at = r.offset();
  const auto sid = r.field(64);
  if (sid.size() != p.session_id.size()) throw ParseError(Errc::parse_error, "session id length", sid_at);
  std::copy(sid.begin(), sid.end(), p.session_id.begin());
  p.signed_nonce.payload = r.field(4096);
  p.signed_nonce.signature = crypto::Signature::from_bytes(r.field(1024));
  p.user_signature = crypto::Signature::from_bytes(r.field(1024));
  r.expect_done();
  return p;
}

}  // namespace prima
