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

#include <atomic>
#include <thread>

#include "prima/error.hpp"
#include "prima/idp.hpp"
#include "prima/messages.hpp"
#include "prima/sp.hpp"
#include "support.hpp"

using namespace prima;
using namespace prima::sp;
using inference::Predicate;

namespace {

const Timestamp kNow = test::at("2026-03-01T12:00:00Z");

/// In-process IdP, SP and user; builds honest presentations that tests then
/// perturb.
struct World {
  explicit World(std::vector<Predicate> required, idp::RawAttributes attrs = {{"date_of_birth", "1990-04-12"},
                                                                             {"country", "DE"},
                                                                             {"name", "Alice"}}) {
    idp::IdpOptions options;
    options.clock = [this] { return now; };
    issuer = std::make_unique<idp::IdentityProvider>(test::key(1024, 0), options);
    ServicePolicy policy;
    policy.service_name = "sp-under-test";
    policy.required = std::move(required);
    policy.idp_vk = issuer->verification_key();
    sp = std::make_unique<ServiceProvider>(policy, [this] { return now; });
    credential = std::make_unique<Credential>(issuer->register_user(attrs, user().verification_key, Seconds{86400}));
  }

  const crypto::KeyPair& user() const { return test::key(1024, 1); }

  struct Attempt {
    Presentation presentation;
    Bytes nonce;
  };

  Attempt honest() {
    const auto ch = sp->create_challenge(user().verification_key);
    std::vector<Predicate> proofs;
    std::set<std::string> keys;
    for (const auto& p : ch.required) {
      keys.insert(p.statement_key());
      if (p.kind != inference::PredicateKind::reveal) proofs.push_back(p);
    }
    Credential held = *credential;
    if (!proofs.empty()) {
      std::vector<Attribute> attrs;
      std::vector<crypto::Signature> sigs;
      for (const auto& s : issuer->certify_derived(user().verification_key, proofs)) {
        attrs.push_back(s.statement.attribute);
        sigs.push_back(s.signature);
      }
      held = held.extended(attrs, sigs);
    }
    const auto d = select_disclosure(held, keys);
    Attempt a;
    a.nonce.assign(ch.nonce.begin(), ch.nonce.end());
    auto& p = a.presentation;
    p.disclosed = d.attributes;
    p.packed = d.packed;
    p.user_vk = user().verification_key;
    p.t_exp = held.t_exp();
    p.timestamp = now;
    p.session_id = ch.session_id;
    p.signed_nonce = issuer->sign_nonce(idp::NonceSignRequest::make(user(), a.nonce, now));
    resign(a);
    return a;
  }

  void resign(Attempt& a) const {
    a.presentation.user_signature = crypto::sign_bytes(user().signing_key, presentation_body(a.presentation, a.nonce));
  }

  Errc submit(const Attempt& a) {
    try {
      (void)sp->verify_presentation(a.presentation, a.nonce, now);
      return Errc::internal;
    } catch (const Error& e) {
      return e.code();
    }
  }

  Timestamp now = kNow;
  std::unique_ptr<idp::IdentityProvider> issuer;
  std::unique_ptr<ServiceProvider> sp;
  std::unique_ptr<Credential> credential;
};

const std::vector<Predicate> kCinema{Predicate::age_over(16), Predicate::reveal("country")};

}  // namespace

TEST_CASE("an honest presentation yields a token for exactly the disclosed keys") {
  World w(kCinema);
  const auto a = w.honest();
  const auto token = w.sp->verify_presentation(a.presentation, a.nonce, w.now);
  CHECK(token.granted_keys == std::vector<std::string>{"country", "proof:age_over:16"});
  CHECK(token.user_vk == w.user().verification_key);
  CHECK(token.expires_at == w.now + kDefaultTokenTtl);
  CHECK(w.sp->validate_token(token.token_id, w.now));
  CHECK_FALSE(w.sp->validate_token(token.token_id, token.expires_at));
  CHECK_FALSE(w.sp->validate_token(TokenId{}, w.now));

  const auto state = w.sp->export_state();
  CHECK(state.find("1990-04-12") == std::string::npos);
  CHECK(state.find("Alice") == std::string::npos);
  CHECK(state.find("\"country\"") != std::string::npos);
}

TEST_CASE("each check fails with its own code") {
  World w(kCinema);

  SUBCASE("bad user signature") {
    auto a = w.honest();
    a.presentation.user_signature = crypto::Signature{a.presentation.user_signature.value + 1};
    CHECK(w.submit(a) == Errc::bad_user_signature);
    a = w.honest();
    a.presentation.disclosed[0].value = "FR";
    CHECK(w.submit(a) == Errc::bad_user_signature);
  }
  SUBCASE("unknown session") {
    auto a = w.honest();
    a.presentation.session_id[0] ^= 1;
    w.resign(a);
    CHECK(w.submit(a) == Errc::unknown_session);
    a = w.honest();
    a.nonce[0] ^= 1;
    w.resign(a);
    CHECK(w.submit(a) == Errc::unknown_session);
  }
  SUBCASE("session bound to another user") {
    auto a = w.honest();
    const auto other = w.sp->create_challenge(test::key(1024, 2).verification_key);
    a.presentation.session_id = other.session_id;
    a.nonce.assign(other.nonce.begin(), other.nonce.end());
    w.resign(a);
    CHECK(w.submit(a) == Errc::unknown_session);
  }
  SUBCASE("replay") {
    const auto a = w.honest();
    CHECK(w.submit(a) == Errc::internal);
    CHECK(w.submit(a) == Errc::session_consumed);
  }
  SUBCASE("stale timestamp") {
    auto a = w.honest();
    a.presentation.timestamp = w.now - kDefaultClockSkew - Seconds{1};
    w.resign(a);
    CHECK(w.submit(a) == Errc::stale_timestamp);
    a.presentation.timestamp = w.now + kDefaultClockSkew + Seconds{1};
    w.resign(a);
    CHECK(w.submit(a) == Errc::stale_timestamp);
    a.presentation.timestamp = w.now + kDefaultClockSkew;
    w.resign(a);
    CHECK(w.submit(a) == Errc::internal);
  }
  SUBCASE("expired credential") {
    auto a = w.honest();
    a.presentation.t_exp = w.now;
    w.resign(a);
    CHECK(w.submit(a) == Errc::credential_expired);
  }
  SUBCASE("an expired credential outlives no session") {
    auto a = w.honest();
    w.now = a.presentation.t_exp;
    a.presentation.timestamp = w.now;
    w.resign(a);
    CHECK(w.submit(a) == Errc::unknown_session);
  }
  SUBCASE("bad IdP nonce signature") {
    auto a = w.honest();
    a.presentation.signed_nonce.signature.value += 1;
    w.resign(a);
    CHECK(w.submit(a) == Errc::bad_idp_nonce_signature);
    a = w.honest();
    a.presentation.signed_nonce = crypto::sign_message(test::key(1024, 3).signing_key, a.presentation.signed_nonce.payload);
    w.resign(a);
    CHECK(w.submit(a) == Errc::bad_idp_nonce_signature);
    a = w.honest();
    a.presentation.signed_nonce = w.issuer->sign_nonce(idp::NonceSignRequest::make(w.user(), Bytes(16, 0), w.now));
    w.resign(a);
    CHECK(w.submit(a) == Errc::bad_idp_nonce_signature);
  }
  SUBCASE("missing required") {
    World narrow({Predicate::reveal("country"), Predicate::reveal("name")});
    auto a = narrow.honest();
    auto& p = a.presentation;
    const auto d = select_disclosure(*narrow.credential, {"country"});
    p.disclosed = d.attributes;
    p.packed = d.packed;
    narrow.resign(a);
    CHECK(narrow.submit(a) == Errc::missing_required);
  }
  SUBCASE("bad packed signature") {
    auto a = w.honest();
    a.presentation.packed.value = a.presentation.packed.value * 2 % w.issuer->verification_key().modulus();
    w.resign(a);
    CHECK(w.submit(a) == Errc::bad_packed_signature);
  }
  SUBCASE("double-counted pack") {
    auto a = w.honest();
    const auto& n = w.issuer->verification_key().modulus();
    a.presentation.packed.value = a.presentation.packed.value * a.presentation.packed.value % n;
    w.resign(a);
    CHECK(w.submit(a) == Errc::bad_packed_signature);
  }
  SUBCASE("disclosed value changed and re-signed by the user") {
    auto a = w.honest();
    a.presentation.disclosed[0].value = "FR";
    w.resign(a);
    CHECK(w.submit(a) == Errc::bad_packed_signature);
  }
  SUBCASE("malformed structure") {
    auto a = w.honest();
    a.presentation.packed.count = 7;
    w.resign(a);
    CHECK(w.submit(a) == Errc::invalid_presentation);
  }
}

TEST_CASE("checks run in order when several would fail") {
  World w(kCinema);
  auto a = w.honest();
  a.presentation.timestamp = w.now - Seconds{3600};
  a.presentation.packed.value += 1;
  a.presentation.session_id[0] ^= 1;
  w.resign(a);
  CHECK(w.submit(a) == Errc::unknown_session);
  a.presentation.user_signature.value += 1;
  CHECK(w.submit(a) == Errc::bad_user_signature);

  auto b = w.honest();
  b.presentation.timestamp = w.now - Seconds{3600};
  b.presentation.packed.value += 1;
  w.resign(b);
  CHECK(w.submit(b) == Errc::stale_timestamp);
}

TEST_CASE("failures do not consume the session") {
  World w(kCinema);
  auto a = w.honest();
  const auto good = a.presentation;
  a.presentation.packed.value += 1;
  w.resign(a);
  CHECK(w.submit(a) == Errc::bad_packed_signature);
  a.presentation = good;
  CHECK(w.submit(a) == Errc::internal);
}

TEST_CASE("challenges expire after their TTL") {
  World w(kCinema);
  auto a = w.honest();
  w.now += kDefaultChallengeTtl + Seconds{1};
  a.presentation.timestamp = w.now;
  w.resign(a);
  CHECK(w.submit(a) == Errc::unknown_session);
  CHECK(w.sp->pending_count() == 1);
  CHECK(w.sp->expire_challenges(w.now) == 1);
  CHECK(w.sp->pending_count() == 0);
}

TEST_CASE("concurrent submissions of one session succeed exactly once") {
  World w(kCinema);
  for (int round = 0; round < 20; ++round) {
    const auto a = w.honest();
    std::atomic<int> ok{0}, consumed{0}, other{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
      threads.emplace_back([&] {
        switch (w.submit(a)) {
          case Errc::internal: ++ok; break;
          case Errc::session_consumed: ++consumed; break;
          default: ++other; break;
        }
      });
    }
    for (auto& t : threads) t.join();
    CHECK(ok == 1);
    CHECK(consumed == 7);
    CHECK(other == 0);
  }
}

TEST_CASE("verification costs one IdP exponentiation regardless of disclosure size") {
  idp::RawAttributes attrs;
  for (int i = 0; i < 50; ++i) attrs.push_back({"attr_" + std::to_string(i), "value-" + std::to_string(i)});
  for (int k : {1, 5, 20, 50}) {
    std::vector<Predicate> required;
    for (int i = 0; i < k; ++i) required.push_back(Predicate::reveal("attr_" + std::to_string(i)));
    World w(required, attrs);
    const auto a = w.honest();
    crypto::ExponentiationProbe probe;
    const auto token = w.sp->verify_presentation(a.presentation, a.nonce, w.now);
    CHECK(token.granted_keys.size() == static_cast<std::size_t>(k));
    CHECK(probe.count_for(w.issuer->verification_key()) == 1);
    CHECK(probe.count_for(w.user().verification_key) == 1);
    CHECK(probe.total() == 2);
  }
}

TEST_CASE("policy validation") {
  ServicePolicy p;
  p.service_name = "x";
  p.idp_vk = test::key(1024, 0).verification_key;
  auto code = [&] {
    try {
      p.validate();
      return Errc::internal;
    } catch (const Error& e) {
      return e.code();
    }
  };
  CHECK(code() == Errc::invalid_predicate);
  p.required = {Predicate::reveal("country")};
  CHECK(code() == Errc::internal);
  p.required = {Predicate{inference::PredicateKind::age_over, "date_of_birth", "0"}};
  CHECK(code() == Errc::invalid_predicate);
  p.required = {Predicate::reveal("country")};
  p.token_ttl = Seconds{0};
  CHECK(code() == Errc::invalid_predicate);
  p.token_ttl = kDefaultTokenTtl;
  p.clock_skew = Seconds{-1};
  CHECK(code() == Errc::invalid_predicate);
  p.clock_skew = kDefaultClockSkew;
  p.idp_vk = {};
  CHECK(code() == Errc::invalid_predicate);
}
