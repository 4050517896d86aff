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

#include <sys/stat.h>

#include <fstream>

#include "prima/agent.hpp"
#include "prima/error.hpp"
#include "prima/messages.hpp"
#include "prima/services.hpp"
#include "support.hpp"

using namespace prima;
using namespace prima::agent;
using inference::Predicate;

namespace {

const idp::RawAttributes kAlice{{"date_of_birth", "1990-04-12"}, {"country", "DE"}, {"name", "Alice"}};
const std::vector<Predicate> kCinema{Predicate::age_over(16), Predicate::reveal("country")};

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::internal;
}

std::size_t count_path(const std::vector<wire::CaptureRecord>& log, std::string_view path) {
  return static_cast<std::size_t>(
      std::count_if(log.begin(), log.end(), [&](const wire::CaptureRecord& r) { return r.path == path; }));
}

std::size_t count_endpoint(const std::vector<wire::CaptureRecord>& log, const std::string& endpoint) {
  return static_cast<std::size_t>(
      std::count_if(log.begin(), log.end(), [&](const wire::CaptureRecord& r) { return r.endpoint == endpoint; }));
}

/// Forwards to a real IdP but corrupts one attribute signature in every
/// registration response.
class CorruptingIdp final : public wire::Handler {
 public:
  explicit CorruptingIdp(std::shared_ptr<wire::Handler> inner) : inner_(std::move(inner)) {}
  wire::Reply handle(wire::Method method, std::string_view path, std::string_view body) override {
    auto reply = inner_->handle(method, path, body);
    if (path != services::paths::kRegister || reply.status != 200) return reply;
    auto resp = wire::open<wire::RegisterResponse>(wire::decode(reply.body));
    resp.credential.signatures.back().value += 1;
    reply.body = wire::encode(wire::make_envelope(resp));
    return reply;
  }

 private:
  std::shared_ptr<wire::Handler> inner_;
};

}  // namespace

TEST_CASE("wallet files round-trip, are owner-only and detect corruption") {
  test::TempDir dir;
  const auto path = dir.path / "wallet.bin";
  auto w = Wallet::from_keypair(test::key(1024, 1), path);
  w.save();
  struct stat st {};
  REQUIRE(::stat(path.c_str(), &st) == 0);
  CHECK((st.st_mode & 0777) == 0600);
  CHECK(Wallet::load(path) == w);

  test::Stack s(kCinema, false, 1024);
  Wallet populated = Wallet::from_keypair(test::key(1024, 1), path);
  Agent a(populated, *s.transport, s.clock());
  (void)a.enroll(s.idp_url, kAlice, Seconds{86400});
  (void)a.login(s.sp_url, test::consent_for({"age_over:16", "country"}));
  REQUIRE(populated.derived().size() == 1);
  const auto loaded = Wallet::load(path);
  CHECK(loaded == populated);
  CHECK(loaded.serialize() == populated.serialize());

  auto bytes = populated.serialize();
  for (std::size_t i : {std::size_t{0}, std::size_t{9}, bytes.size() / 2, bytes.size() - 1}) {
    auto bad = bytes;
    bad[i] ^= 0x01;
    CHECK(code_of([&] { (void)Wallet::parse(bad); }) == Errc::wallet_corrupt);
  }
  CHECK(code_of([&] { (void)Wallet::parse(Bytes(bytes.begin(), bytes.begin() + 20)); }) == Errc::wallet_corrupt);
  CHECK(code_of([&] { (void)Wallet::load(dir.path / "absent.bin"); }) == Errc::io_error);
}

TEST_CASE("wallet lock is exclusive") {
  test::TempDir dir;
  const auto path = dir.path / "wallet.bin";
  {
    WalletLock first(path);
    CHECK(code_of([&] { WalletLock second(path); }) == Errc::wallet_locked);
  }
  CHECK_NOTHROW(WalletLock{path});
}

TEST_CASE("consent covers reveals by key and proofs by predicate") {
  const auto c = test::consent_for({"country", "age_over:18"});
  CHECK(c.allows(Predicate::reveal("country")));
  CHECK(c.allows(Predicate::age_over(18)));
  CHECK_FALSE(c.allows(Predicate::age_over(16)));
  CHECK_FALSE(c.allows(Predicate::reveal("name")));
}

TEST_CASE("enrollment stores a verified credential") {
  test::Stack s(kCinema);
  test::TempDir dir;
  auto w = Wallet::from_keypair(test::key(2048, 1), dir.path / "wallet.bin");
  Agent a(w, *s.transport, s.clock());
  const auto& held = a.enroll(s.idp_url, kAlice, Seconds{86400});
  CHECK(held.credential.size() == 3);
  CHECK(held.idp_vk() == s.idp->verification_key());
  CHECK(held.idp_endpoint == s.idp_url);
  for (std::size_t i = 0; i < held.credential.size(); ++i) {
    CHECK(test::oracle::verify(held.idp_vk(), held.credential.attributes()[i], w.user_vk(), held.credential.t_exp(),
                               held.credential.signatures()[i]));
  }
  CHECK(Wallet::load(dir.path / "wallet.bin").credentials().size() == 1);

  CHECK(code_of([&] { (void)a.enroll(s.idp_url, kAlice, Seconds{86400}); }) == Errc::already_enrolled);
  const auto& again = a.enroll(s.idp_url, {{"country", "FR"}}, Seconds{86400}, true);
  CHECK(again.credential.size() == 1);
  CHECK(w.credentials().size() == 1);
}

TEST_CASE("a credential with a bad signature is rejected and nothing is stored") {
  test::Stack s(kCinema);
  const auto evil = s.loop->bind("evil-idp", std::make_shared<CorruptingIdp>(services::make_idp_service(s.idp)));
  test::TempDir dir;
  const auto path = dir.path / "wallet.bin";
  auto w = Wallet::from_keypair(test::key(2048, 1), path);
  Agent a(w, *s.transport, s.clock());
  CHECK(code_of([&] { (void)a.enroll(evil, kAlice, Seconds{86400}); }) == Errc::credential_rejected);
  CHECK(w.credentials().empty());
  CHECK_FALSE(std::filesystem::exists(path));
}

TEST_CASE("consent refusal sends nothing beyond the access request") {
  test::Stack s(kCinema);
  s.enroll(kAlice);
  s.capture->clear();
  try {
    (void)s.user().login(s.sp_url, test::consent_for({"country"}));
    FAIL("login succeeded without consent");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::consent_denied);
    CHECK(e.detail() == "age_over:16");
  }
  const auto log = s.capture->snapshot();
  REQUIRE(log.size() == 1);
  CHECK(log[0].path == services::paths::kRequestAccess);
}

TEST_CASE("login without enrollment reports not_enrolled") {
  test::Stack s(kCinema);
  CHECK(code_of([&] { (void)s.user().login(s.sp_url, test::consent_for({"country", "age_over:16"})); }) ==
        Errc::not_enrolled);
}

TEST_CASE("the prompt sees the challenge") {
  test::Stack s(kCinema);
  s.enroll(kAlice);
  std::vector<Predicate> seen;
  const auto token = s.user().login(s.sp_url, [&](const sp::Challenge& ch) {
    seen = ch.required;
    CHECK(ch.service_name == "test-service-sentinel-0001");
    CHECK(ch.idp_key_id == s.idp->verification_key().fingerprint());
    return test::consent_for({"age_over:16", "country"});
  });
  CHECK(seen == kCinema);
  CHECK(token.granted_keys.size() == 2);
}

namespace {

void cinema_flow(bool http) {
  test::Stack s(kCinema, http);
  s.enroll(kAlice);
  s.capture->clear();
  const auto token = s.user().login(s.sp_url, test::consent_for({"age_over:16", "country"}));
  CHECK(token.granted_keys == std::vector<std::string>{"country", "proof:age_over:16"});
  const auto log = s.capture->snapshot();
  CHECK(count_path(log, services::paths::kSignNonce) == 1);
  CHECK(count_path(log, services::paths::kInfer) == 1);
  CHECK(count_endpoint(log, s.sp_url) == 2);
  for (const auto& r : log) {
    if (r.endpoint != s.sp_url) continue;
    CHECK(r.request.find("1990-04-12") == std::string::npos);
    CHECK(r.request.find("Alice") == std::string::npos);
  }
  CHECK(s.sp->export_state().find("1990") == std::string::npos);

  s.capture->clear();
  (void)s.user().login(s.sp_url, test::consent_for({"age_over:16", "country"}));
  auto again = s.capture->snapshot();
  CHECK(count_path(again, services::paths::kInfer) == 0);
  CHECK(count_path(again, services::paths::kSignNonce) == 1);

  s.capture->clear();
  (void)s.user().login(s.sp_url, test::consent_for({"age_over:16", "country"}), LoginOptions{true, {}});
  again = s.capture->snapshot();
  CHECK(count_path(again, services::paths::kInfer) == 1);
}

void bank_flow(bool http) {
  test::Stack s({Predicate::reveal("name"), Predicate::reveal("country")}, http);
  s.enroll(kAlice);
  s.capture->clear();
  const auto token = s.user().login(s.sp_url, test::consent_for({"name", "country"}));
  CHECK(token.granted_keys == std::vector<std::string>{"country", "name"});
  const auto log = s.capture->snapshot();
  CHECK(count_path(log, services::paths::kInfer) == 0);
  CHECK(count_path(log, services::paths::kSignNonce) == 1);
  for (const auto& r : log) CHECK(r.request.find("1990-04-12") == std::string::npos);
}

}  // namespace

TEST_CASE("cinema login over loopback") { cinema_flow(false); }
TEST_CASE("cinema login over HTTP") { cinema_flow(true); }
TEST_CASE("bank login over loopback") { bank_flow(false); }
TEST_CASE("bank login over HTTP") { bank_flow(true); }

TEST_CASE("cached statements expire with the credential binding") {
  test::Stack s(kCinema);
  s.enroll(kAlice, Seconds{3 * 86400});
  (void)s.user().login(s.sp_url, test::consent_for({"age_over:16", "country"}));
  CHECK(s.wallet->derived().size() == 1);
  s.user().enroll(s.idp_url, kAlice, Seconds{10 * 86400}, true);
  CHECK(s.wallet->derived().empty());
  s.capture->clear();
  (void)s.user().login(s.sp_url, test::consent_for({"age_over:16", "country"}));
  CHECK(count_path(s.capture->snapshot(), services::paths::kInfer) == 1);
}

TEST_CASE("prepared logins can be submitted once") {
  test::Stack s(kCinema);
  s.enroll(kAlice);
  const auto prepared = s.user().prepare(
      s.sp_url, [](const sp::Challenge&) { return test::consent_for({"age_over:16", "country"}); });
  CHECK_NOTHROW(s.user().submit(s.sp_url, prepared.request));
  CHECK(code_of([&] { (void)s.user().submit(s.sp_url, prepared.request); }) == Errc::session_consumed);

  const auto skewed = s.user().prepare(
      s.sp_url, [](const sp::Challenge&) { return test::consent_for({"age_over:16", "country"}); },
      LoginOptions{false, Seconds{-600}});
  CHECK(code_of([&] { (void)s.user().submit(s.sp_url, skewed.request); }) == Errc::stale_timestamp);
}
