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

// Command-line front end: wallet, enrollment, login, servers, benchmarks and
// scenario runs.

#include <pthread.h>
#include <signal.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "prima/agent.hpp"
#include "prima/bench.hpp"
#include "prima/config.hpp"
#include "prima/error.hpp"
#include "prima/messages.hpp"
#include "prima/scenarios.hpp"
#include "prima/services.hpp"
#include "prima/transport.hpp"

namespace {

using namespace prima;
using wire::Json;

std::filesystem::path default_wallet_path() {
  if (const char* p = std::getenv("PRIMA_WALLET"); p != nullptr && *p != '\0') return p;
  const char* home = std::getenv("HOME");
  return std::filesystem::path(home != nullptr ? home : ".") / ".prima" / "wallet.bin";
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    for (std::string part; std::getline(ss, part, ',');) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

std::pair<std::string, std::string> split_attr(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw Error(Errc::invalid_attribute_key, "expected key=value, got '" + kv + "'");
  return {kv.substr(0, eq), kv.substr(eq + 1)};
}

void print_json(const Json& j) { std::cout << j.dump(2) << std::endl; }

Json wallet_summary(const agent::Wallet& w) {
  Json creds = Json::array();
  for (const auto& c : w.credentials()) {
    Json keys = Json::array();
    for (const auto& a : c.credential.attributes()) keys.push_back(a.key);
    creds.push_back({{"idp_key_id", c.idp_key_id()},
                     {"idp_endpoint", c.idp_endpoint},
                     {"attributes", keys},
                     {"t_isu", format_rfc3339(c.credential.t_isu())},
                     {"t_exp", format_rfc3339(c.credential.t_exp())}});
  }
  Json derived = Json::array();
  for (const auto& s : w.derived()) {
    derived.push_back({{"idp_key_id", s.idp_key_id},
                       {"key", s.certified.statement.attribute.key},
                       {"t_exp", format_rfc3339(s.certified.t_exp)}});
  }
  return Json{{"wallet", w.path().string()},
              {"user_key_id", w.user_vk().fingerprint()},
              {"key_bits", w.keypair().modulus_bits},
              {"credentials", creds},
              {"derived", derived}};
}

// Asks per requested item on the terminal; anything but y/yes declines.
agent::Consent prompt_consent(const sp::Challenge& challenge) {
  agent::Consent consent;
  std::cerr << "Service '" << challenge.service_name << "' requests:\n";
  for (const auto& p : challenge.required) {
    std::cerr << "  disclose " << p.display_name() << "? [y/N] " << std::flush;
    std::string answer;
    if (!std::getline(std::cin, answer)) answer.clear();
    if (answer == "y" || answer == "Y" || answer == "yes") {
      if (p.kind == inference::PredicateKind::reveal) {
        consent.disclose.insert(p.key);
      } else {
        consent.proofs.push_back(p);
      }
    }
  }
  return consent;
}

void wait_for_signal(const sigset_t& set) {
  int sig = 0;
  sigwait(&set, &sig);
}

sigset_t block_termination_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

int run_bench(const std::string& experiment, const std::vector<unsigned>& bits_list, const std::string& out_path,
              const bench::BenchConfig& config, const std::vector<std::size_t>& counts, std::size_t attrs_per_request) {
  std::vector<bench::BenchResult> all;
  const std::vector<std::string> experiments =
      experiment == "all" ? std::vector<std::string>{"certify", "pack", "verify", "requests"}
                          : std::vector<std::string>{experiment};
  for (const auto& ex : experiments) {
    for (auto bits : bits_list) {
      std::vector<bench::BenchResult> rows;
      if (ex == "requests") {
        rows = bench::bench_requests(bits, counts.empty() ? bench::default_request_counts() : counts,
                                     attrs_per_request, config);
      } else {
        const auto& attr_counts = counts.empty() ? bench::default_attribute_counts() : counts;
        rows = ex == "certify" ? bench::bench_certify(bits, attr_counts, config)
               : ex == "pack"  ? bench::bench_pack(bits, attr_counts, config)
                               : bench::bench_verify(bits, attr_counts, config);
      }
      all.insert(all.end(), rows.begin(), rows.end());
    }
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw Error(Errc::io_error, "cannot create " + out_path);
    bench::write_csv(out, all);
  }
  bench::print_report(std::cout, all);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prima: attribute credentials with selective disclosure"};
  app.require_subcommand(1);
  std::string wallet_path = default_wallet_path().string();
  app.add_option("--wallet", wallet_path, "Wallet file (env PRIMA_WALLET)");

  // wallet
  auto* wallet_cmd = app.add_subcommand("wallet", "Manage the local wallet");
  wallet_cmd->require_subcommand(1);
  auto* wallet_init = wallet_cmd->add_subcommand("init", "Create a wallet with a fresh key pair");
  unsigned init_bits = crypto::kDefaultModulusBits;
  bool init_force = false;
  wallet_init->add_option("--bits", init_bits, "Modulus size")->check(CLI::IsMember({1024, 2048, 3072, 4096}));
  wallet_init->add_flag("--force", init_force, "Overwrite an existing wallet");
  auto* wallet_show = wallet_cmd->add_subcommand("show", "Print the wallet contents");

  // enroll
  auto* enroll_cmd = app.add_subcommand("enroll", "Register attributes with an IdP");
  std::string enroll_idp;
  std::vector<std::string> enroll_attrs;
  int enroll_days = 365;
  bool enroll_replace = false;
  enroll_cmd->add_option("--idp", enroll_idp, "IdP endpoint URL")->required();
  enroll_cmd->add_option("--attr", enroll_attrs, "Attribute key=value (repeatable)")->required();
  enroll_cmd->add_option("--days", enroll_days, "Credential validity in days")->check(CLI::PositiveNumber);
  enroll_cmd->add_flag("--replace", enroll_replace, "Replace an existing credential from this IdP");

  // login
  auto* login_cmd = app.add_subcommand("login", "Authenticate to a service provider");
  std::string login_sp;
  std::vector<std::string> login_disclose, login_proofs;
  bool login_fresh = false;
  login_cmd->add_option("--sp", login_sp, "SP endpoint URL")->required();
  login_cmd->add_option("--disclose", login_disclose, "Attribute keys the SP may see (comma separated)");
  login_cmd->add_option("--consent-proof", login_proofs, "Predicate proofs allowed, e.g. age_over:16");
  login_cmd->add_flag("--fresh", login_fresh, "Ask the IdP again instead of using cached proofs");

  // idp / sp servers
  auto* idp_cmd = app.add_subcommand("idp", "Identity provider");
  idp_cmd->require_subcommand(1);
  auto* idp_serve = idp_cmd->add_subcommand("serve", "Serve the IdP endpoints over HTTP");
  std::string idp_config = "idp.json";
  idp_serve->add_option("--config", idp_config, "IdP config file");
  auto* sp_cmd = app.add_subcommand("sp", "Service provider");
  sp_cmd->require_subcommand(1);
  auto* sp_serve = sp_cmd->add_subcommand("serve", "Serve the SP endpoints over HTTP");
  std::string sp_config = "sp.json";
  sp_serve->add_option("--config", sp_config, "SP config file");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Run benchmarks and write CSV");
  bench_cmd->require_subcommand(1);
  std::vector<unsigned> bench_bits{1024, 2048};
  std::string bench_out;
  bench::BenchConfig bench_config;
  std::vector<std::size_t> bench_counts;
  std::size_t bench_attrs = 20;
  std::string bench_in;
  for (const char* name : {"certify", "pack", "verify", "requests", "all"}) {
    auto* sub = bench_cmd->add_subcommand(name, std::string("Benchmark: ") + name);
    sub->add_option("--bits", bench_bits, "Key sizes")->delimiter(',')->check(CLI::IsMember({1024, 2048, 3072, 4096}));
    sub->add_option("--out", bench_out, "CSV output file");
    sub->add_option("--parallel", bench_config.parallel, "Worker threads for requests")->check(CLI::PositiveNumber);
    sub->add_option("--warmup", bench_config.warmup, "Warmup iterations");
    sub->add_option("--iterations", bench_config.iterations, "Measured iterations")->check(CLI::PositiveNumber);
    sub->add_option("--counts", bench_counts, "Attribute or request counts")->delimiter(',');
    sub->add_option("--attrs-per-request", bench_attrs, "Attributes per request")->check(CLI::PositiveNumber);
  }
  auto* bench_report = bench_cmd->add_subcommand("report", "Summarize a CSV written earlier");
  bench_report->add_option("--in", bench_in, "CSV file")->required();

  // scenarios
  auto* scen_cmd = app.add_subcommand("scenarios", "End-to-end scenario scripts");
  scen_cmd->require_subcommand(1);
  auto* scen_run = scen_cmd->add_subcommand("run", "Run scenario scripts");
  bool scen_all = false;
  std::vector<std::string> scen_names;
  std::string scen_dir, scen_transport = "loopback";
  std::optional<unsigned> scen_bits;
  scen_run->add_flag("--all", scen_all, "Run every script in the directory");
  scen_run->add_option("names", scen_names, "Script names");
  scen_run->add_option("--dir", scen_dir, "Script directory (env PRIMA_SCENARIOS_DIR)");
  scen_run->add_option("--transport", scen_transport, "loopback, http or both")
      ->check(CLI::IsMember({"loopback", "http", "both"}));
  scen_run->add_option("--bits", scen_bits, "Override every actor's key size");

  CLI11_PARSE(app, argc, argv);

  try {
    if (wallet_init->parsed()) {
      if (std::filesystem::exists(wallet_path) && !init_force) {
        throw Error(Errc::already_enrolled, "wallet exists at " + wallet_path + " (use --force)");
      }
      if (auto parent = std::filesystem::path(wallet_path).parent_path(); !parent.empty()) {
        std::filesystem::create_directories(parent);
      }
      agent::WalletLock lock(wallet_path);
      auto w = agent::Wallet::create(wallet_path, init_bits);
      w.save();
      print_json(wallet_summary(w));
      return 0;
    }
    if (wallet_show->parsed()) {
      print_json(wallet_summary(agent::Wallet::load(wallet_path)));
      return 0;
    }
    if (enroll_cmd->parsed()) {
      agent::WalletLock lock(wallet_path);
      auto w = agent::Wallet::load(wallet_path);
      wire::HttpTransport transport;
      agent::Agent a(w, transport);
      idp::RawAttributes attrs;
      for (const auto& kv : enroll_attrs) attrs.push_back(split_attr(kv));
      const auto& held = a.enroll(enroll_idp, attrs, Seconds{std::int64_t{enroll_days} * 86400}, enroll_replace);
      Json keys = Json::array();
      for (const auto& attr : held.credential.attributes()) keys.push_back(attr.key);
      print_json({{"idp_key_id", held.idp_key_id()},
                  {"attributes", keys},
                  {"t_exp", format_rfc3339(held.credential.t_exp())}});
      return 0;
    }
    if (login_cmd->parsed()) {
      agent::WalletLock lock(wallet_path);
      auto w = agent::Wallet::load(wallet_path);
      wire::HttpTransport transport;
      agent::Agent a(w, transport);
      agent::LoginOptions opts;
      opts.fresh = login_fresh;
      sp::AccessToken token;
      if (login_disclose.empty() && login_proofs.empty()) {
        token = a.login(login_sp, agent::ConsentPrompt(prompt_consent), opts);
      } else {
        agent::Consent consent;
        for (const auto& k : split_list(login_disclose)) consent.disclose.insert(k);
        for (const auto& p : split_list(login_proofs)) consent.proofs.push_back(inference::parse_predicate(p));
        token = a.login(login_sp, consent, opts);
      }
      print_json(wire::MessageTraits<sp::AccessToken>::to_json(token));
      return 0;
    }
    if (idp_serve->parsed()) {
      const auto cfg = config::load_idp_config(idp_config);
      auto keys = config::load_or_create_keypair(cfg.key_file, cfg.key_bits);
      auto pub = cfg.key_file;
      pub += ".pub";
      config::save_public_key(keys.verification_key, pub);
      idp::IdpOptions options;
      options.journal_path = cfg.journal;
      options.nonce_rate_limit = cfg.nonce_rate_limit;
      const auto signals = block_termination_signals();
      auto provider = std::make_shared<idp::IdentityProvider>(std::move(keys), options);
      wire::HttpServer server(services::make_idp_service(provider), cfg.listen.host, cfg.listen.port);
      std::cout << Json{{"listening", server.endpoint()},
                        {"idp_key_id", provider->verification_key().fingerprint()},
                        {"public_key_file", pub.string()}}
                       .dump()
                << std::endl;
      wait_for_signal(signals);
      return 0;
    }
    if (sp_serve->parsed()) {
      const auto cfg = config::load_sp_config(sp_config);
      sp::ServicePolicy policy;
      policy.service_name = cfg.service_name;
      policy.required = cfg.required;
      policy.idp_vk = config::load_public_key(cfg.idp_public_key_file);
      policy.clock_skew = cfg.clock_skew;
      policy.challenge_ttl = cfg.challenge_ttl;
      policy.token_ttl = cfg.token_ttl;
      const auto signals = block_termination_signals();
      auto provider = std::make_shared<sp::ServiceProvider>(policy);
      wire::HttpServer server(services::make_sp_service(provider), cfg.listen.host, cfg.listen.port);
      std::cout << Json{{"listening", server.endpoint()}, {"service_name", policy.service_name}}.dump() << std::endl;
      wait_for_signal(signals);
      return 0;
    }
    if (bench_report->parsed()) {
      std::ifstream in(bench_in);
      if (!in) throw Error(Errc::io_error, "cannot open " + bench_in);
      bench::print_report(std::cout, bench::read_csv(in));
      return 0;
    }
    for (auto* sub : bench_cmd->get_subcommands()) {
      bench_config.progress = &std::cerr;
      return run_bench(sub->get_name(), bench_bits, bench_out, bench_config, bench_counts, bench_attrs);
    }
    if (scen_run->parsed()) {
      if (!scen_all && scen_names.empty()) throw Error(Errc::script_error, "name scripts or pass --all");
      const auto dir = scen_dir.empty() ? scenarios::default_scenario_dir() : std::filesystem::path(scen_dir);
      std::vector<scenarios::ScenarioScript> scripts;
      if (scen_all) {
        scripts = scenarios::load_directory(dir);
      } else {
        for (const auto& n : scen_names) scripts.push_back(scenarios::load_script(dir / (n + ".json")));
      }
      std::vector<scenarios::TransportKind> kinds;
      if (scen_transport != "http") kinds.push_back(scenarios::TransportKind::loopback);
      if (scen_transport != "loopback") kinds.push_back(scenarios::TransportKind::http);
      int failed = 0;
      for (auto kind : kinds) {
        for (const auto& s : scripts) {
          scenarios::RunOptions opts;
          opts.transport = kind;
          opts.key_bits = scen_bits;
          const auto r = scenarios::run_scenario(s, opts);
          std::printf("%s %-32s %-8s %-22s %6.2fs%s%s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                      std::string(to_string(kind)).c_str(), r.outcome.c_str(), r.seconds,
                      r.passed ? "" : "  ", r.failure.c_str());
          failed += r.passed ? 0 : 1;
        }
      }
      return failed == 0 ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << Json{{"error", {{"code", to_string(e.code())}, {"detail", e.detail()}}}}.dump() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", {{"code", "internal"}, {"detail", e.what()}}}}.dump() << std::endl;
    return 1;
  }
  return 0;
}
