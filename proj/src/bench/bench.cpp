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

#include "prima/bench.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "prima/credential.hpp"
#include "prima/crypto.hpp"
#include "prima/error.hpp"
#include "prima/idp.hpp"
#include "prima/sp.hpp"

namespace prima::bench {
namespace {

using SteadyClock = std::chrono::steady_clock;

constexpr const char* kColumns[] = {"experiment", "key_bits",  "attribute_count", "request_count",   "mean_ms",
                                    "p50_ms",     "p99_ms",    "throughput_per_s", "host_descriptor"};
// Operations cheaper than this are repeated inside one sample so that the
// timer resolution does not dominate.
constexpr double kMinSampleMs = 0.2;
// Fixed instant for the request experiment, so presentations never go stale
// however long pool generation takes.
constexpr Timestamp kBenchEpoch{Seconds{1'800'000'000}};

double elapsed_ms(SteadyClock::time_point since) {
  return std::chrono::duration<double, std::milli>(SteadyClock::now() - since).count();
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

using Op = std::function<void()>;

std::size_t reps_for(const Op& op, const BenchConfig& config) {
  std::vector<double> warm;
  for (std::size_t i = 0; i < std::max<std::size_t>(config.warmup, 1); ++i) {
    const auto t0 = SteadyClock::now();
    op();
    warm.push_back(elapsed_ms(t0));
  }
  const double typical = std::max(percentile(warm, 0.5), 1e-6);
  return static_cast<std::size_t>(std::max(1.0, std::ceil(kMinSampleMs / typical)));
}

// One sample per op per round, visiting the ops in a fresh random order each
// round. Host speed drifts over the run; sweeping the counts one after another
// would tie that drift to the attribute count.
std::vector<std::vector<double>> measure_interleaved(const std::vector<Op>& ops, const BenchConfig& config) {
  std::vector<std::size_t> reps;
  reps.reserve(ops.size());
  for (const auto& op : ops) reps.push_back(reps_for(op, config));

  std::vector<std::vector<double>> samples(ops.size());
  for (auto& s : samples) s.reserve(config.iterations);
  std::vector<std::size_t> order(ops.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(std::random_device{}());
  for (std::size_t round = 0; round < config.iterations; ++round) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto j : order) {
      const auto t0 = SteadyClock::now();
      for (std::size_t r = 0; r < reps[j]; ++r) ops[j]();
      samples[j].push_back(elapsed_ms(t0) / static_cast<double>(reps[j]));
    }
  }
  return samples;
}

BenchResult make_row(const char* experiment, unsigned bits, std::size_t attrs, const std::vector<double>& samples) {
  BenchResult r;
  r.experiment = experiment;
  r.key_bits = bits;
  r.attribute_count = attrs;
  r.request_count = 0;
  r.mean_ms = mean(samples);
  r.p50_ms = percentile(samples, 0.50);
  r.p99_ms = percentile(samples, 0.99);
  r.throughput_per_s = r.mean_ms > 0 ? 1000.0 / r.mean_ms : 0;
  r.host_descriptor = host_descriptor();
  return r;
}

void note(const BenchConfig& config, const BenchResult& r) {
  if (config.progress == nullptr) return;
  *config.progress << r.experiment << " " << r.key_bits << "-bit n=" << r.attribute_count;
  if (r.request_count != 0) *config.progress << " requests=" << r.request_count;
  *config.progress << " mean=" << r.mean_ms << " ms" << std::endl;
}

std::vector<BenchResult> rows(const char* experiment, unsigned bits, const std::vector<std::size_t>& counts,
                              const std::vector<std::vector<double>>& samples, const BenchConfig& config) {
  std::vector<BenchResult> out;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    out.push_back(make_row(experiment, bits, counts[j], samples[j]));
    note(config, out.back());
  }
  return out;
}

std::vector<Attribute> sample_attributes(std::size_t n) {
  std::vector<Attribute> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    char key[32];
    std::snprintf(key, sizeof key, "attr_%02zu", i);
    out.push_back(Attribute{key, hex_encode(random_array<8>())});
  }
  return out;
}

std::size_t max_count(const std::vector<std::size_t>& counts) {
  return counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
}

// Keeps results observable so the optimizer cannot drop the measured work.
std::atomic<std::size_t> g_sink{0};

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

[[noreturn]] void csv_error(const std::string& detail) { throw Error(Errc::parse_error, "csv: " + detail); }

// Splits RFC 4180 records; quoted fields may contain separators and newlines.
std::vector<std::vector<std::string>> csv_records(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && in.peek() == '\n') in.get(c);
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) csv_error("unterminated quote");
  if (any) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

template <class T>
T parse_number(const std::string& s) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) csv_error("bad number '" + s + "'");
  return v;
}

}  // namespace

std::string host_descriptor() {
  static const std::string descriptor = [] {
    std::ostringstream out;
    utsname u{};
    if (::uname(&u) == 0) out << u.sysname << " " << u.release << " " << u.machine;
    std::ifstream cpuinfo("/proc/cpuinfo");
    for (std::string line; std::getline(cpuinfo, line);) {
      if (line.rfind("model name", 0) == 0) {
        auto pos = line.find(':');
        if (pos != std::string::npos) out << " | " << line.substr(line.find_first_not_of(' ', pos + 1));
        break;
      }
    }
    out << " | " << std::thread::hardware_concurrency() << " threads";
#if defined(__clang__)
    out << " | clang " << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
    out << " | gcc " << __GNUC__ << "." << __GNUC_MINOR__;
#endif
    return out.str();
  }();
  return descriptor;
}

std::vector<std::size_t> default_attribute_counts() {
  std::vector<std::size_t> v(50);
  std::iota(v.begin(), v.end(), 1);
  return v;
}

std::vector<std::size_t> default_request_counts() {
  std::vector<std::size_t> v;
  for (std::size_t n = 2000; n <= 20000; n += 2000) v.push_back(n);
  return v;
}

std::vector<BenchResult> bench_certify(unsigned key_bits, const std::vector<std::size_t>& attr_counts,
                                       const BenchConfig& config) {
  const auto issuer = crypto::keygen(key_bits);
  const auto user = crypto::keygen(key_bits);
  const auto attrs = sample_attributes(max_count(attr_counts));
  const Timestamp t_exp = kBenchEpoch + Seconds{86400};

  std::vector<Op> ops;
  for (auto n : attr_counts) {
    ops.push_back([&, n] {
      for (std::size_t i = 0; i < n; ++i) {
        auto s = crypto::sign_attribute(issuer.signing_key, attrs[i], user.verification_key, t_exp);
        g_sink += mpz_size(s.value.get_mpz_t());
      }
    });
  }
  return rows("certify", key_bits, attr_counts, measure_interleaved(ops, config), config);
}

std::vector<BenchResult> bench_pack(unsigned key_bits, const std::vector<std::size_t>& attr_counts,
                                    const BenchConfig& config) {
  const auto issuer = crypto::keygen(key_bits);
  const auto user = crypto::keygen(key_bits);
  const auto attrs = sample_attributes(max_count(attr_counts));
  const Timestamp t_exp = kBenchEpoch + Seconds{86400};
  std::vector<crypto::Signature> sigs;
  for (const auto& a : attrs) sigs.push_back(crypto::sign_attribute(issuer.signing_key, a, user.verification_key, t_exp));

  std::vector<Op> ops;
  for (auto n : attr_counts) {
    const std::span<const crypto::Signature> subset(sigs.data(), n);
    ops.push_back([&, subset] {
      auto packed = crypto::pack(subset, issuer.verification_key.modulus());
      g_sink += mpz_size(packed.value.get_mpz_t());
    });
  }
  return rows("pack", key_bits, attr_counts, measure_interleaved(ops, config), config);
}

std::vector<BenchResult> bench_verify(unsigned key_bits, const std::vector<std::size_t>& attr_counts,
                                      const BenchConfig& config) {
  const auto issuer = crypto::keygen(key_bits);
  const auto user = crypto::keygen(key_bits);
  const auto attrs = sample_attributes(max_count(attr_counts));
  const Timestamp t_exp = kBenchEpoch + Seconds{86400};
  std::vector<crypto::Signature> sigs;
  std::vector<crypto::BoundAttribute> bound;
  for (const auto& a : attrs) {
    sigs.push_back(crypto::sign_attribute(issuer.signing_key, a, user.verification_key, t_exp));
    bound.push_back(crypto::BoundAttribute{a, user.verification_key, t_exp});
  }

  std::vector<Op> ops;
  for (auto n : attr_counts) {
    auto packed = crypto::pack(std::span<const crypto::Signature>(sigs.data(), n), issuer.verification_key.modulus());
    const std::span<const crypto::BoundAttribute> subset(bound.data(), n);
    ops.push_back([&, subset, packed = std::move(packed)] {
      if (!crypto::batch_verify(issuer.verification_key, subset, packed)) {
        throw Error(Errc::internal, "benchmark fixture failed to verify");
      }
    });
  }
  return rows("verify", key_bits, attr_counts, measure_interleaved(ops, config), config);
}

std::vector<BenchResult> bench_requests(unsigned key_bits, const std::vector<std::size_t>& request_counts,
                                        std::size_t attrs_per_request, const BenchConfig& config) {
  auto counts = request_counts;
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
  if (counts.empty()) return {};

  auto issuer = crypto::keygen(key_bits);
  const auto user = crypto::keygen(key_bits);
  const Clock fixed = [] { return kBenchEpoch; };

  idp::IdpOptions idp_options;
  idp_options.clock = fixed;
  idp::IdentityProvider idp(issuer, idp_options);

  idp::RawAttributes raw;
  sp::ServicePolicy policy;
  policy.service_name = "bench";
  policy.idp_vk = issuer.verification_key;
  std::set<std::string> keys;
  for (const auto& a : sample_attributes(attrs_per_request)) {
    raw.emplace_back(a.key, a.value);
    policy.required.push_back(inference::Predicate::reveal(a.key));
    keys.insert(a.key);
  }
  const auto credential = idp.register_user(raw, user.verification_key, Seconds{365 * 86400});
  const auto disclosure = select_disclosure(credential, keys);
  sp::ServiceProvider provider(policy, fixed);

  struct Request {
    Presentation presentation;
    sp::Nonce nonce;
  };
  const std::size_t warm = config.warmup;
  const std::size_t total = warm + counts.back();
  std::vector<Request> pool(total);

  // Pool generation is not measured: one challenge, one nonce signature and
  // one user signature per request.
  {
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        for (std::size_t i = next++; i < total; i = next++) {
          auto challenge = provider.create_challenge(user.verification_key);
          auto& p = pool[i].presentation;
          p.disclosed = disclosure.attributes;
          p.packed = disclosure.packed;
          p.user_vk = user.verification_key;
          p.t_exp = credential.t_exp();
          p.timestamp = kBenchEpoch;
          p.session_id = challenge.session_id;
          p.signed_nonce = crypto::sign_message(issuer.signing_key, nonce_payload(user.verification_key, challenge.nonce));
          p.user_signature = crypto::sign_bytes(user.signing_key, presentation_body(p, challenge.nonce));
          pool[i].nonce = challenge.nonce;
        }
      });
    }
    for (auto& t : threads) t.join();
  }
  if (config.progress) *config.progress << "requests " << key_bits << "-bit: pool of " << total << " ready" << std::endl;

  for (std::size_t i = 0; i < warm; ++i) provider.verify_presentation(pool[i].presentation, pool[i].nonce, kBenchEpoch);

  const std::size_t measured = counts.back();
  std::vector<double> latency(measured, 0);
  std::map<std::size_t, double> checkpoint_ms;
  for (auto c : counts) checkpoint_ms[c] = 0;
  std::atomic<std::size_t> next{0}, done{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto start = SteadyClock::now();
  auto worker = [&] {
    try {
      for (std::size_t i = next++; i < measured; i = next++) {
        const auto t0 = SteadyClock::now();
        const auto& r = pool[warm + i];
        provider.verify_presentation(r.presentation, r.nonce, kBenchEpoch);
        latency[i] = elapsed_ms(t0);
        const auto k = ++done;
        if (auto it = checkpoint_ms.find(k); it != checkpoint_ms.end()) it->second = elapsed_ms(start);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = measured;
    }
  };
  const unsigned parallel = std::max(1u, config.parallel);
  if (parallel == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < parallel; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<BenchResult> out;
  for (auto c : counts) {
    std::vector<double> first(latency.begin(), latency.begin() + static_cast<std::ptrdiff_t>(c));
    BenchResult r;
    r.experiment = "requests";
    r.key_bits = key_bits;
    r.attribute_count = attrs_per_request;
    r.request_count = c;
    const double total_ms = checkpoint_ms[c];
    r.mean_ms = total_ms / static_cast<double>(c);
    r.p50_ms = percentile(first, 0.50);
    r.p99_ms = percentile(first, 0.99);
    r.throughput_per_s = static_cast<double>(c) / (total_ms / 1000.0);
    r.host_descriptor = host_descriptor();
    out.push_back(std::move(r));
    note(config, out.back());
  }
  return out;
}

void write_csv(std::ostream& out, std::span<const BenchResult> results) {
  for (std::size_t i = 0; i < std::size(kColumns); ++i) out << (i ? "," : "") << kColumns[i];
  out << "\n";
  for (const auto& r : results) {
    out << csv_field(r.experiment) << "," << r.key_bits << "," << r.attribute_count << "," << r.request_count << ","
        << format_double(r.mean_ms) << "," << format_double(r.p50_ms) << "," << format_double(r.p99_ms) << ","
        << format_double(r.throughput_per_s) << "," << csv_field(r.host_descriptor) << "\n";
  }
}

std::vector<BenchResult> read_csv(std::istream& in) {
  auto records = csv_records(in);
  if (records.empty()) csv_error("missing header");
  const std::vector<std::string> header(std::begin(kColumns), std::end(kColumns));
  if (records.front() != header) csv_error("unexpected header");

  std::vector<BenchResult> out;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != header.size()) csv_error("row " + std::to_string(i) + " has " + std::to_string(f.size()) + " fields");
    BenchResult r;
    r.experiment = f[0];
    r.key_bits = parse_number<unsigned>(f[1]);
    r.attribute_count = parse_number<std::size_t>(f[2]);
    r.request_count = parse_number<std::size_t>(f[3]);
    r.mean_ms = parse_number<double>(f[4]);
    r.p50_ms = parse_number<double>(f[5]);
    r.p99_ms = parse_number<double>(f[6]);
    r.throughput_per_s = parse_number<double>(f[7]);
    r.host_descriptor = f[8];
    out.push_back(std::move(r));
  }
  return out;
}

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
  LinearFit fit;
  const auto n = std::min(x.size(), y.size());
  if (n == 0) return fit;
  const double mx = std::accumulate(x.begin(), x.begin() + n, 0.0) / n;
  const double my = std::accumulate(y.begin(), y.begin() + n, 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  fit.slope = sxx > 0 ? sxy / sxx : 0;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0 ? (sxx > 0 ? (sxy * sxy) / (sxx * syy) : 0) : 1;
  return fit;
}

std::optional<double> reference_value(const std::string& experiment, unsigned key_bits) {
  static const std::map<std::pair<std::string, unsigned>, double> table = {
      {{"certify", 1024}, 2.64}, {{"certify", 2048}, 18.92}, {{"pack", 1024}, 0.19},     {{"pack", 2048}, 0.62},
      {{"verify", 1024}, 0.67},  {{"verify", 2048}, 1.53},   {{"requests", 1024}, 3332}, {{"requests", 2048}, 1426},
  };
  auto it = table.find({experiment, key_bits});
  if (it == table.end()) return std::nullopt;
  return it->second;
}

double comparable_value(std::span<const BenchResult> rows) {
  if (rows.empty()) return 0;
  const auto& kind = rows.front().experiment;
  if (kind == "requests") {
    return std::max_element(rows.begin(), rows.end(),
                            [](const auto& a, const auto& b) { return a.request_count < b.request_count; })
        ->throughput_per_s;
  }
  const auto& largest = *std::max_element(
      rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.attribute_count < b.attribute_count; });
  if (kind == "certify") return largest.mean_ms / static_cast<double>(largest.attribute_count);
  auto at50 = std::find_if(rows.begin(), rows.end(), [](const auto& r) { return r.attribute_count == 50; });
  return at50 != rows.end() ? at50->mean_ms : largest.mean_ms;
}

std::vector<SeriesSummary> summarize(std::span<const BenchResult> results) {
  std::vector<std::pair<std::string, unsigned>> order;
  std::map<std::pair<std::string, unsigned>, std::vector<BenchResult>> groups;
  for (const auto& r : results) {
    auto key = std::make_pair(r.experiment, r.key_bits);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(r);
  }
  std::vector<SeriesSummary> out;
  for (const auto& key : order) {
    const auto& rows = groups[key];
    std::vector<double> x, y;
    for (const auto& r : rows) {
      if (r.experiment == "requests") {
        x.push_back(static_cast<double>(r.request_count));
        y.push_back(r.mean_ms * static_cast<double>(r.request_count));
      } else {
        x.push_back(static_cast<double>(r.attribute_count));
        y.push_back(r.mean_ms);
      }
    }
    SeriesSummary s;
    s.experiment = key.first;
    s.key_bits = key.second;
    s.fit = fit_linear(x, y);
    s.measured = comparable_value(rows);
    s.reference = reference_value(key.first, key.second);
    out.push_back(std::move(s));
  }
  return out;
}

void print_report(std::ostream& out, std::span<const BenchResult> results) {
  if (results.empty()) {
    out << "no results\n";
    return;
  }
  out << "host: " << results.front().host_descriptor << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-9s %5s %9s %14s %14s  %s\n", "experiment", "bits", "R^2", "measured",
                "reference", "unit");
  out << line;
  for (const auto& s : summarize(results)) {
    const char* unit = s.experiment == "certify"    ? "ms per attribute"
                       : s.experiment == "requests" ? "requests/s"
                                                    : "ms at 50 attributes";
    char ref[32] = "-";
    if (s.reference) std::snprintf(ref, sizeof ref, "%.2f", *s.reference);
    std::snprintf(line, sizeof line, "%-9s %5u %9.4f %14.3f %14s  %s\n", s.experiment.c_str(), s.key_bits,
                  s.fit.r_squared, s.measured, ref, unit);
    out << line;
  }
  out << "reference figures come from a different machine; compare orderings and slopes, not absolutes\n";
}

}  // namespace prima::bench
