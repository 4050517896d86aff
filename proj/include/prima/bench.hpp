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

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace prima::bench {

struct BenchResult {
  std::string experiment;  // certify | pack | verify | requests
  unsigned key_bits = 0;
  std::size_t attribute_count = 0;
  std::size_t request_count = 0;
  double mean_ms = 0;
  double p50_ms = 0;
  double p99_ms = 0;
  double throughput_per_s = 0;
  std::string host_descriptor;

  bool operator==(const BenchResult&) const = default;
};

struct BenchConfig {
  std::size_t warmup = 30;
  std::size_t iterations = 100;
  /// Worker threads for bench_requests; 1 is the single-threaded default.
  unsigned parallel = 1;
  /// Progress lines go here when set.
  std::ostream* progress = nullptr;
};

/// OS, CPU model, hardware threads and compiler, on one line.
std::string host_descriptor();

std::vector<std::size_t> default_attribute_counts();  // 1..50
std::vector<std::size_t> default_request_counts();    // 2000..20000 step 2000

/// Time to sign `n` attributes the way registration does, per n.
std::vector<BenchResult> bench_certify(unsigned key_bits, const std::vector<std::size_t>& attr_counts,
                                       const BenchConfig& config = {});
/// Time to multiply n signatures into one packed value.
std::vector<BenchResult> bench_pack(unsigned key_bits, const std::vector<std::size_t>& attr_counts,
                                    const BenchConfig& config = {});
/// Time for one batch verification of n attributes.
std::vector<BenchResult> bench_verify(unsigned key_bits, const std::vector<std::size_t>& attr_counts,
                                      const BenchConfig& config = {});
/// Full SP verification of pre-built presentations. One pool of
/// max(request_counts) presentations is processed once; each row reports
/// the cumulative elapsed time when that many requests had completed.
std::vector<BenchResult> bench_requests(unsigned key_bits, const std::vector<std::size_t>& request_counts,
                                        std::size_t attrs_per_request = 20, const BenchConfig& config = {});

void write_csv(std::ostream& out, std::span<const BenchResult> results);
/// Throws Error(parse_error) on a header or row that does not match.
std::vector<BenchResult> read_csv(std::istream& in);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};

/// Ordinary least squares. r_squared is 1 when y has no variance.
LinearFit fit_linear(std::span<const double> x, std::span<const double> y);

/// Published figure for an experiment at a key size: ms per attribute for
/// certify, ms at 50 attributes for pack and verify, requests per second
/// for requests.
std::optional<double> reference_value(const std::string& experiment, unsigned key_bits);

/// Measured value comparable to reference_value(), from one experiment's
/// rows at one key size.
double comparable_value(std::span<const BenchResult> rows);

/// Rows of one experiment at one key size, as fitted by the report.
struct SeriesSummary {
  std::string experiment;
  unsigned key_bits = 0;
  LinearFit fit;
  double measured = 0;
  std::optional<double> reference;
};

std::vector<SeriesSummary> summarize(std::span<const BenchResult> results);
void print_report(std::ostream& out, std::span<const BenchResult> results);

}  // namespace prima::bench
