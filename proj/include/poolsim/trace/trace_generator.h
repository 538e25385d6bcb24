// Copyright 2026 The poolsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "poolsim/trace/vm_request.h"

namespace poolsim::trace {

/// Piecewise-uniform distribution of full-pool slowdown. Bin i covers
/// [edges[i], edges[i+1]) and holds weights[i] of the probability mass.
struct SlowdownMixture {
  std::vector<double> edges;
  std::vector<double> weights;
};

struct TraceGenConfig {
  uint64_t n_vms = 10000;
  int n_clusters = 2;
  int servers_per_cluster = 64;
  int cores_per_server = 48;
  int dram_gb_per_server = 384;

  // Arrivals: Poisson with a sinusoidal daily modulation, rate chosen so the
  // expected share of allocated cores is `target_core_utilization`.
  double target_core_utilization = 0.75;
  double diurnal_amplitude = 0.25;
  double lifetime_median_s = 4 * 3600.0;
  double lifetime_sigma = 1.2;  // of log-lifetime
  int64_t min_lifetime_s = 60;

  std::vector<int> core_sizes = {1, 2, 4, 8, 16, 32};
  std::vector<double> core_weights = {0.20, 0.30, 0.25, 0.15, 0.07, 0.03};
  std::vector<int> gb_per_core = {2, 4, 8, 16};
  std::vector<double> gb_per_core_weights = {0.15, 0.35, 0.40, 0.10};

  // Reference placement written as server_hint. With this probability the
  // placer picks the fitting server with the fewest free cores, otherwise a
  // uniformly random fitting server.
  double best_fit_probability = 0.3;
  bool emit_server_hint = true;

  int n_customers = 100;
  double customer_zipf_exponent = 0.3;
  // Customer latents are stratified over runs of this many customers
  // (in popularity order) so heavy customers do not skew the marginals.
  int customer_strata = 10;

  // Untouched fraction: point mass at 0 plus a Beta body whose shape is
  // solved so the overall median equals `untouched_median`.
  double untouched_median = 0.50;
  double untouched_zero_mass = 0.07;
  double untouched_concentration = 4.0;  // alpha + beta of the body
  double untouched_customer_correlation = 0.9;

  std::map<std::string, SlowdownMixture, std::less<>> slowdown_mixtures = DefaultMixtures();
  double slowdown_customer_correlation = 0.5;

  // curve_exponent = min + (max - min) * Beta(a, b).
  double exponent_min = 0.5;
  double exponent_max = 2.0;
  double exponent_beta_a = 0.4;
  double exponent_beta_b = 2.0;

  uint64_t seed = 1;

  static std::map<std::string, SlowdownMixture, std::less<>> DefaultMixtures();
};

/// Throws ConfigError describing the first invalid field.
void ValidateConfig(const TraceGenConfig& cfg);

/// Deterministic in `cfg` (including the seed). VMs are sorted by arrival
/// and numbered 0..n-1 in that order.
Trace GenerateTrace(const TraceGenConfig& cfg);

/// Inverse CDF of a mixture at probability q in [0,1].
double MixtureQuantile(const SlowdownMixture& mixture, double q);

/// Solves the Beta body's alpha so that zero_mass + (1 - zero_mass) *
/// BetaCdf(median; alpha, concentration - alpha) = 0.5.
double SolveUntouchedAlpha(double median, double zero_mass, double concentration);

}  // namespace poolsim::trace
