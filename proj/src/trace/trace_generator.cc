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

#include "poolsim/trace/trace_generator.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <queue>
#include <tuple>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "poolsim/common/error.h"
#include "poolsim/common/rng.h"

namespace poolsim::trace {
namespace {

constexpr uint64_t kStreamCustomers = 1;
constexpr uint64_t kStreamAttributes = 2;
constexpr uint64_t kStreamClusterBase = 100;

void CheckWeights(const std::vector<double>& w, std::string_view name) {
  if (w.empty()) throw ConfigError(fmt::format("{}: no weights", name));
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw ConfigError(fmt::format("{}: weights must be nonnegative", name));
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ConfigError(fmt::format("{}: weights sum to {}, expected 1", name, sum));
  }
}

size_t SampleIndex(const std::vector<double>& cumulative, Rng& rng) {
  double u = UniformUnit(rng) * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<size_t>(it - cumulative.begin(), cumulative.size() - 1);
}

std::vector<double> Cumulative(const std::vector<double>& w) {
  std::vector<double> c(w.size());
  std::partial_sum(w.begin(), w.end(), c.begin());
  return c;
}

double Exponential(Rng& rng) { return -std::log1p(-UniformUnit(rng)); }

// Latent in (0,1) that mixes a customer component with per-VM noise.
double CorrelatedUniform(double customer_z, double rho, Rng& rng) {
  double z = rho * customer_z + std::sqrt(1.0 - rho * rho) * StandardNormal(rng);
  return NormalCdf(z);
}

struct Placed {
  int64_t arrival_s;
  int64_t lifetime_s;
  int cores;
  int memory_gb;
  int server;  // global id
};

std::vector<Placed> GenerateCluster(const TraceGenConfig& cfg, int cluster, uint64_t quota) {
  Rng rng = MakeRng(cfg.seed, kStreamClusterBase + cluster);
  const auto core_cum = Cumulative(cfg.core_weights);
  const auto ratio_cum = Cumulative(cfg.gb_per_core_weights);

  double mean_cores = 0.0;
  for (size_t i = 0; i < cfg.core_sizes.size(); ++i) {
    mean_cores += std::min(cfg.core_sizes[i], cfg.cores_per_server) * cfg.core_weights[i];
  }
  double mean_life = cfg.lifetime_median_s * std::exp(0.5 * cfg.lifetime_sigma * cfg.lifetime_sigma);
  double concurrency = cfg.target_core_utilization * cfg.servers_per_cluster *
                       cfg.cores_per_server / mean_cores;
  double rate = concurrency / mean_life;
  double peak_rate = rate * (1.0 + cfg.diurnal_amplitude);

  const int n_servers = cfg.servers_per_cluster;
  std::vector<int> free_cores(n_servers, cfg.cores_per_server);
  std::vector<int> free_mem(n_servers, cfg.dram_gb_per_server);
  using Exit = std::tuple<int64_t, int, int, int>;  // time, server, cores, mem
  std::priority_queue<Exit, std::vector<Exit>, std::greater<>> exits;

  std::vector<Placed> out;
  out.reserve(quota);
  std::vector<int> fitting;
  double t = 0.0;
  while (out.size() < quota) {
    t += Exponential(rng) / peak_rate;
    double accept = (1.0 + cfg.diurnal_amplitude * std::sin(2.0 * std::numbers::pi * t / 86400.0)) /
                    (1.0 + cfg.diurnal_amplitude);
    if (UniformUnit(rng) >= accept) continue;

    Placed vm;
    vm.arrival_s = static_cast<int64_t>(t);
    double life = cfg.lifetime_median_s * std::exp(cfg.lifetime_sigma * StandardNormal(rng));
    vm.lifetime_s = std::max<int64_t>(cfg.min_lifetime_s, static_cast<int64_t>(life));
    vm.cores = std::min(cfg.core_sizes[SampleIndex(core_cum, rng)], cfg.cores_per_server);
    vm.memory_gb = std::min(vm.cores * cfg.gb_per_core[SampleIndex(ratio_cum, rng)],
                            cfg.dram_gb_per_server);
    bool best_fit = UniformUnit(rng) < cfg.best_fit_probability;
    double pick = UniformUnit(rng);

    while (!exits.empty() && std::get<0>(exits.top()) <= vm.arrival_s) {
      auto [_, s, c, m] = exits.top();
      exits.pop();
      free_cores[s] += c;
      free_mem[s] += m;
    }
    fitting.clear();
    for (int s = 0; s < n_servers; ++s) {
      if (free_cores[s] >= vm.cores && free_mem[s] >= vm.memory_gb) fitting.push_back(s);
    }
    if (fitting.empty()) continue;  // rejected by the reference cluster
    int server;
    if (best_fit) {
      server = *std::min_element(fitting.begin(), fitting.end(),
                                 [&](int a, int b) { return free_cores[a] < free_cores[b]; });
    } else {
      server = fitting[std::min<size_t>(static_cast<size_t>(pick * fitting.size()),
                                        fitting.size() - 1)];
    }
    free_cores[server] -= vm.cores;
    free_mem[server] -= vm.memory_gb;
    exits.emplace(vm.arrival_s + vm.lifetime_s, server, vm.cores, vm.memory_gb);
    vm.server = cluster * n_servers + server;
    out.push_back(vm);
  }
  return out;
}

double UntouchedQuantile(double p, double zero_mass, double alpha, double beta) {
  if (p <= zero_mass) return 0.0;
  double body = std::clamp((p - zero_mass) / (1.0 - zero_mass), 0.0, 1.0);
  return boost::math::ibeta_inv(alpha, beta, body);
}

}  // namespace

std::map<std::string, SlowdownMixture, std::less<>> TraceGenConfig::DefaultMixtures() {
  const std::vector<double> edges = {0.0, 0.01, 0.05, 0.25, 0.50};
  return {
      {"182", {edges, {0.26, 0.17, 0.36, 0.21}}},
      {"222", {edges, {0.23, 0.14, 0.26, 0.37}}},
  };
}

void ValidateConfig(const TraceGenConfig& cfg) {
  auto fail = [](std::string_view msg) { throw ConfigError(std::string(msg)); };
  if (cfg.n_clusters < 1) fail("n_clusters must be >= 1");
  if (cfg.servers_per_cluster < 1) fail("servers_per_cluster must be >= 1");
  if (cfg.cores_per_server < 1) fail("cores_per_server must be >= 1");
  if (cfg.dram_gb_per_server < 1) fail("dram_gb_per_server must be >= 1");
  if (!(cfg.target_core_utilization > 0.0 && cfg.target_core_utilization <= 1.0)) {
    fail("target_core_utilization must be in (0,1]");
  }
  if (!(cfg.diurnal_amplitude >= 0.0 && cfg.diurnal_amplitude < 1.0)) {
    fail("diurnal_amplitude must be in [0,1)");
  }
  if (!(cfg.lifetime_median_s > 0.0) || !(cfg.lifetime_sigma >= 0.0)) {
    fail("lifetime distribution parameters must be positive");
  }
  if (cfg.min_lifetime_s < 1) fail("min_lifetime_s must be >= 1");
  if (cfg.core_sizes.size() != cfg.core_weights.size()) fail("core_sizes/core_weights size mismatch");
  if (cfg.gb_per_core.size() != cfg.gb_per_core_weights.size()) {
    fail("gb_per_core/gb_per_core_weights size mismatch");
  }
  CheckWeights(cfg.core_weights, "core_weights");
  CheckWeights(cfg.gb_per_core_weights, "gb_per_core_weights");
  for (int c : cfg.core_sizes) if (c < 1) fail("core_sizes must be >= 1");
  for (int r : cfg.gb_per_core) if (r < 1) fail("gb_per_core must be >= 1");
  if (!(cfg.best_fit_probability >= 0.0 && cfg.best_fit_probability <= 1.0)) {
    fail("best_fit_probability must be in [0,1]");
  }
  if (cfg.n_customers < 1) fail("n_customers must be >= 1");
  if (cfg.customer_strata < 1) fail("customer_strata must be >= 1");
  if (!(cfg.customer_zipf_exponent >= 0.0)) fail("customer_zipf_exponent must be >= 0");
  if (!(cfg.untouched_zero_mass >= 0.0 && cfg.untouched_zero_mass < 0.5)) {
    fail("untouched_zero_mass must be in [0,0.5)");
  }
  if (!(cfg.untouched_median > 0.0 && cfg.untouched_median < 1.0)) {
    fail("untouched_median must be in (0,1)");
  }
  if (!(cfg.untouched_concentration > 0.0)) fail("untouched_concentration must be > 0");
  for (double rho : {cfg.untouched_customer_correlation, cfg.slowdown_customer_correlation}) {
    if (!(rho >= 0.0 && rho <= 1.0)) fail("customer correlations must be in [0,1]");
  }
  if (!(cfg.exponent_min > 0.0 && cfg.exponent_max >= cfg.exponent_min)) {
    fail("curve exponent range must satisfy 0 < min <= max");
  }
  if (!(cfg.exponent_beta_a > 0.0 && cfg.exponent_beta_b > 0.0)) {
    fail("exponent beta parameters must be > 0");
  }
  if (cfg.slowdown_mixtures.empty()) fail("at least one slowdown mixture is required");
  for (const auto& [name, mix] : cfg.slowdown_mixtures) {
    std::string label = fmt::format("slowdown_mixtures.{}", name);
    if (name.empty() || name.find_first_of(",\r\n") != std::string::npos) {
      fail(fmt::format("{}: invalid scenario name", label));
    }
    if (mix.edges.size() != mix.weights.size() + 1) {
      fail(fmt::format("{}: need one more edge than weights", label));
    }
    CheckWeights(mix.weights, label);
    if (mix.edges.front() < 0.0) fail(fmt::format("{}: edges must be >= 0", label));
    for (size_t i = 1; i < mix.edges.size(); ++i) {
      if (!(mix.edges[i] > mix.edges[i - 1])) {
        fail(fmt::format("{}: edges must be strictly increasing", label));
      }
    }
  }
}

double MixtureQuantile(const SlowdownMixture& mixture, double q) {
  q = std::clamp(q, 0.0, 1.0);
  double lo = 0.0;
  for (size_t i = 0; i < mixture.weights.size(); ++i) {
    double hi = lo + mixture.weights[i];
    if (q < hi || i + 1 == mixture.weights.size()) {
      double frac = mixture.weights[i] > 0.0 ? std::clamp((q - lo) / mixture.weights[i], 0.0, 1.0) : 0.0;
      return mixture.edges[i] + frac * (mixture.edges[i + 1] - mixture.edges[i]);
    }
    lo = hi;
  }
  return mixture.edges.back();
}

double SolveUntouchedAlpha(double median, double zero_mass, double concentration) {
  double target = (0.5 - zero_mass) / (1.0 - zero_mass);
  auto f = [&](double a) {
    return boost::math::ibeta(a, concentration - a, median) - target;
  };
  boost::math::tools::eps_tolerance<double> tol(50);
  auto [lo, hi] = boost::math::tools::bisect(f, 1e-6 * concentration,
                                             (1.0 - 1e-6) * concentration, tol);
  return 0.5 * (lo + hi);
}

Trace GenerateTrace(const TraceGenConfig& cfg) {
  ValidateConfig(cfg);
  if (cfg.n_vms == 0) return {};

  // Placement per cluster, then a stable merge by (arrival, cluster, order).
  std::vector<std::tuple<int64_t, int, size_t>> order;
  std::vector<std::vector<Placed>> clusters;
  for (int c = 0; c < cfg.n_clusters; ++c) {
    uint64_t quota = cfg.n_vms / cfg.n_clusters + (static_cast<uint64_t>(c) < cfg.n_vms % cfg.n_clusters);
    clusters.push_back(GenerateCluster(cfg, c, quota));
    for (size_t i = 0; i < clusters.back().size(); ++i) {
      order.emplace_back(clusters.back()[i].arrival_s, c, i);
    }
  }
  std::sort(order.begin(), order.end());

  // Customers: Zipf popularity and stratified latents.
  Rng crng = MakeRng(cfg.seed, kStreamCustomers);
  std::vector<double> popularity(cfg.n_customers);
  for (int i = 0; i < cfg.n_customers; ++i) {
    popularity[i] = std::pow(i + 1.0, -cfg.customer_zipf_exponent);
  }
  const auto popularity_cum = Cumulative(popularity);
  auto stratified = [&](std::vector<double>& z) {
    z.resize(cfg.n_customers);
    for (int start = 0; start < cfg.n_customers; start += cfg.customer_strata) {
      int len = std::min(cfg.customer_strata, cfg.n_customers - start);
      std::vector<int> perm(len);
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = len - 1; i > 0; --i) {
        std::swap(perm[i], perm[static_cast<int>(UniformUnit(crng) * (i + 1))]);
      }
      for (int j = 0; j < len; ++j) {
        double u = (perm[j] + UniformUnit(crng)) / len;
        z[start + j] = NormalQuantile(std::clamp(u, 1e-12, 1.0 - 1e-12));
      }
    }
  };
  std::vector<double> untouched_z, slowdown_z;
  stratified(untouched_z);
  stratified(slowdown_z);

  const double alpha = SolveUntouchedAlpha(cfg.untouched_median, cfg.untouched_zero_mass,
                                           cfg.untouched_concentration);
  const double beta = cfg.untouched_concentration - alpha;

  Rng arng = MakeRng(cfg.seed, kStreamAttributes);
  Trace trace;
  trace.reserve(order.size());
  for (const auto& [arrival, c, i] : order) {
    const Placed& p = clusters[c][i];
    VmRequest vm;
    vm.vm_id = trace.size();
    int customer = static_cast<int>(SampleIndex(popularity_cum, arng));
    vm.customer_id = fmt::format("cust-{:04d}", customer);
    vm.vm_type = fmt::format("c{}-m{}", p.cores, p.memory_gb);
    vm.arrival_s = p.arrival_s;
    vm.lifetime_s = p.lifetime_s;
    vm.cores = p.cores;
    vm.memory_gb = p.memory_gb;
    if (cfg.emit_server_hint) vm.server_hint = p.server;

    double u_untouched =
        CorrelatedUniform(untouched_z[customer], cfg.untouched_customer_correlation, arng);
    vm.ground_truth.untouched_fraction =
        RoundMicro(UntouchedQuantile(u_untouched, cfg.untouched_zero_mass, alpha, beta));
    // One latent drives every scenario so a VM's rank is the same under
    // each latency.
    double u_slow = CorrelatedUniform(slowdown_z[customer], cfg.slowdown_customer_correlation, arng);
    for (const auto& [name, mix] : cfg.slowdown_mixtures) {
      vm.ground_truth.slowdown_full_pool[name] = RoundMicro(MixtureQuantile(mix, u_slow));
    }
    double e = boost::math::ibeta_inv(cfg.exponent_beta_a, cfg.exponent_beta_b, UniformUnit(arng));
    vm.ground_truth.curve_exponent =
        RoundMicro(cfg.exponent_min + (cfg.exponent_max - cfg.exponent_min) * e);
    trace.push_back(std::move(vm));
  }
  return trace;
}

}  // namespace poolsim::trace
