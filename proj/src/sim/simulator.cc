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

#include "poolsim/sim/simulator.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <queue>
#include <thread>

#include <fmt/format.h>

#include "poolsim/common/error.h"

namespace poolsim::sim {
namespace {

using control::Followup;
using control::FollowupKind;

// Same-time ordering: freed slices are visible to arrivals in the same
// millisecond and QoS sees the settled state.
enum class Kind : int { kDrain = 0, kMigrationDone = 1, kExit = 2, kArrival = 3, kQosTick = 4 };

struct Event {
  int64_t t_ms;
  Kind kind;
  uint64_t seq;
  int pool = -1;
  int slice = -1;
  uint64_t vm = 0;  // trace index for arrivals, vm id otherwise

  bool operator>(const Event& o) const {
    if (t_ms != o.t_ms) return t_ms > o.t_ms;
    if (kind != o.kind) return kind > o.kind;
    return seq > o.seq;
  }
};

double Pct(double num, double den) { return den > 0 ? 100.0 * num / den : 0.0; }

}  // namespace

void ValidateRun(const trace::Trace& trace, const control::ClusterConfig& cluster) {
  control::ValidateClusterConfig(cluster);
  for (size_t i = 0; i < trace.size(); ++i) {
    const auto& vm = trace[i];
    trace::Validate(vm);
    if (i > 0 && vm.arrival_s < trace[i - 1].arrival_s) {
      throw ValidationError(fmt::format("trace not sorted by arrival at vm {}", vm.vm_id));
    }
    if (vm.cores > cluster.cores_per_server || vm.memory_gb > cluster.local_dram_gb) {
      throw ValidationError(fmt::format(
          "vm {} ({} cores, {} GB) does not fit an empty server ({} cores, {} GB)", vm.vm_id,
          vm.cores, vm.memory_gb, cluster.cores_per_server, cluster.local_dram_gb));
    }
    if (vm.server_hint && (*vm.server_hint < 0 || *vm.server_hint >= cluster.n_servers)) {
      throw ValidationError(fmt::format("vm {}: server hint {} outside cluster of {} servers",
                                        vm.vm_id, *vm.server_hint, cluster.n_servers));
    }
    if (!vm.ground_truth.slowdown_full_pool.count(cluster.scenario)) {
      throw ValidationError(
          fmt::format("vm {} has no ground truth for scenario {}", vm.vm_id, cluster.scenario));
    }
  }
}

SimResult RunSimulation(const trace::Trace& trace, const SimOptions& options,
                        const std::optional<predict::ModelSnapshot>& model) {
  if (options.warmup_s < 0) throw ConfigError("warmup_s must be >= 0");
  ValidateRun(trace, options.control.cluster);
  control::ControlConfig ccfg = options.control;
  ccfg.record_events = options.record_events;
  control::ControlPlane cp(ccfg, model);
  const auto& cluster = ccfg.cluster;

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  uint64_t seq = 0;
  auto push = [&](Event e) {
    e.seq = seq++;
    queue.push(e);
  };
  auto push_followups = [&](const std::vector<Followup>& fs) {
    for (const auto& f : fs) {
      if (f.kind == FollowupKind::kDrainComplete) {
        push({f.t_ms, Kind::kDrain, 0, f.pool, f.slice, 0});
      } else {
        push({f.t_ms, Kind::kMigrationDone, 0, -1, -1, f.vm_id});
      }
    }
  };
  if (!trace.empty()) push({trace[0].arrival_s * 1000, Kind::kArrival, 0, -1, -1, 0});

  const int64_t warmup_ms = options.warmup_s * 1000;
  const int64_t period = ccfg.qos.period_ms;
  bool measuring = warmup_ms == 0;
  bool tick_pending = false;
  int64_t now = 0;
  int64_t last_hour = -1;
  StrandingTracker stranding;
  std::vector<HourlyStranding> hourly;

  while (!queue.empty()) {
    Event e = queue.top();
    queue.pop();
    now = e.t_ms;
    if (!measuring && now >= warmup_ms) {
      cp.StartMeasuring();
      measuring = true;
    }
    cp.AdvanceTo(now);
    switch (e.kind) {
      case Kind::kDrain:
        cp.OnDrainComplete(e.pool, e.slice, now);
        break;
      case Kind::kMigrationDone:
        push_followups(cp.OnMigrationComplete(e.vm, now));
        break;
      case Kind::kExit:
        push_followups(cp.OnExit(e.vm, now));
        break;
      case Kind::kArrival: {
        const auto& vm = trace[e.vm];
        auto r = cp.OnArrival(vm, now);
        if (r.placed) {
          push({now + vm.lifetime_s * 1000, Kind::kExit, 0, -1, -1, vm.vm_id});
          int first = cluster.cluster_of(r.server) * cluster.servers_per_cluster;
          if (measuring) {
            stranding.Add(
                MeasureStranding(cp.state(), first, first + cluster.servers_per_cluster));
          }
        }
        int64_t hour = now / 3'600'000;
        if (hour != last_hour) {
          auto all = MeasureStranding(cp.state(), 0, cluster.n_servers);
          hourly.push_back({hour, all.core_util_pct, all.stranded_pct});
          last_hour = hour;
        }
        if (e.vm + 1 < trace.size()) {
          push({trace[e.vm + 1].arrival_s * 1000, Kind::kArrival, 0, -1, -1, e.vm + 1});
        }
        break;
      }
      case Kind::kQosTick:
        tick_pending = false;
        push_followups(cp.OnQosTick(now));
        break;
    }
    if (cp.qos_active() && !tick_pending) {
      push({(now / period + 1) * period, Kind::kQosTick, 0, -1, -1, 0});
      tick_pending = true;
    }
  }
  cp.Finalize(now);

  SimResult result;
  SimMetrics& m = result.metrics;
  const auto& st = cp.stats();
  const auto& state = cp.state();
  m.policy = control::PolicyName(ccfg.policy);
  m.scenario = cluster.scenario;
  m.pool_sockets = cluster.pool_sockets;
  m.n_servers = cluster.n_servers;
  m.seed = ccfg.seed;
  m.n_vms = static_cast<int64_t>(trace.size());
  m.sim_end_s = now / 1000;
  m.warmup_s = options.warmup_s;

  for (int v : state.peak_resident_gb()) m.baseline_dram_gb += v;
  for (int v : state.peak_local_gb()) m.local_dram_gb += v;
  for (int v : state.peak_pool_gb()) m.pool_dram_gb += v;
  m.dram_savings_pct =
      Pct(m.baseline_dram_gb - m.local_dram_gb - m.pool_dram_gb, m.baseline_dram_gb);
  m.pool_dram_share_pct = Pct(m.pool_dram_gb, m.local_dram_gb + m.pool_dram_gb);

  const double n = static_cast<double>(st.scheduled);
  m.scheduled = st.scheduled;
  m.failed = st.failed;
  m.moved = st.moved;
  m.pool_vm_pct = Pct(st.pool_vms, n);
  m.insensitive_vm_pct = Pct(st.insensitive_vms, n);
  m.spilled_vm_pct = Pct(st.spilled_vms, n);
  m.pool_memory_pct = Pct(st.pool_gb, st.memory_gb);
  m.misprediction_pre_pct = Pct(st.mispredicted_pre, n);
  m.misprediction_pct = Pct(st.mispredicted_post, n);
  m.migrations = st.migrations_started;
  m.migrations_cancelled = st.migrations_cancelled;
  m.deferred_mitigations = st.deferrals_budget + st.deferrals_local;
  m.deferred_vms = st.deferred_vms;

  const auto& demand = st.offline_demand_gbps;
  m.offline_samples = static_cast<int64_t>(demand.size());
  if (!demand.empty()) {
    for (double p : kOfflinePercentiles) m.offline_gbps_percentiles[p] = Percentile(demand, p);
    auto above = [&](double x) {
      return Pct(static_cast<double>(std::count_if(demand.begin(), demand.end(),
                                                   [x](double d) { return d > x; })),
                 static_cast<double>(demand.size()));
    };
    m.offline_above_1gbps_pct = above(1.0);
    m.offline_above_10gbps_pct = above(10.0);
  }
  m.stranding = stranding.Buckets();
  m.stranding_at_75_pct = stranding.MeanAt(75.0);
  m.hourly_stranding = std::move(hourly);
  if (ccfg.policy.kind == control::PolicyKind::kPredictive) {
    const auto& sol = cp.model()->solution;
    m.model_fp_pct = sol.fp;
    m.model_op_pct = sol.op;
    m.model_li_pct = sol.li;
    m.model_um_pct = sol.um;
    m.model_pool_share_pct = sol.PoolSharePct();
  }
  result.events = cp.events();
  return result;
}

std::vector<SimResult> RunMany(const trace::Trace& trace, const std::vector<RunSpec>& specs,
                               int jobs) {
  std::vector<SimResult> results(specs.size());
  std::vector<std::exception_ptr> errors(specs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < specs.size(); i = next++) {
      try {
        results[i] = RunSimulation(trace, specs[i].options, specs[i].model);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  int n_threads = std::clamp(jobs, 1, static_cast<int>(std::max<size_t>(1, specs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::vector<SimMetrics> SweepPoolSizes(const trace::Trace& trace, const SimOptions& base,
                                       std::vector<int> sizes,
                                       const std::optional<predict::ModelSnapshot>& model,
                                       int jobs) {
  if (sizes.empty()) throw ConfigError("sweep needs at least one pool size");
  std::sort(sizes.begin(), sizes.end());
  std::vector<RunSpec> specs;
  for (int size : sizes) {
    RunSpec spec{base, model};
    spec.options.control.cluster.pool_sockets = size;
    if (size < 1 || base.control.cluster.servers_per_cluster % size != 0) {
      throw ConfigError(fmt::format("pool size {} does not divide the {}-server cluster", size,
                                    base.control.cluster.servers_per_cluster));
    }
    control::ValidateClusterConfig(spec.options.control.cluster);
    specs.push_back(std::move(spec));
  }
  std::vector<SimMetrics> out;
  for (auto& r : RunMany(trace, specs, jobs)) out.push_back(std::move(r.metrics));
  return out;
}

std::vector<SimMetrics> ComparePolicies(const trace::Trace& trace,
                                        const std::vector<RunSpec>& specs, int jobs) {
  std::vector<SimMetrics> out;
  for (auto& r : RunMany(trace, specs, jobs)) out.push_back(std::move(r.metrics));
  return out;
}

}  // namespace poolsim::sim
