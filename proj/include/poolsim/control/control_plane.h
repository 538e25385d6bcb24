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
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "poolsim/control/cluster_state.h"
#include "poolsim/control/event_log.h"
#include "poolsim/control/policy.h"
#include "poolsim/control/qos_monitor.h"
#include "poolsim/predict/calibration.h"
#include "poolsim/predict/untouched_model.h"

namespace poolsim::control {

struct ControlConfig {
  ClusterConfig cluster;
  Policy policy;
  QosConfig qos;
  /// Slowdown bound used to count mispredictions under policies that carry
  /// no PDM of their own.
  double accounting_pdm = 0.05;
  uint64_t seed = 1;
  bool record_events = false;
  /// Re-verify all capacity invariants after every mutation (slow).
  bool check_invariants = false;
};

enum class FollowupKind { kDrainComplete, kMigrationComplete };

/// Future work the caller must schedule.
struct Followup {
  int64_t t_ms = 0;
  FollowupKind kind = FollowupKind::kDrainComplete;
  int pool = -1;
  int slice = -1;
  uint64_t vm_id = 0;
};

struct ScheduleResult {
  bool placed = false;
  int server = -1;
  bool moved = false;  // placed somewhere other than the hint
  bool insensitive = false;
  MemorySplit split;
};

struct ControlStats {
  int64_t scheduled = 0;
  int64_t failed = 0;
  int64_t moved = 0;
  int64_t exited = 0;
  int64_t pool_vms = 0;
  int64_t insensitive_vms = 0;
  int64_t spilled_vms = 0;
  double memory_gb = 0;
  double pool_gb = 0;
  int64_t mispredicted_pre = 0;
  int64_t mispredicted_post = 0;
  int64_t migrations_started = 0;
  int64_t migrations_completed = 0;
  int64_t migrations_cancelled = 0;
  int64_t deferrals_budget = 0;
  int64_t deferrals_local = 0;
  int64_t deferred_vms = 0;
  int64_t qos_ticks = 0;
  /// GB/s of offlining needed at each VM start to restore the ready buffer.
  std::vector<double> offline_demand_gbps;
};

/// Pool-aware VM scheduling, slice ownership, QoS mitigation and nightly
/// history, driven by a caller that owns the clock and event queue.
/// Times must be nondecreasing across calls.
class ControlPlane {
 public:
  /// `model` is required for predictive policies; its combined settings are
  /// re-solved for the policy's TP. Throws ConfigError.
  ControlPlane(ControlConfig cfg, std::optional<predict::ModelSnapshot> model = std::nullopt);

  /// Publishes history at every midnight up to and including now.
  void AdvanceTo(int64_t now_ms);

  /// `vm` must outlive the control plane.
  ScheduleResult OnArrival(const trace::VmRequest& vm, int64_t now_ms);
  /// Throws StateError for VMs that are not running.
  std::vector<Followup> OnExit(uint64_t vm_id, int64_t now_ms);
  void OnDrainComplete(int pool, int slice, int64_t now_ms);
  std::vector<Followup> OnMigrationComplete(uint64_t vm_id, int64_t now_ms);
  std::vector<Followup> OnQosTick(int64_t now_ms);
  bool qos_active() const { return !qos_.empty(); }

  /// Counts end-of-run outcomes for VMs still running.
  void Finalize(int64_t now_ms);
  /// Starts peak accounting from the current occupancy.
  void StartMeasuring() { state_.StartMeasuring(); }

  const ControlConfig& config() const { return cfg_; }
  const ClusterState& state() const { return state_; }
  const ControlStats& stats() const { return stats_; }
  const EventLog& events() const { return log_; }
  const std::unordered_map<uint64_t, VmState>& vms() const { return vms_; }
  const predict::UntouchedHistory& history() const { return history_; }
  const std::optional<predict::ModelSnapshot>& model() const { return model_; }
  int alive() const { return static_cast<int>(vms_.size()); }
  double pdm() const;

 private:
  MemorySplit PlanSplit(const trace::VmRequest& vm, int server, bool& insensitive) const;
  bool Fits(const trace::VmRequest& vm, int server, const MemorySplit& split) const;
  std::vector<Followup> Drain(int server, std::vector<int> slices, int64_t now_ms);
  void CheckTime(int64_t now_ms);
  void MaybeCheck() const;

  ControlConfig cfg_;
  std::optional<predict::ModelSnapshot> model_;
  ClusterState state_;
  predict::UntouchedHistory history_;
  QosMonitor qos_;
  MitigationBudget budget_;
  Rng drain_rng_;
  Rng qos_rng_;
  std::unordered_map<uint64_t, VmState> vms_;
  std::set<uint64_t> deferred_;
  std::vector<int64_t> last_start_ms_;
  ControlStats stats_;
  EventLog log_;
  int64_t now_ms_ = INT64_MIN;
  int64_t next_midnight_ms_ = 0;
};

}  // namespace poolsim::control
