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

#include "poolsim/control/control_plane.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "poolsim/common/error.h"
#include "poolsim/predict/telemetry.h"

namespace poolsim::control {
namespace {

int FloorGb(double gb) { return static_cast<int>(std::floor(gb + 1e-9)); }

}  // namespace

ControlPlane::ControlPlane(ControlConfig cfg, std::optional<predict::ModelSnapshot> model)
    : cfg_(std::move(cfg)),
      model_(std::move(model)),
      state_(cfg_.cluster),
      qos_(cfg_.qos),
      budget_(cfg_.qos),
      drain_rng_(MakeRng(cfg_.seed, 1)),
      qos_rng_(MakeRng(cfg_.seed, 2)),
      last_start_ms_(cfg_.cluster.n_pools(), INT64_MIN) {
  ValidatePolicy(cfg_.policy);
  ValidateQosConfig(cfg_.qos);
  if (!(cfg_.accounting_pdm > 0)) throw ConfigError("accounting_pdm must be > 0");
  if (cfg_.policy.kind == PolicyKind::kPredictive) {
    if (!model_) throw ConfigError("predictive policy needs a calibrated model");
    if (model_->scenario != cfg_.cluster.scenario) {
      throw ConfigError(fmt::format("model calibrated for scenario {} but cluster uses {}",
                                    model_->scenario, cfg_.cluster.scenario));
    }
    predict::ApplyCombined(*model_, cfg_.policy.combined);
    history_ = predict::UntouchedHistory(model_->history_window_s);
  }
}

double ControlPlane::pdm() const {
  return cfg_.policy.kind == PolicyKind::kPredictive ? cfg_.policy.combined.pdm
                                                     : cfg_.accounting_pdm;
}

void ControlPlane::CheckTime(int64_t now_ms) {
  if (now_ms < now_ms_) {
    throw StateError(fmt::format("time went backwards: {} after {}", now_ms, now_ms_));
  }
  now_ms_ = now_ms;
}

void ControlPlane::MaybeCheck() const {
  if (cfg_.check_invariants) state_.CheckInvariants();
}

void ControlPlane::AdvanceTo(int64_t now_ms) {
  CheckTime(now_ms);
  constexpr int64_t kDayMs = predict::kSecondsPerDay * 1000;
  if (next_midnight_ms_ == 0 && now_ms > 0) {
    next_midnight_ms_ = (now_ms / kDayMs) * kDayMs;
  }
  while (next_midnight_ms_ <= now_ms) {
    history_.Commit(next_midnight_ms_ / 1000);
    next_midnight_ms_ += kDayMs;
  }
}

MemorySplit ControlPlane::PlanSplit(const trace::VmRequest& vm, int server,
                                    bool& insensitive) const {
  insensitive = false;
  int want = 0;
  switch (cfg_.policy.kind) {
    case PolicyKind::kAllLocal:
      break;
    case PolicyKind::kStatic:
      want = FloorGb(vm.memory_gb * cfg_.policy.static_fraction);
      break;
    case PolicyKind::kPredictive: {
      if (history_.Count(vm.customer_id) >= 1) {
        insensitive =
            model_->classifier.IsInsensitive(predict::SynthesizeFeatures(vm, model_->telemetry));
      }
      want = insensitive
                 ? vm.memory_gb
                 : FloorGb(vm.memory_gb * model_->untouched.Predict(history_, vm.customer_id));
      break;
    }
  }
  MemorySplit split;
  split.pool_gb = std::clamp(want, 0, std::min(vm.memory_gb, state_.pools()[
                                                   cfg_.cluster.pool_of(server)].ready()));
  split.local_gb = vm.memory_gb - split.pool_gb;
  return split;
}

bool ControlPlane::Fits(const trace::VmRequest& vm, int server, const MemorySplit& split) const {
  const ServerState& s = state_.servers()[server];
  return vm.cores <= s.free_cores && split.local_gb <= s.free_local_gb;
}

ScheduleResult ControlPlane::OnArrival(const trace::VmRequest& vm, int64_t now_ms) {
  CheckTime(now_ms);
  if (vms_.count(vm.vm_id)) throw StateError(fmt::format("vm {} is already running", vm.vm_id));
  const ClusterConfig& cc = cfg_.cluster;
  ScheduleResult result;
  int first = 0, last = cc.n_servers;
  if (vm.server_hint) {
    int hint = *vm.server_hint;
    if (hint < 0 || hint >= cc.n_servers) {
      throw ValidationError(
          fmt::format("vm {}: server hint {} outside cluster of {}", vm.vm_id, hint, cc.n_servers));
    }
    bool ins = false;
    MemorySplit split = PlanSplit(vm, hint, ins);
    if (Fits(vm, hint, split)) {
      result = {true, hint, false, ins, std::move(split)};
    } else {
      first = cc.cluster_of(hint) * cc.servers_per_cluster;
      last = first + cc.servers_per_cluster;
    }
  }
  for (int s = first; !result.placed && s < last; ++s) {
    bool ins = false;
    MemorySplit split = PlanSplit(vm, s, ins);
    if (Fits(vm, s, split)) result = {true, s, vm.server_hint.has_value(), ins, std::move(split)};
  }
  if (!result.placed) {
    ++stats_.failed;
    if (cfg_.record_events) {
      log_.Record({.t_ms = now_ms, .kind = EventKind::kScheduleFailed, .vm_id = vm.vm_id,
                   .cores = vm.cores, .memory_gb = vm.memory_gb, .reason = "no server fits"});
    }
    return result;
  }

  int server = result.server;
  int pool = cc.pool_of(server);
  PoolManager& pm = state_.pools()[pool];
  int ready_before = pm.ready();
  if (result.split.pool_gb > 0) {
    result.split.source_slices = pm.Assign(cc.host_of(server), result.split.pool_gb);
  }
  state_.Reserve(server, vm.cores, result.split.local_gb, vm.memory_gb);
  state_.NotePool(pool);

  if (pm.total() > 0) {
    double shortfall = std::max(0, pm.buffer_target() - pm.ready());
    int64_t prev = last_start_ms_[pool];
    double dt_s = prev == INT64_MIN ? 1.0 : std::max(1.0, (now_ms - prev) / 1000.0);
    stats_.offline_demand_gbps.push_back(shortfall / dt_s);
    last_start_ms_[pool] = now_ms;
  }

  VmState st;
  st.request = &vm;
  st.server = server;
  st.split = result.split;
  st.start_ms = now_ms;
  st.spill = ZnumaSpill(vm.memory_gb, vm.ground_truth.untouched_fraction, st.split.local_gb);
  st.slowdown = trace::SlowdownAt(vm.ground_truth, st.spill, cc.scenario);
  st.predicted_insensitive = result.insensitive;

  ++stats_.scheduled;
  stats_.moved += result.moved;
  stats_.memory_gb += vm.memory_gb;
  stats_.pool_gb += st.split.pool_gb;
  stats_.pool_vms += st.split.pool_gb > 0;
  stats_.insensitive_vms += result.insensitive;
  stats_.spilled_vms += st.spill > 0;
  stats_.mispredicted_pre += st.slowdown > pdm();

  if (cfg_.policy.kind == PolicyKind::kPredictive && cfg_.policy.mitigation &&
      st.split.pool_gb > 0 && st.spill > 0) {
    qos_.Watch(vm.vm_id, st.slowdown);
  }
  if (cfg_.record_events) {
    log_.Record({.t_ms = now_ms, .kind = EventKind::kSchedule, .vm_id = vm.vm_id,
                 .server = server, .pool = pool, .cores = vm.cores, .memory_gb = vm.memory_gb,
                 .local_gb = st.split.local_gb, .pool_gb = st.split.pool_gb,
                 .ready_before = ready_before, .touched_gb = vm.touched_gb(),
                 .slowdown = st.slowdown, .moved = result.moved,
                 .insensitive = result.insensitive});
  }
  vms_.emplace(vm.vm_id, std::move(st));
  MaybeCheck();
  return result;
}

std::vector<Followup> ControlPlane::Drain(int server, std::vector<int> slices, int64_t now_ms) {
  std::vector<Followup> out;
  if (slices.empty()) return out;
  int pool = cfg_.cluster.pool_of(server);
  auto done = state_.pools()[pool].BeginDrain(cfg_.cluster.host_of(server), slices, now_ms,
                                              cfg_.cluster.timing, drain_rng_);
  out.reserve(done.size());
  for (const auto& d : done) {
    out.push_back({d.t_ms, FollowupKind::kDrainComplete, pool, d.slice, 0});
  }
  state_.NotePool(pool);
  return out;
}

std::vector<Followup> ControlPlane::OnExit(uint64_t vm_id, int64_t now_ms) {
  CheckTime(now_ms);
  auto it = vms_.find(vm_id);
  if (it == vms_.end()) throw StateError(fmt::format("exit for vm {} which is not running", vm_id));
  VmState st = std::move(it->second);
  vms_.erase(it);
  const trace::VmRequest& vm = *st.request;

  int reserved = st.split.local_gb + (st.migrating ? st.split.pool_gb : 0);
  state_.Free(st.server, vm.cores, reserved, vm.memory_gb);
  if (st.migrating) {
    ++stats_.migrations_cancelled;
    if (cfg_.record_events) {
      log_.Record({.t_ms = now_ms, .kind = EventKind::kMigrationCancelled, .vm_id = vm_id,
                   .server = st.server, .pool_gb = st.split.pool_gb, .reason = "vm exited"});
    }
  }
  auto out = Drain(st.server, std::move(st.split.source_slices), now_ms);

  qos_.Unwatch(vm_id);
  deferred_.erase(vm_id);
  budget_.NoteExit(now_ms);
  history_.Add(vm.customer_id, now_ms / 1000, vm.ground_truth.untouched_fraction);
  ++stats_.exited;
  stats_.mispredicted_post += st.slowdown > pdm() && !st.migrated;
  if (cfg_.record_events) {
    log_.Record({.t_ms = now_ms, .kind = EventKind::kExit, .vm_id = vm_id, .server = st.server,
                 .pool_gb = st.split.pool_gb});
  }
  MaybeCheck();
  return out;
}

void ControlPlane::OnDrainComplete(int pool, int slice, int64_t now_ms) {
  CheckTime(now_ms);
  if (pool < 0 || pool >= static_cast<int>(state_.pools().size())) {
    throw StateError(fmt::format("drain completion for unknown pool {}", pool));
  }
  state_.pools()[pool].CompleteDrain(slice);
  if (cfg_.record_events) {
    log_.Record({.t_ms = now_ms, .kind = EventKind::kDrainComplete, .pool = pool, .slice = slice});
  }
  MaybeCheck();
}

std::vector<Followup> ControlPlane::OnMigrationComplete(uint64_t vm_id, int64_t now_ms) {
  CheckTime(now_ms);
  auto it = vms_.find(vm_id);
  // The VM may have exited while its memory was being copied.
  if (it == vms_.end() || !it->second.migrating) return {};
  VmState& st = it->second;
  st.migrating = false;
  st.migrated = true;
  int moved_gb = st.split.pool_gb;
  st.split.local_gb += moved_gb;
  st.split.pool_gb = 0;
  st.spill = 0;
  ++stats_.migrations_completed;
  if (cfg_.record_events) {
    log_.Record({.t_ms = now_ms, .kind = EventKind::kMigrationComplete, .vm_id = vm_id,
                 .server = st.server, .pool_gb = moved_gb});
  }
  auto out = Drain(st.server, std::exchange(st.split.source_slices, {}), now_ms);
  MaybeCheck();
  return out;
}

std::vector<Followup> ControlPlane::OnQosTick(int64_t now_ms) {
  CheckTime(now_ms);
  std::vector<Followup> out;
  if (qos_.empty()) return out;
  ++stats_.qos_ticks;
  for (uint64_t id : qos_.Tick(pdm(), qos_rng_)) {
    VmState& st = vms_.at(id);
    std::string reason;
    bool local_short = state_.servers()[st.server].free_local_gb < st.split.pool_gb;
    if (local_short) {
      reason = "no local memory on host";
    } else if (!budget_.TryConsume(now_ms, alive())) {
      reason = "migration budget exhausted";
    }
    if (!reason.empty()) {
      // Counted once per episode; the VM keeps being retried every tick.
      if (deferred_.insert(id).second) {
        ++stats_.deferred_vms;
        ++(local_short ? stats_.deferrals_local : stats_.deferrals_budget);
        if (cfg_.record_events) {
          log_.Record({.t_ms = now_ms, .kind = EventKind::kMitigationDeferred, .vm_id = id,
                       .server = st.server, .pool_gb = st.split.pool_gb, .reason = reason});
        }
      }
      continue;
    }
    state_.Reserve(st.server, 0, st.split.pool_gb, 0);
    st.migrating = true;
    qos_.Unwatch(id);
    deferred_.erase(id);
    ++stats_.migrations_started;
    int64_t done = now_ms + static_cast<int64_t>(
                                std::ceil(cfg_.cluster.timing.MigrationMs(st.split.pool_gb)));
    out.push_back({done, FollowupKind::kMigrationComplete, -1, -1, id});
    if (cfg_.record_events) {
      log_.Record({.t_ms = now_ms, .kind = EventKind::kMigrationStart, .vm_id = id,
                   .server = st.server, .pool_gb = st.split.pool_gb});
    }
  }
  MaybeCheck();
  return out;
}

void ControlPlane::Finalize(int64_t now_ms) {
  CheckTime(now_ms);
  for (const auto& [id, st] : vms_) {
    stats_.mispredicted_post += st.slowdown > pdm() && !st.migrated;
  }
}

}  // namespace poolsim::control
