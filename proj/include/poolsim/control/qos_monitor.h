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
#include <deque>
#include <map>
#include <vector>

#include "poolsim/common/rng.h"

namespace poolsim::control {

struct QosConfig {
  int64_t period_ms = 1000;
  /// Per-observation noise on the measured slowdown.
  double noise_sigma = 0.01;
  /// Observations before a VM can be flagged.
  int min_observations = 5;
  /// VMs whose running mean stays under the PDM this long stop being watched.
  int settle_observations = 30;
  double budget_fraction = 0.01;
  int64_t budget_window_ms = 3'600'000;
};

void ValidateQosConfig(const QosConfig& cfg);

/// Watches VMs that spill onto the pool. Each tick draws one noisy slowdown
/// sample per VM and flags those whose running mean exceeds the PDM.
class QosMonitor {
 public:
  explicit QosMonitor(QosConfig cfg = {}) : cfg_(cfg) {}

  void Watch(uint64_t vm_id, double true_slowdown);
  void Unwatch(uint64_t vm_id) { watched_.erase(vm_id); }
  bool watching(uint64_t vm_id) const { return watched_.count(vm_id) != 0; }
  bool empty() const { return watched_.empty(); }
  size_t size() const { return watched_.size(); }

  /// Returns flagged VM ids in ascending order. Flagged VMs stay watched
  /// until Unwatch(); settled ones are dropped.
  std::vector<uint64_t> Tick(double pdm, Rng& rng);

 private:
  struct Entry {
    double truth;
    double sum = 0;
    int n = 0;
  };
  QosConfig cfg_;
  std::map<uint64_t, Entry> watched_;
};

/// Rolling mitigation budget: migrations started in the last window may not
/// exceed budget_fraction of the distinct VMs seen in it (alive now plus
/// exited during the window).
class MitigationBudget {
 public:
  explicit MitigationBudget(QosConfig cfg = {}) : cfg_(cfg) {}

  void NoteExit(int64_t now_ms) { exits_.push_back(now_ms); }
  int Limit(int64_t now_ms, int alive_vms);
  bool TryConsume(int64_t now_ms, int alive_vms);
  int used(int64_t now_ms);

 private:
  void Prune(int64_t now_ms);

  QosConfig cfg_;
  std::deque<int64_t> exits_;
  std::deque<int64_t> migrations_;
};

}  // namespace poolsim::control
