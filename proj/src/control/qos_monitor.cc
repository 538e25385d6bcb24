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

#include "poolsim/control/qos_monitor.h"

#include <cmath>

#include "poolsim/common/error.h"

namespace poolsim::control {

void ValidateQosConfig(const QosConfig& cfg) {
  if (cfg.period_ms < 1) throw ConfigError("qos period_ms must be >= 1");
  if (!(cfg.noise_sigma >= 0)) throw ConfigError("qos noise_sigma must be >= 0");
  if (cfg.min_observations < 1 || cfg.settle_observations < cfg.min_observations) {
    throw ConfigError("qos needs 1 <= min_observations <= settle_observations");
  }
  if (!(cfg.budget_fraction >= 0 && cfg.budget_fraction <= 1)) {
    throw ConfigError("mitigation budget_fraction must be in [0, 1]");
  }
  if (cfg.budget_window_ms < 1) throw ConfigError("mitigation budget_window_ms must be >= 1");
}

void QosMonitor::Watch(uint64_t vm_id, double true_slowdown) {
  watched_.insert_or_assign(vm_id, Entry{true_slowdown});
}

std::vector<uint64_t> QosMonitor::Tick(double pdm, Rng& rng) {
  std::vector<uint64_t> flagged;
  for (auto it = watched_.begin(); it != watched_.end();) {
    Entry& e = it->second;
    e.sum += e.truth + cfg_.noise_sigma * StandardNormal(rng);
    ++e.n;
    double mean = e.sum / e.n;
    if (e.n >= cfg_.min_observations && mean > pdm) {
      flagged.push_back(it->first);
    } else if (e.n >= cfg_.settle_observations && mean < pdm) {
      it = watched_.erase(it);
      continue;
    }
    ++it;
  }
  return flagged;
}

void MitigationBudget::Prune(int64_t now_ms) {
  int64_t cutoff = now_ms - cfg_.budget_window_ms;
  while (!exits_.empty() && exits_.front() <= cutoff) exits_.pop_front();
  while (!migrations_.empty() && migrations_.front() <= cutoff) migrations_.pop_front();
}

int MitigationBudget::Limit(int64_t now_ms, int alive_vms) {
  Prune(now_ms);
  double distinct = static_cast<double>(alive_vms) + static_cast<double>(exits_.size());
  return static_cast<int>(std::floor(cfg_.budget_fraction * distinct + 1e-9));
}

bool MitigationBudget::TryConsume(int64_t now_ms, int alive_vms) {
  if (static_cast<int>(migrations_.size()) >= Limit(now_ms, alive_vms)) return false;
  migrations_.push_back(now_ms);
  return true;
}

int MitigationBudget::used(int64_t now_ms) {
  Prune(now_ms);
  return static_cast<int>(migrations_.size());
}

}  // namespace poolsim::control
