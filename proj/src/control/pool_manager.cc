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

#include "poolsim/control/pool_manager.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "poolsim/common/error.h"

namespace poolsim::control {

PoolManager::PoolManager(int capacity_gb, int n_hosts, int slices_per_emc)
    : slices_per_emc_(slices_per_emc), total_(capacity_gb), ready_(capacity_gb) {
  if (capacity_gb < 0 || slices_per_emc < 1) {
    throw ConfigError("pool capacity must be >= 0 and slices_per_emc >= 1");
  }
  for (int left = capacity_gb; left > 0; left -= slices_per_emc) {
    tables_.emplace_back(std::min(left, slices_per_emc), n_hosts);
  }
  draining_flag_.assign(capacity_gb, 0);
  drain_owner_.assign(capacity_gb, hw::kUnassigned);
}

int PoolManager::buffer_target() const {
  return std::min(total_, std::max(static_cast<int>(std::ceil(0.01 * total_)), 8));
}

std::pair<int, int> PoolManager::Locate(int slice) const {
  if (slice < 0 || slice >= total_) {
    throw ArgumentError(fmt::format("slice {} outside pool of {}", slice, total_));
  }
  return {slice / slices_per_emc_, slice % slices_per_emc_};
}

hw::HostId PoolManager::owner(int slice) const {
  auto [emc, idx] = Locate(slice);
  return tables_[emc].owner(idx);
}

std::vector<int> PoolManager::Assign(hw::HostId host, int k) {
  if (k < 0) throw ArgumentError(fmt::format("cannot assign {} slices", k));
  if (k > ready_) {
    throw CapacityError(fmt::format("pool has {} ready slices, {} requested", ready_, k));
  }
  std::vector<int> out;
  out.reserve(k);
  for (size_t emc = 0; emc < tables_.size() && static_cast<int>(out.size()) < k; ++emc) {
    int take = std::min(k - static_cast<int>(out.size()), tables_[emc].free_count());
    for (int idx : tables_[emc].Assign(host, take)) {
      out.push_back(static_cast<int>(emc) * slices_per_emc_ + idx);
    }
  }
  ready_ -= k;
  return out;
}

std::vector<DrainCompletion> PoolManager::BeginDrain(hw::HostId host, std::span<const int> slices,
                                                     int64_t now_ms, const hw::TimingModel& timing,
                                                     Rng& rng) {
  std::vector<int> sorted(slices.begin(), slices.end());
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size(); ++i) {
    int s = sorted[i];
    if (owner(s) != host || (i > 0 && sorted[i - 1] == s)) {
      throw OwnershipError(fmt::format("host {} cannot offline slice {}", host, s));
    }
    if (draining_flag_[s]) throw StateError(fmt::format("slice {} is already draining", s));
  }
  std::vector<DrainCompletion> out;
  out.reserve(slices.size());
  for (int s : slices) {
    draining_flag_[s] = 1;
    drain_owner_[s] = host;
    ++draining_;
    auto delay = static_cast<int64_t>(std::ceil(timing.SampleOfflineMs(rng)));
    out.push_back({now_ms + delay, s});
  }
  return out;
}

void PoolManager::CompleteDrain(int slice) {
  auto [emc, idx] = Locate(slice);
  if (!draining_flag_[slice]) throw StateError(fmt::format("slice {} is not draining", slice));
  int one[] = {idx};
  tables_[emc].Release(drain_owner_[slice], one);
  draining_flag_[slice] = 0;
  drain_owner_[slice] = hw::kUnassigned;
  --draining_;
  ++ready_;
}

}  // namespace poolsim::control
