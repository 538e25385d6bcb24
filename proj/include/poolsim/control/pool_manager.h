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
#include <span>
#include <vector>

#include "poolsim/hw/pool_topology.h"
#include "poolsim/hw/slice_table.h"

namespace poolsim::control {

/// A slice that finished (or will finish) offlining.
struct DrainCompletion {
  int64_t t_ms;
  int slice;  // pool-wide index
};

/// One memory pool: the slice tables of its controllers plus the buffer
/// state. A slice is ready (unowned), assigned to a host, or draining (still
/// owned while the host offlines it). Slice indices are pool-wide:
/// emc * slices_per_emc + local index.
class PoolManager {
 public:
  /// `capacity_gb` slices spread over ceil(capacity / slices_per_emc)
  /// controllers, each addressable by `n_hosts` hosts.
  PoolManager(int capacity_gb, int n_hosts, int slices_per_emc = 1024);

  int total() const { return total_; }
  int ready() const { return ready_; }
  int draining() const { return draining_; }
  int assigned() const { return total_ - ready_ - draining_; }
  int in_use() const { return total_ - ready_; }  // assigned + draining
  /// Ready slices the manager tries to keep: max(1% of the pool, 8).
  int buffer_target() const;

  /// Lowest-index ready slices. Throws CapacityError if fewer than k ready.
  std::vector<int> Assign(hw::HostId host, int k);
  /// Starts offlining `slices` on `host`; each finishes after its own
  /// sampled delay. Throws OwnershipError for slices not assigned to host.
  std::vector<DrainCompletion> BeginDrain(hw::HostId host, std::span<const int> slices,
                                          int64_t now_ms, const hw::TimingModel& timing, Rng& rng);
  /// Releases a drained slice back to the ready set.
  void CompleteDrain(int slice);

  hw::HostId owner(int slice) const;
  bool is_draining(int slice) const { return draining_flag_[slice]; }
  const std::vector<hw::SliceTable>& tables() const { return tables_; }

 private:
  std::pair<int, int> Locate(int slice) const;

  int slices_per_emc_;
  int total_;
  int ready_;
  int draining_ = 0;
  std::vector<hw::SliceTable> tables_;
  std::vector<char> draining_flag_;
  std::vector<hw::HostId> drain_owner_;
};

}  // namespace poolsim::control
