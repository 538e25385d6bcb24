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
#include <string>
#include <unordered_map>
#include <vector>

#include "poolsim/control/pool_manager.h"
#include "poolsim/hw/pool_topology.h"
#include "poolsim/trace/vm_request.h"

namespace poolsim::control {

struct ClusterConfig {
  int n_servers = 128;
  /// Servers are grouped into clusters of this size; fallback placement
  /// never leaves the VM's cluster.
  int servers_per_cluster = 64;
  int cores_per_server = 48;
  int local_dram_gb = 384;
  /// Sockets (servers) sharing one pool.
  int pool_sockets = 16;
  int pool_gb_per_socket = 192;
  int slices_per_emc = 1024;
  std::string scenario = "182";
  hw::TimingModel timing;
  hw::LatencyModel latency;

  int n_pools() const { return n_servers / pool_sockets; }
  int pool_of(int server) const { return server / pool_sockets; }
  hw::HostId host_of(int server) const { return server % pool_sockets; }
  int cluster_of(int server) const { return server / servers_per_cluster; }
  int pool_capacity_gb() const { return pool_sockets * pool_gb_per_socket; }
};

/// Throws ConfigError (unsupported pool size, pool size not dividing the
/// cluster, unknown scenario, bad timing).
void ValidateClusterConfig(const ClusterConfig& cfg);

struct MemorySplit {
  int local_gb = 0;
  int pool_gb = 0;  // size of the zero-core NUMA node
  std::vector<int> source_slices;
};

/// Share of the VM's touched memory that lands on the pool when the guest
/// fills local memory first: max(0, touched - local) / touched.
double ZnumaSpill(int memory_gb, double untouched_fraction, int local_gb);

struct ServerState {
  int free_cores = 0;
  int free_local_gb = 0;
  int resident_gb = 0;  // full memory of resident VMs (the all-local demand)
};

struct VmState {
  const trace::VmRequest* request = nullptr;
  int server = -1;
  MemorySplit split;
  int64_t start_ms = 0;
  double spill = 0;
  double slowdown = 0;
  bool predicted_insensitive = false;
  double predicted_untouched = 0;
  bool migrating = false;
  bool migrated = false;
};

/// Capacity bookkeeping for servers and pools plus the peaks that define
/// provisioned DRAM. Every mutation keeps capacities nonnegative and throws
/// StateError otherwise.
class ClusterState {
 public:
  explicit ClusterState(const ClusterConfig& cfg);

  const ClusterConfig& config() const { return cfg_; }
  const std::vector<ServerState>& servers() const { return servers_; }
  std::vector<PoolManager>& pools() { return pools_; }
  const std::vector<PoolManager>& pools() const { return pools_; }
  PoolManager& pool_for(int server) { return pools_[cfg_.pool_of(server)]; }

  void Reserve(int server, int cores, int local_gb, int resident_gb);
  void Free(int server, int cores, int local_gb, int resident_gb);
  /// Call after any pool change to refresh the pool peak.
  void NotePool(int pool);
  /// Resets every peak to the current occupancy.
  void StartMeasuring();

  const std::vector<int>& peak_local_gb() const { return peak_local_; }
  const std::vector<int>& peak_resident_gb() const { return peak_resident_; }
  const std::vector<int>& peak_pool_gb() const { return peak_pool_; }

  /// Full scan of capacity and slice conservation; throws StateError.
  void CheckInvariants() const;

 private:
  ClusterConfig cfg_;
  std::vector<ServerState> servers_;
  std::vector<PoolManager> pools_;
  std::vector<int> peak_local_, peak_resident_, peak_pool_;
};

}  // namespace poolsim::control
