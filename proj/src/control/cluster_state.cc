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

#include "poolsim/control/cluster_state.h"

#include <algorithm>

#include <fmt/format.h>

#include "poolsim/common/error.h"

namespace poolsim::control {

void ValidateClusterConfig(const ClusterConfig& cfg) {
  if (cfg.n_servers < 1 || cfg.cores_per_server < 1 || cfg.local_dram_gb < 1) {
    throw ConfigError("cluster needs servers with cores and local DRAM");
  }
  if (cfg.servers_per_cluster < 1 || cfg.n_servers % cfg.servers_per_cluster != 0) {
    throw ConfigError(fmt::format("servers_per_cluster {} must divide n_servers {}",
                                  cfg.servers_per_cluster, cfg.n_servers));
  }
  hw::MakeTopology(cfg.pool_sockets, 0);  // validates the socket count
  if (cfg.servers_per_cluster % cfg.pool_sockets != 0) {
    throw ConfigError(fmt::format("pool size {} does not divide cluster size {}",
                                  cfg.pool_sockets, cfg.servers_per_cluster));
  }
  if (cfg.pool_gb_per_socket < 0) throw ConfigError("pool_gb_per_socket must be >= 0");
  if (cfg.slices_per_emc < 1) throw ConfigError("slices_per_emc must be >= 1");
  hw::ValidateScenario(hw::FindScenario(cfg.scenario));
  hw::ValidateTiming(cfg.timing);
}

double ZnumaSpill(int memory_gb, double untouched_fraction, int local_gb) {
  double touched = memory_gb * (1.0 - untouched_fraction);
  if (touched <= 0.0) return 0.0;
  return std::clamp((touched - local_gb) / touched, 0.0, 1.0);
}

ClusterState::ClusterState(const ClusterConfig& cfg) : cfg_(cfg) {
  ValidateClusterConfig(cfg_);
  servers_.assign(cfg_.n_servers, {cfg_.cores_per_server, cfg_.local_dram_gb, 0});
  for (int p = 0; p < cfg_.n_pools(); ++p) {
    pools_.emplace_back(cfg_.pool_capacity_gb(), cfg_.pool_sockets, cfg_.slices_per_emc);
  }
  peak_local_.assign(cfg_.n_servers, 0);
  peak_resident_.assign(cfg_.n_servers, 0);
  peak_pool_.assign(cfg_.n_pools(), 0);
}

void ClusterState::Reserve(int server, int cores, int local_gb, int resident_gb) {
  ServerState& s = servers_[server];
  if (cores > s.free_cores || local_gb > s.free_local_gb) {
    throw StateError(fmt::format("server {} over-committed ({} cores, {} GB requested)", server,
                                 cores, local_gb));
  }
  s.free_cores -= cores;
  s.free_local_gb -= local_gb;
  s.resident_gb += resident_gb;
  peak_local_[server] = std::max(peak_local_[server], cfg_.local_dram_gb - s.free_local_gb);
  peak_resident_[server] = std::max(peak_resident_[server], s.resident_gb);
}

void ClusterState::Free(int server, int cores, int local_gb, int resident_gb) {
  ServerState& s = servers_[server];
  s.free_cores += cores;
  s.free_local_gb += local_gb;
  s.resident_gb -= resident_gb;
  if (s.free_cores > cfg_.cores_per_server || s.free_local_gb > cfg_.local_dram_gb ||
      s.resident_gb < 0) {
    throw StateError(fmt::format("server {} released more than it held", server));
  }
}

void ClusterState::NotePool(int pool) {
  peak_pool_[pool] = std::max(peak_pool_[pool], pools_[pool].in_use());
}

void ClusterState::StartMeasuring() {
  for (int s = 0; s < cfg_.n_servers; ++s) {
    peak_local_[s] = cfg_.local_dram_gb - servers_[s].free_local_gb;
    peak_resident_[s] = servers_[s].resident_gb;
  }
  for (size_t p = 0; p < pools_.size(); ++p) peak_pool_[p] = pools_[p].in_use();
}

void ClusterState::CheckInvariants() const {
  for (size_t i = 0; i < servers_.size(); ++i) {
    const auto& s = servers_[i];
    if (s.free_cores < 0 || s.free_cores > cfg_.cores_per_server || s.free_local_gb < 0 ||
        s.free_local_gb > cfg_.local_dram_gb || s.resident_gb < 0) {
      throw StateError(fmt::format("server {} capacity out of range", i));
    }
  }
  for (size_t p = 0; p < pools_.size(); ++p) {
    const auto& pool = pools_[p];
    int owned = 0, free = 0;
    for (const auto& t : pool.tables()) {
      free += t.free_count();
      owned += t.n_slices() - t.free_count();
    }
    if (pool.ready() != free || pool.assigned() + pool.draining() != owned ||
        pool.ready() + pool.assigned() + pool.draining() != pool.total() || pool.ready() < 0 ||
        pool.draining() < 0 || pool.assigned() < 0) {
      throw StateError(fmt::format("pool {} slice accounting broken", p));
    }
  }
}

}  // namespace poolsim::control
