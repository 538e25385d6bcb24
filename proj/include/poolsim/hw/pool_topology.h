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

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "poolsim/common/rng.h"

namespace poolsim::hw {

/// Sockets a single controller can serve without a switch.
inline constexpr int kMaxDirectSockets = 16;

struct PoolTopology {
  int pool_sockets = 16;
  int emcs_per_pool = 1;
  int slices_per_emc = 1024;
  bool uses_switch = false;
  bool uses_retimers = false;

  int total_slices() const { return emcs_per_pool * slices_per_emc; }
};

/// Builds a topology for `pool_sockets` sharing `pool_gb` of pooled memory.
/// Throws ConfigError for socket counts outside {8, 16, 32, 64}.
PoolTopology MakeTopology(int pool_sockets, int pool_gb, int slices_per_emc = 1024);
void ValidateTopology(const PoolTopology& topo);

struct LatencyScenario {
  std::string name;
  double local_ns = 0.0;
  double pool_ns = 0.0;

  double ratio() const { return pool_ns / local_ns; }
};

/// "182" and "222", named after pool latency as a percentage of local.
const std::vector<LatencyScenario>& BuiltinScenarios();
/// Throws ConfigError for an unknown name.
const LatencyScenario& FindScenario(std::string_view name);
void ValidateScenario(const LatencyScenario& s);

/// Added latency over NUMA-local DRAM per pool size.
struct LatencyModel {
  std::map<int, double> added_ns = {{8, 70.0}, {16, 90.0}, {32, 180.0}, {64, 210.0}};
};

/// Nanoseconds added to `base.local_ns` by the pool. Throws ConfigError for
/// unsupported socket counts.
double PoolLatencyNs(const PoolTopology& topo, const LatencyScenario& base,
                     const LatencyModel& model = {});

struct TimingModel {
  double offline_ms_per_gb_min = 10.0;
  double offline_ms_per_gb_max = 100.0;
  double online_us_per_gb = 5.0;
  double migration_ms_per_pool_gb = 50.0;

  /// Per-slice offlining time drawn uniformly from [min, max].
  double SampleOfflineMs(Rng& rng) const;
  double MigrationMs(int pool_gb) const { return migration_ms_per_pool_gb * pool_gb; }
};

/// Throws ConfigError unless 0 < min <= max and offlining is at least 1000x
/// slower per GB than onlining.
void ValidateTiming(const TimingModel& t);

}  // namespace poolsim::hw
