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

#include "poolsim/hw/pool_topology.h"

#include <algorithm>

#include <fmt/format.h>

#include "poolsim/common/error.h"

namespace poolsim::hw {
namespace {

bool SupportedSockets(int n) { return n == 8 || n == 16 || n == 32 || n == 64; }

}  // namespace

PoolTopology MakeTopology(int pool_sockets, int pool_gb, int slices_per_emc) {
  if (!SupportedSockets(pool_sockets)) {
    throw ConfigError(fmt::format("unsupported pool size {} (expected 8, 16, 32 or 64)", pool_sockets));
  }
  if (pool_gb < 0) throw ConfigError("pool capacity must be >= 0");
  if (slices_per_emc < 1) throw ConfigError("slices_per_emc must be >= 1");
  PoolTopology t;
  t.pool_sockets = pool_sockets;
  t.slices_per_emc = slices_per_emc;
  t.emcs_per_pool = std::max(1, (pool_gb + slices_per_emc - 1) / slices_per_emc);
  t.uses_switch = pool_sockets > kMaxDirectSockets;
  t.uses_retimers = t.uses_switch;
  return t;
}

void ValidateTopology(const PoolTopology& topo) {
  if (!SupportedSockets(topo.pool_sockets)) {
    throw ConfigError(fmt::format("unsupported pool size {}", topo.pool_sockets));
  }
  if (topo.uses_switch != (topo.pool_sockets > kMaxDirectSockets)) {
    throw ConfigError(fmt::format("pool of {} sockets {} a switch", topo.pool_sockets,
                                  topo.uses_switch ? "must not use" : "requires"));
  }
  if (topo.emcs_per_pool < 1 || topo.slices_per_emc < 1) {
    throw ConfigError("pool needs at least one controller with one slice");
  }
}

const std::vector<LatencyScenario>& BuiltinScenarios() {
  static const std::vector<LatencyScenario> kScenarios = {
      {"182", 78.0, 142.0},
      {"222", 115.0, 255.0},
  };
  return kScenarios;
}

const LatencyScenario& FindScenario(std::string_view name) {
  for (const auto& s : BuiltinScenarios()) {
    if (s.name == name) return s;
  }
  throw ConfigError(fmt::format("unknown latency scenario '{}'", name));
}

void ValidateScenario(const LatencyScenario& s) {
  if (!(s.local_ns > 0.0 && s.pool_ns > s.local_ns)) {
    throw ConfigError(fmt::format("scenario '{}': need 0 < local_ns < pool_ns", s.name));
  }
}

double PoolLatencyNs(const PoolTopology& topo, const LatencyScenario& base,
                     const LatencyModel& model) {
  ValidateTopology(topo);
  ValidateScenario(base);
  auto it = model.added_ns.find(topo.pool_sockets);
  if (it == model.added_ns.end()) {
    throw ConfigError(fmt::format("no latency for pool size {}", topo.pool_sockets));
  }
  return it->second;
}

double TimingModel::SampleOfflineMs(Rng& rng) const {
  return offline_ms_per_gb_min + (offline_ms_per_gb_max - offline_ms_per_gb_min) * UniformUnit(rng);
}

void ValidateTiming(const TimingModel& t) {
  if (!(t.offline_ms_per_gb_min > 0.0 && t.offline_ms_per_gb_max >= t.offline_ms_per_gb_min)) {
    throw ConfigError("offline time range must satisfy 0 < min <= max");
  }
  if (!(t.online_us_per_gb >= 0.0)) throw ConfigError("online cost must be >= 0");
  // 1000x in per-GB cost is the same number in ms as online is in us.
  if (t.offline_ms_per_gb_min < t.online_us_per_gb) {
    throw ConfigError("offlining must be at least 1000x slower than onlining per GB");
  }
  if (!(t.migration_ms_per_pool_gb >= 0.0)) throw ConfigError("migration cost must be >= 0");
}

}  // namespace poolsim::hw
