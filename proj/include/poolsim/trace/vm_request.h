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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace poolsim::trace {

/// Per-VM behaviour that the simulator knows but policies never see
/// directly. Predictors only receive telemetry-derived views of it.
struct WorkloadGroundTruth {
  /// Minimum fraction of the VM's memory left untouched over its lifetime.
  double untouched_fraction = 0.0;
  /// Latency scenario name -> slowdown when 100% of the touched memory is
  /// served from the pool.
  std::map<std::string, double, std::less<>> slowdown_full_pool;
  /// Shape of slowdown versus spill: slowdown = full * spill^exponent.
  double curve_exponent = 1.0;

  bool operator==(const WorkloadGroundTruth&) const = default;
};

struct VmRequest {
  uint64_t vm_id = 0;
  std::string customer_id;
  std::string vm_type;
  int64_t arrival_s = 0;
  int64_t lifetime_s = 1;
  int cores = 1;
  int memory_gb = 1;
  std::optional<int> server_hint;
  WorkloadGroundTruth ground_truth;

  int64_t exit_s() const { return arrival_s + lifetime_s; }
  double touched_gb() const {
    return memory_gb * (1.0 - ground_truth.untouched_fraction);
  }

  bool operator==(const VmRequest&) const = default;
};

using Trace = std::vector<VmRequest>;

/// Throws ValidationError when a record breaks a field invariant.
void Validate(const VmRequest& vm);

/// Throws ValidationError on a bad record, a duplicate vm_id, or arrivals
/// that go backwards.
void ValidateTrace(const Trace& trace);

/// Slowdown of a VM whose touched memory is `spill` fraction pool-resident.
/// Throws ArgumentError for spill outside [0, 1] and ConfigError for a
/// scenario the ground truth does not carry.
double SlowdownAt(const WorkloadGroundTruth& gt, double spill, std::string_view scenario);

}  // namespace poolsim::trace
