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

#include "poolsim/trace/vm_request.h"

#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "poolsim/common/error.h"

namespace poolsim::trace {

void Validate(const VmRequest& vm) {
  auto fail = [&](std::string_view what) {
    throw ValidationError(fmt::format("vm {}: {}", vm.vm_id, what));
  };
  if (vm.lifetime_s <= 0) fail("lifetime must be > 0");
  if (vm.cores < 1) fail("cores must be >= 1");
  if (vm.memory_gb < 1) fail("memory_gb must be >= 1");
  if (vm.arrival_s < 0) fail("arrival must be >= 0");
  const auto& gt = vm.ground_truth;
  if (!(gt.untouched_fraction >= 0.0 && gt.untouched_fraction <= 1.0)) {
    fail("untouched_fraction outside [0,1]");
  }
  if (!(gt.curve_exponent > 0.0) || !std::isfinite(gt.curve_exponent)) {
    fail("curve_exponent must be positive");
  }
  for (const auto& [name, s] : gt.slowdown_full_pool) {
    if (!(s >= 0.0) || !std::isfinite(s)) fail(fmt::format("slowdown_{} must be >= 0", name));
  }
}

void ValidateTrace(const Trace& trace) {
  std::unordered_set<uint64_t> ids;
  ids.reserve(trace.size());
  int64_t last_arrival = 0;
  for (size_t i = 0; i < trace.size(); ++i) {
    const VmRequest& vm = trace[i];
    Validate(vm);
    if (!ids.insert(vm.vm_id).second) {
      throw ValidationError(fmt::format("duplicate vm_id {}", vm.vm_id));
    }
    if (i > 0 && vm.arrival_s < last_arrival) {
      throw ValidationError(fmt::format("vm {}: arrival {} precedes previous arrival {}",
                                        vm.vm_id, vm.arrival_s, last_arrival));
    }
    last_arrival = vm.arrival_s;
  }
}

double SlowdownAt(const WorkloadGroundTruth& gt, double spill, std::string_view scenario) {
  if (!(spill >= 0.0 && spill <= 1.0)) {
    throw ArgumentError(fmt::format("spill {} outside [0,1]", spill));
  }
  auto it = gt.slowdown_full_pool.find(scenario);
  if (it == gt.slowdown_full_pool.end()) {
    throw ConfigError(fmt::format("unknown latency scenario '{}'", scenario));
  }
  if (spill == 0.0) return 0.0;
  return it->second * std::pow(spill, gt.curve_exponent);
}

}  // namespace poolsim::trace
