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

#include "poolsim/predict/telemetry.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "poolsim/common/error.h"
#include "poolsim/common/rng.h"

namespace poolsim::predict {

const char* FeatureName(int index) {
  static const char* kNames[] = {"dram_bound", "memory_bound", "noise"};
  return kNames[index];
}

SensitivityFeatures SynthesizeFeatures(const trace::VmRequest& vm, const TelemetryConfig& cfg) {
  auto it = vm.ground_truth.slowdown_full_pool.find(cfg.reference_scenario);
  if (it == vm.ground_truth.slowdown_full_pool.end()) {
    throw ConfigError(fmt::format("vm {} has no slowdown for scenario '{}'", vm.vm_id,
                                  cfg.reference_scenario));
  }
  Rng rng = MakeRng(cfg.seed, vm.vm_id);
  const double latent = it->second / cfg.slowdown_scale;
  SensitivityFeatures f;
  f.dram_bound = latent * std::exp(cfg.dram_sigma * StandardNormal(rng)) +
                 std::abs(cfg.dram_floor_sigma * StandardNormal(rng));
  f.memory_bound = cfg.memory_base +
                   cfg.memory_gain * latent * std::exp(cfg.memory_sigma * StandardNormal(rng)) +
                   std::abs(cfg.memory_floor_sigma * StandardNormal(rng));
  f.noise = UniformUnit(rng);
  f.dram_bound = std::clamp(f.dram_bound, 0.0, 1.0);
  f.memory_bound = std::clamp(f.memory_bound, 0.0, 1.0);
  return f;
}

std::vector<LabeledSample> BuildLabeledSet(const trace::Trace& trace, const std::string& scenario,
                                           size_t max_samples, const TelemetryConfig& cfg,
                                           uint64_t seed) {
  std::vector<size_t> idx(trace.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = MakeRng(seed, 0x1abe1);
  for (size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[static_cast<size_t>(UniformUnit(rng) * i)]);
  }
  idx.resize(std::min(max_samples, idx.size()));
  std::vector<LabeledSample> out;
  out.reserve(idx.size());
  for (size_t i : idx) {
    const auto& vm = trace[i];
    auto s = vm.ground_truth.slowdown_full_pool.find(scenario);
    if (s == vm.ground_truth.slowdown_full_pool.end()) {
      throw ConfigError(fmt::format("vm {} has no slowdown for scenario '{}'", vm.vm_id, scenario));
    }
    out.push_back({SynthesizeFeatures(vm, cfg), s->second});
  }
  return out;
}

}  // namespace poolsim::predict
