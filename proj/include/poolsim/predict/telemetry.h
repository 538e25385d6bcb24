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
#include <vector>

#include "poolsim/trace/vm_request.h"

namespace poolsim::predict {

/// Counter-derived view of a workload, the only sensitivity signal policies
/// get to see.
struct SensitivityFeatures {
  double dram_bound = 0;    // share of cycles stalled on DRAM
  double memory_bound = 0;  // share of pipeline slots stalled on memory
  double noise = 0;         // an uninformative counter

  static constexpr int kCount = 3;
  double operator[](int i) const { return i == 0 ? dram_bound : i == 1 ? memory_bound : noise; }
};

const char* FeatureName(int index);

/// Parameters of the synthetic counters. Both fractions grow with the VM's
/// true full-pool slowdown under `reference_scenario`, with multiplicative
/// log-normal noise; memory_bound is the noisier of the two.
struct TelemetryConfig {
  std::string reference_scenario = "182";
  double slowdown_scale = 3.0;
  double dram_sigma = 1.0;
  double dram_floor_sigma = 0.005;
  double memory_base = 0.05;
  double memory_gain = 1.5;
  double memory_sigma = 1.3;
  double memory_floor_sigma = 0.01;
  uint64_t seed = 0x7e1e;
};

/// Deterministic per (config.seed, vm_id).
SensitivityFeatures SynthesizeFeatures(const trace::VmRequest& vm, const TelemetryConfig& cfg);

/// Features plus the truth needed to label them.
struct LabeledSample {
  SensitivityFeatures features;
  double slowdown = 0;  // full-pool slowdown under the labeling scenario

  bool Sensitive(double pdm) const { return slowdown > pdm; }
};

/// Up to `max_samples` VMs of `trace`, chosen by a seeded shuffle, labeled
/// with their slowdown under `scenario`. Throws ConfigError for an unknown
/// scenario.
std::vector<LabeledSample> BuildLabeledSet(const trace::Trace& trace, const std::string& scenario,
                                           size_t max_samples, const TelemetryConfig& cfg,
                                           uint64_t seed);

}  // namespace poolsim::predict
