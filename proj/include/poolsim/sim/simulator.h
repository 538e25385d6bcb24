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
#include <optional>
#include <string>
#include <vector>

#include "poolsim/control/control_plane.h"
#include "poolsim/sim/metrics.h"

namespace poolsim::sim {

struct SimOptions {
  control::ControlConfig control;
  /// Peaks are taken over [warmup, end] so predictive runs are measured
  /// once customer history exists. Applied equally to every policy.
  int64_t warmup_s = 0;
  /// Keep every control-plane event (needed for event-log checks).
  bool record_events = false;
};

struct SimResult {
  SimMetrics metrics;
  control::EventLog events;
};

/// Throws ValidationError for unsorted traces, VMs that cannot fit an empty
/// server, hints outside the cluster and missing scenario ground truth.
void ValidateRun(const trace::Trace& trace, const control::ClusterConfig& cluster);

/// Runs `policy` over `trace`; deterministic for fixed inputs.
SimResult RunSimulation(const trace::Trace& trace, const SimOptions& options,
                        const std::optional<predict::ModelSnapshot>& model = std::nullopt);

/// One independent run of a batch.
struct RunSpec {
  SimOptions options;
  std::optional<predict::ModelSnapshot> model;
};

/// Runs every spec on up to `jobs` threads; results keep input order.
std::vector<SimResult> RunMany(const trace::Trace& trace, const std::vector<RunSpec>& specs,
                               int jobs = 1);

/// Runs `base` once per pool size; throws ConfigError when a size does not
/// divide the cluster. Results are ordered by size.
std::vector<SimMetrics> SweepPoolSizes(const trace::Trace& trace, const SimOptions& base,
                                       std::vector<int> sizes,
                                       const std::optional<predict::ModelSnapshot>& model =
                                           std::nullopt,
                                       int jobs = 1);

/// One metrics row per spec, all on the same trace.
std::vector<SimMetrics> ComparePolicies(const trace::Trace& trace,
                                        const std::vector<RunSpec>& specs, int jobs = 1);

}  // namespace poolsim::sim
