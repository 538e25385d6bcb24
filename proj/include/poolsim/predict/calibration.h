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
#include <span>
#include <string>
#include <vector>

#include "poolsim/predict/sensitivity_model.h"
#include "poolsim/predict/telemetry.h"
#include "poolsim/predict/tradeoff.h"
#include "poolsim/predict/untouched_model.h"
#include "poolsim/trace/vm_request.h"

namespace poolsim::predict {

inline constexpr size_t kMinLabeledSamples = 100;

struct CalibrationConfig {
  std::string scenario = "182";
  CombinedConfig combined;
  ClassifierKind classifier = ClassifierKind::kForest;
  ForestConfig forest;
  TelemetryConfig telemetry;
  size_t labeled_samples = 4000;
  int min_history = 1;
  int64_t history_window_s = 7 * kSecondsPerDay;
  /// Target overprediction percentages swept for the UM curve.
  std::vector<double> op_grid = {0.1, 0.25, 0.5, 1, 1.5, 2, 2.5, 3, 4, 5, 6, 8, 10,
                                 12.5, 15, 20, 25, 30, 40, 50};
  uint64_t seed = 1;
};

struct CustomerSummary {
  size_t n = 0;
  std::map<double, double> percentiles;  // percentile -> untouched fraction

  bool operator==(const CustomerSummary&) const = default;
};

/// Everything a scheduler needs, frozen: the classifier with its chosen
/// threshold, the untouched model at its chosen target, and the curves and
/// solution they came from.
struct ModelSnapshot {
  std::string scenario;
  CombinedConfig combined;
  SensitivityModel classifier;
  TelemetryConfig telemetry;
  UntouchedModel untouched;
  int64_t history_window_s = 7 * kSecondsPerDay;
  TradeoffCurves curves;
  CombinedSolution solution;
  std::map<std::string, CustomerSummary> customers;
  size_t labeled_samples = 0;
};

/// Sweeps every distinct score as a threshold (plus +inf).
TradeoffCurve LiCurveFromScores(std::span<const double> scores, std::span<const char> sensitive);

/// UM curve from a nightly-history replay of `trace`, one point per target in
/// `op_grid` plus the origin (model disabled).
TradeoffCurve UmCurveFromTrace(const trace::Trace& trace, std::span<const double> op_grid,
                               int min_history, int64_t window_s);

/// Throws CalibrationError when fewer than kMinLabeledSamples VMs are
/// available and ConfigError for invalid settings.
ModelSnapshot Calibrate(const trace::Trace& trace, const CalibrationConfig& cfg);

/// Re-solves the optimizer for `combined` (which must keep the snapshot's
/// PDM) and sets the classifier threshold and untouched target accordingly.
void ApplyCombined(ModelSnapshot& snapshot, const CombinedConfig& combined);

}  // namespace poolsim::predict
