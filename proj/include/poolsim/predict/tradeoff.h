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

#include <vector>

namespace poolsim::predict {

/// One calibration outcome: running the model at `knob` achieved `rate`
/// (percent mispredicted) and `value` (percent gained).
struct CurvePoint {
  double rate = 0;
  double value = 0;
  double knob = 0;

  bool operator==(const CurvePoint&) const = default;
};

/// Monotone step curve. Construction sorts points by rate and replaces each
/// value with the running maximum, keeping the knob that first achieved it.
class TradeoffCurve {
 public:
  TradeoffCurve() = default;
  /// Throws ArgumentError for rates or values outside [0, 100].
  explicit TradeoffCurve(std::vector<CurvePoint> points);

  const std::vector<CurvePoint>& points() const { return points_; }
  bool empty() const { return points_.empty(); }

  /// Best value achievable with rate <= `rate`; 0 if no point qualifies.
  double ValueAt(double rate) const;
  /// Knob of the point that ValueAt() used; `fallback` if none.
  double KnobAt(double rate, double fallback) const;

  bool operator==(const TradeoffCurve&) const = default;

 private:
  const CurvePoint* Find(double rate) const;

  std::vector<CurvePoint> points_;
};

struct TradeoffCurves {
  TradeoffCurve li_of_fp;  // % workloads labeled insensitive vs. FP rate
  TradeoffCurve um_of_op;  // % memory predicted untouched vs. OP rate

  bool operator==(const TradeoffCurves&) const = default;
};

struct CombinedConfig {
  double pdm = 0.05;  // allowed slowdown fraction
  double tp = 98.0;   // percent of VMs that must stay within the PDM

  double budget_pct() const { return 100.0 - tp; }
};

/// Throws ConfigError unless pdm is in (0, 0.25] and tp in (50, 100].
void ValidateCombinedConfig(const CombinedConfig& cfg);

struct CombinedSolution {
  double fp = 0;
  double op = 0;
  double objective = 0;
  double li = 0;
  double um = 0;

  /// Share of DRAM placed on the pool: insensitive VMs go entirely to the
  /// pool and the rest spill their predicted untouched memory.
  double PoolSharePct() const { return li + (100.0 - li) * um / 100.0; }
};

/// Grid step of the optimizer, in percentage points.
inline constexpr double kGridStep = 0.1;

/// Maximizes LI(fp) + UM(op) over fp, op on the 0.1 grid with fp + op <=
/// 100 - tp. Ties go to smaller fp, then smaller op.
CombinedSolution SolveCombined(const TradeoffCurves& curves, const CombinedConfig& cfg);

}  // namespace poolsim::predict
