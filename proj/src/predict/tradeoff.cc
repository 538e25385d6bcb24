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

#include "poolsim/predict/tradeoff.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "poolsim/common/error.h"

namespace poolsim::predict {
namespace {

constexpr double kRateSlack = 1e-9;

bool InPercentRange(double x) { return x >= 0.0 && x <= 100.0; }

}  // namespace

TradeoffCurve::TradeoffCurve(std::vector<CurvePoint> points) {
  for (const auto& p : points) {
    if (!InPercentRange(p.rate) || !InPercentRange(p.value)) {
      throw ArgumentError(fmt::format("curve point ({}, {}) outside [0,100]", p.rate, p.value));
    }
  }
  std::stable_sort(points.begin(), points.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return a.rate != b.rate ? a.rate < b.rate : a.value > b.value;
  });
  for (const auto& p : points) {
    if (!points_.empty() && p.value <= points_.back().value) continue;
    points_.push_back(p);
  }
}

const CurvePoint* TradeoffCurve::Find(double rate) const {
  auto it = std::upper_bound(points_.begin(), points_.end(), rate + kRateSlack,
                             [](double r, const CurvePoint& p) { return r < p.rate; });
  if (it == points_.begin()) return nullptr;
  return &*std::prev(it);
}

double TradeoffCurve::ValueAt(double rate) const {
  const CurvePoint* p = Find(rate);
  return p ? p->value : 0.0;
}

double TradeoffCurve::KnobAt(double rate, double fallback) const {
  const CurvePoint* p = Find(rate);
  return p ? p->knob : fallback;
}

void ValidateCombinedConfig(const CombinedConfig& cfg) {
  if (!(cfg.pdm > 0.0 && cfg.pdm <= 0.25)) {
    throw ConfigError(fmt::format("pdm {} outside (0, 0.25]", cfg.pdm));
  }
  if (!(cfg.tp > 50.0 && cfg.tp <= 100.0)) {
    throw ConfigError(fmt::format("tp {} outside (50, 100]", cfg.tp));
  }
}

CombinedSolution SolveCombined(const TradeoffCurves& curves, const CombinedConfig& cfg) {
  const double budget = std::max(0.0, cfg.budget_pct());
  const int steps = static_cast<int>(std::floor(budget / kGridStep + 1e-9));

  std::vector<double> li(steps + 1), um(steps + 1);
  std::vector<int> um_first(steps + 1);  // smallest op index reaching um[j]
  for (int i = 0; i <= steps; ++i) {
    li[i] = curves.li_of_fp.ValueAt(i / 10.0);
    um[i] = curves.um_of_op.ValueAt(i / 10.0);
    um_first[i] = (i > 0 && um[i] == um[i - 1]) ? um_first[i - 1] : i;
  }
  // Both curves are nondecreasing, so for a given fp the best op is the
  // whole remaining budget, or the earliest op reaching the same value.
  int best_i = 0, best_j = um_first[steps];
  double best = li[0] + um[steps];
  for (int i = 1; i <= steps; ++i) {
    int j = um_first[steps - i];
    double v = li[i] + um[j];
    if (v > best) {
      best = v;
      best_i = i;
      best_j = j;
    }
  }
  CombinedSolution s;
  s.fp = best_i / 10.0;
  s.op = best_j / 10.0;
  s.li = li[best_i];
  s.um = um[best_j];
  s.objective = best;
  return s;
}

}  // namespace poolsim::predict
