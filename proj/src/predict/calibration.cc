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

#include "poolsim/predict/calibration.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "poolsim/common/error.h"

namespace poolsim::predict {

TradeoffCurve LiCurveFromScores(std::span<const double> scores, std::span<const char> sensitive) {
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  const double n = static_cast<double>(scores.size());
  std::vector<CurvePoint> points;
  size_t below = 0, fp_below = 0;
  size_t i = 0;
  while (i < order.size()) {
    double s = scores[order[i]];
    points.push_back({100.0 * fp_below / n, 100.0 * below / n, s});
    while (i < order.size() && scores[order[i]] == s) {
      ++below;
      fp_below += sensitive[order[i]];
      ++i;
    }
  }
  if (n > 0) {
    points.push_back({100.0 * fp_below / n, 100.0 * below / n,
                      std::numeric_limits<double>::infinity()});
  }
  return TradeoffCurve(std::move(points));
}

TradeoffCurve UmCurveFromTrace(const trace::Trace& trace, std::span<const double> op_grid,
                               int min_history, int64_t window_s) {
  std::vector<UntouchedModel> models;
  for (double p : op_grid) {
    if (!(p > 0.0 && p <= 50.0)) throw ConfigError(fmt::format("op target {} outside (0,50]", p));
    models.push_back({p, min_history});
  }
  auto evals = EvaluateUntouched(trace, models, window_s);
  std::vector<CurvePoint> points = {{0.0, 0.0, 0.0}};
  for (size_t m = 0; m < models.size(); ++m) {
    points.push_back({evals[m].op_rate_pct, evals[m].um_pct, models[m].target_op});
  }
  return TradeoffCurve(std::move(points));
}

ModelSnapshot Calibrate(const trace::Trace& trace, const CalibrationConfig& cfg) {
  ValidateCombinedConfig(cfg.combined);
  if (cfg.min_history < 1) throw ConfigError("min_history must be >= 1");
  if (cfg.history_window_s < 1) throw ConfigError("history window must be >= 1 s");
  auto samples = BuildLabeledSet(trace, cfg.scenario, cfg.labeled_samples, cfg.telemetry, cfg.seed);
  if (samples.size() < kMinLabeledSamples) {
    throw CalibrationError(fmt::format("need at least {} labeled samples, have {}",
                                       kMinLabeledSamples, samples.size()));
  }

  ModelSnapshot snap;
  snap.scenario = cfg.scenario;
  snap.combined = cfg.combined;
  snap.telemetry = cfg.telemetry;
  snap.history_window_s = cfg.history_window_s;
  snap.labeled_samples = samples.size();
  snap.untouched.min_history = cfg.min_history;

  std::span<const LabeledSample> calib = samples;
  if (cfg.classifier == ClassifierKind::kForest) {
    size_t half = samples.size() / 2;
    snap.classifier = SensitivityModel::TrainForest(
        std::span<const LabeledSample>(samples).first(half), cfg.combined.pdm, cfg.forest);
    calib = std::span<const LabeledSample>(samples).subspan(half);
  }
  std::vector<double> scores;
  std::vector<char> labels;
  for (const auto& s : calib) {
    scores.push_back(snap.classifier.Score(s.features));
    labels.push_back(s.Sensitive(cfg.combined.pdm));
  }
  snap.curves.li_of_fp = LiCurveFromScores(scores, labels);
  snap.curves.um_of_op =
      UmCurveFromTrace(trace, cfg.op_grid, cfg.min_history, cfg.history_window_s);

  // Per-customer tables as of the end of the trace.
  UntouchedHistory history(cfg.history_window_s);
  int64_t end = 0;
  for (const auto& vm : trace) end = std::max(end, vm.exit_s());
  for (const auto& vm : trace) {
    history.Add(vm.customer_id, vm.exit_s(), vm.ground_truth.untouched_fraction);
  }
  history.Commit(end);
  for (const auto& c : history.Customers()) {
    snap.customers[c] = {history.Count(c), history.Summary(c)};
  }

  ApplyCombined(snap, cfg.combined);
  return snap;
}

void ApplyCombined(ModelSnapshot& snapshot, const CombinedConfig& combined) {
  ValidateCombinedConfig(combined);
  if (std::abs(combined.pdm - snapshot.combined.pdm) > 1e-12) {
    throw ConfigError(fmt::format("models were calibrated for pdm {}, policy asks for {}",
                                  snapshot.combined.pdm, combined.pdm));
  }
  snapshot.combined = combined;
  snapshot.solution = SolveCombined(snapshot.curves, combined);
  snapshot.classifier.set_threshold(snapshot.curves.li_of_fp.KnobAt(
      snapshot.solution.fp, -std::numeric_limits<double>::infinity()));
  snapshot.untouched.target_op = snapshot.curves.um_of_op.KnobAt(snapshot.solution.op, 0.0);
}

}  // namespace poolsim::predict
