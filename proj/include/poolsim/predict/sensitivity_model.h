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
#include <span>
#include <string_view>
#include <vector>

#include "poolsim/predict/telemetry.h"

namespace poolsim::predict {

enum class ClassifierKind { kThreshold, kForest };

std::string_view ClassifierKindName(ClassifierKind kind);
/// Throws ConfigError for anything but "threshold" or "forest".
ClassifierKind ParseClassifierKind(std::string_view name);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1;  // taken when feature value <= threshold
  int right = -1;
  double value = 0;  // share of sensitive training samples (leaves only)

  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // root at 0

  double Predict(const SensitivityFeatures& f) const;
  bool operator==(const Tree&) const = default;
};

struct ForestConfig {
  int n_trees = 32;
  int max_depth = 4;
  int min_leaf = 5;
  int features_per_split = 2;
  uint64_t seed = 17;
};

/// Scores a workload (higher means more likely to exceed the PDM) and calls
/// it latency-insensitive when the score is below a calibrated threshold.
/// The threshold variant scores by dram_bound alone; the forest averages
/// the leaf values of bagged shallow trees.
class SensitivityModel {
 public:
  static SensitivityModel Threshold();
  /// Throws CalibrationError when `samples` is empty.
  static SensitivityModel TrainForest(std::span<const LabeledSample> samples, double pdm,
                                      const ForestConfig& cfg);
  static SensitivityModel FromTrees(std::vector<Tree> trees);

  ClassifierKind kind() const { return kind_; }
  const std::vector<Tree>& trees() const { return trees_; }
  bool calibrated() const { return calibrated_; }
  double threshold() const { return threshold_; }
  void set_threshold(double t) {
    threshold_ = t;
    calibrated_ = true;
  }

  double Score(const SensitivityFeatures& f) const;
  /// Throws StateError until a threshold has been set.
  bool IsInsensitive(const SensitivityFeatures& f) const;

  bool operator==(const SensitivityModel&) const = default;

 private:
  ClassifierKind kind_ = ClassifierKind::kThreshold;
  std::vector<Tree> trees_;
  bool calibrated_ = false;
  double threshold_ = 0;
};

/// Largest threshold (a sample score, or +inf) such that labeling every
/// sample with score < threshold insensitive mislabels at most
/// target_fp_pct percent of all samples as insensitive.
double CalibrateThreshold(std::span<const double> scores, std::span<const char> sensitive,
                          double target_fp_pct);

struct ClassifierEvaluation {
  double fp_pct = 0;  // sensitive but labeled insensitive, % of all samples
  double li_pct = 0;  // labeled insensitive, % of all samples
  size_t n = 0;
};

ClassifierEvaluation EvaluateClassifier(const SensitivityModel& model,
                                        std::span<const LabeledSample> samples, double pdm);

/// Train on the first half of `samples`, calibrate on the second half (the
/// threshold variant calibrates on all of them).
SensitivityModel FitClassifier(ClassifierKind kind, std::span<const LabeledSample> samples,
                               double pdm, double target_fp_pct, const ForestConfig& cfg = {});

}  // namespace poolsim::predict
