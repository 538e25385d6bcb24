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

#include "poolsim/predict/sensitivity_model.h"

#include <algorithm>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "poolsim/common/error.h"
#include "poolsim/common/rng.h"

namespace poolsim::predict {
namespace {

struct Split {
  int feature = -1;
  double threshold = 0;
  double impurity = std::numeric_limits<double>::infinity();
};

double Gini(double pos, double n) {
  if (n <= 0) return 0;
  double p = pos / n;
  return 2.0 * p * (1.0 - p) * n;  // weighted by node size
}

class TreeBuilder {
 public:
  TreeBuilder(std::span<const LabeledSample> samples, std::span<const char> labels,
              const ForestConfig& cfg, Rng& rng)
      : samples_(samples), labels_(labels), cfg_(cfg), rng_(rng) {}

  Tree Build(std::vector<size_t> rows) {
    Tree tree;
    tree_ = &tree;
    Grow(std::move(rows), 0);
    return tree;
  }

 private:
  int Grow(std::vector<size_t> rows, int depth) {
    int id = static_cast<int>(tree_->nodes.size());
    tree_->nodes.emplace_back();
    double pos = 0;
    for (size_t r : rows) pos += labels_[r];
    double n = static_cast<double>(rows.size());
    tree_->nodes[id].value = n > 0 ? pos / n : 0.0;
    if (depth >= cfg_.max_depth || pos == 0 || pos == n ||
        rows.size() < 2 * static_cast<size_t>(cfg_.min_leaf)) {
      return id;
    }
    Split best = BestSplit(rows, pos);
    if (best.feature < 0 || best.impurity >= Gini(pos, n) - 1e-12) return id;

    std::vector<size_t> left, right;
    for (size_t r : rows) {
      (samples_[r].features[best.feature] <= best.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    tree_->nodes[id].value = 0;
    tree_->nodes[id].feature = best.feature;
    tree_->nodes[id].threshold = best.threshold;
    int l = Grow(std::move(left), depth + 1);
    int r = Grow(std::move(right), depth + 1);
    tree_->nodes[id].left = l;
    tree_->nodes[id].right = r;
    return id;
  }

  Split BestSplit(const std::vector<size_t>& rows, double total_pos) {
    std::vector<int> features(SensitivityFeatures::kCount);
    std::iota(features.begin(), features.end(), 0);
    for (int i = static_cast<int>(features.size()) - 1; i > 0; --i) {
      std::swap(features[i], features[static_cast<int>(UniformUnit(rng_) * (i + 1))]);
    }
    features.resize(std::clamp(cfg_.features_per_split, 1, SensitivityFeatures::kCount));

    Split best;
    std::vector<size_t> order(rows);
    const double n = static_cast<double>(rows.size());
    for (int f : features) {
      std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        double fa = samples_[a].features[f], fb = samples_[b].features[f];
        return fa != fb ? fa < fb : a < b;
      });
      double left_pos = 0;
      for (size_t i = 0; i + 1 < order.size(); ++i) {
        left_pos += labels_[order[i]];
        double x = samples_[order[i]].features[f];
        double next = samples_[order[i + 1]].features[f];
        if (x == next) continue;
        double nl = static_cast<double>(i + 1);
        if (nl < cfg_.min_leaf || n - nl < cfg_.min_leaf) continue;
        double impurity = Gini(left_pos, nl) + Gini(total_pos - left_pos, n - nl);
        if (impurity < best.impurity - 1e-12) {
          best = {f, 0.5 * (x + next), impurity};
        }
      }
    }
    return best;
  }

  std::span<const LabeledSample> samples_;
  std::span<const char> labels_;
  const ForestConfig& cfg_;
  Rng& rng_;
  Tree* tree_ = nullptr;
};

}  // namespace

std::string_view ClassifierKindName(ClassifierKind kind) {
  return kind == ClassifierKind::kThreshold ? "threshold" : "forest";
}

ClassifierKind ParseClassifierKind(std::string_view name) {
  if (name == "threshold") return ClassifierKind::kThreshold;
  if (name == "forest") return ClassifierKind::kForest;
  throw ConfigError(fmt::format("unknown classifier '{}' (expected threshold or forest)", name));
}

double Tree::Predict(const SensitivityFeatures& f) const {
  int id = 0;
  while (nodes[id].feature >= 0) {
    id = f[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
  }
  return nodes[id].value;
}

SensitivityModel SensitivityModel::Threshold() { return SensitivityModel(); }

SensitivityModel SensitivityModel::FromTrees(std::vector<Tree> trees) {
  if (trees.empty()) throw CalibrationError("forest needs at least one tree");
  SensitivityModel m;
  m.kind_ = ClassifierKind::kForest;
  m.trees_ = std::move(trees);
  return m;
}

SensitivityModel SensitivityModel::TrainForest(std::span<const LabeledSample> samples, double pdm,
                                               const ForestConfig& cfg) {
  if (samples.empty()) throw CalibrationError("cannot train a forest on no samples");
  if (cfg.n_trees < 1 || cfg.max_depth < 0 || cfg.min_leaf < 1) {
    throw ConfigError("forest needs n_trees >= 1, max_depth >= 0, min_leaf >= 1");
  }
  std::vector<char> labels(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) labels[i] = samples[i].Sensitive(pdm);
  Rng rng = MakeRng(cfg.seed, 0xf0e57);
  std::vector<Tree> trees;
  for (int t = 0; t < cfg.n_trees; ++t) {
    std::vector<size_t> rows(samples.size());
    for (auto& r : rows) r = static_cast<size_t>(UniformUnit(rng) * samples.size());
    TreeBuilder builder(samples, labels, cfg, rng);
    trees.push_back(builder.Build(std::move(rows)));
  }
  return FromTrees(std::move(trees));
}

double SensitivityModel::Score(const SensitivityFeatures& f) const {
  if (kind_ == ClassifierKind::kThreshold) return f.dram_bound;
  double sum = 0;
  for (const auto& t : trees_) sum += t.Predict(f);
  return sum / static_cast<double>(trees_.size());
}

bool SensitivityModel::IsInsensitive(const SensitivityFeatures& f) const {
  if (!calibrated_) throw StateError("sensitivity model used before calibration");
  return Score(f) < threshold_;
}

double CalibrateThreshold(std::span<const double> scores, std::span<const char> sensitive,
                          double target_fp_pct) {
  if (scores.size() != sensitive.size()) throw ArgumentError("scores and labels differ in size");
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  const double n = static_cast<double>(scores.size());
  size_t fp = 0;
  for (size_t i : order) {
    if (!sensitive[i]) continue;
    if (100.0 * static_cast<double>(fp + 1) / n > target_fp_pct + 1e-9) return scores[i];
    ++fp;
  }
  return std::numeric_limits<double>::infinity();
}

ClassifierEvaluation EvaluateClassifier(const SensitivityModel& model,
                                        std::span<const LabeledSample> samples, double pdm) {
  ClassifierEvaluation e;
  e.n = samples.size();
  if (samples.empty()) return e;
  size_t fp = 0, li = 0;
  for (const auto& s : samples) {
    if (model.IsInsensitive(s.features)) {
      ++li;
      fp += s.Sensitive(pdm);
    }
  }
  e.fp_pct = 100.0 * static_cast<double>(fp) / static_cast<double>(e.n);
  e.li_pct = 100.0 * static_cast<double>(li) / static_cast<double>(e.n);
  return e;
}

SensitivityModel FitClassifier(ClassifierKind kind, std::span<const LabeledSample> samples,
                               double pdm, double target_fp_pct, const ForestConfig& cfg) {
  if (samples.empty()) throw CalibrationError("no labeled samples");
  SensitivityModel model;
  std::span<const LabeledSample> calib = samples;
  if (kind == ClassifierKind::kForest) {
    if (samples.size() < 2) throw CalibrationError("forest needs at least two samples");
    size_t half = samples.size() / 2;
    model = SensitivityModel::TrainForest(samples.first(half), pdm, cfg);
    calib = samples.subspan(half);
  }
  std::vector<double> scores;
  std::vector<char> labels;
  for (const auto& s : calib) {
    scores.push_back(model.Score(s.features));
    labels.push_back(s.Sensitive(pdm));
  }
  model.set_threshold(CalibrateThreshold(scores, labels, target_fp_pct));
  return model;
}

}  // namespace poolsim::predict
