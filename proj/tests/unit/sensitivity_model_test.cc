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

#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "poolsim/common/error.h"
#include "poolsim/predict/calibration.h"
#include "poolsim/predict/sensitivity_model.h"
#include "poolsim/trace/trace_generator.h"

namespace poolsim::predict {
namespace {

std::vector<LabeledSample> LinearSet(int n, uint64_t seed) {
  // slowdown = 3 * dram_bound; sensitive iff dram_bound > 0.05 / 3.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 0.1);
  std::vector<LabeledSample> out(n);
  for (auto& s : out) {
    s.features.dram_bound = u(rng);
    s.slowdown = 3.0 * s.features.dram_bound;
  }
  return out;
}

std::vector<LabeledSample> SkewedMixture(const std::string& scenario, size_t n, uint64_t seed) {
  trace::TraceGenConfig g;
  g.n_vms = n;
  g.seed = seed;
  return BuildLabeledSet(trace::GenerateTrace(g), scenario, n, TelemetryConfig{}, seed);
}

TEST(ThresholdModel, ZeroPressureIsInsensitive) {
  auto m = SensitivityModel::Threshold();
  m.set_threshold(0.01);
  SensitivityFeatures f;
  EXPECT_TRUE(m.IsInsensitive(f));
}

TEST(ThresholdModel, UncalibratedIsStateError) {
  auto m = SensitivityModel::Threshold();
  EXPECT_THROW(m.IsInsensitive(SensitivityFeatures{}), StateError);
}

TEST(ThresholdModel, LinearLabelsClosedForm) {
  auto train = LinearSet(2000, 1);
  auto m = FitClassifier(ClassifierKind::kThreshold, train, 0.05, 0.0);
  EXPECT_NEAR(m.threshold(), 0.05 / 3.0, 2e-4);
  for (const auto& s : train) {
    if (s.features.dram_bound < m.threshold()) {
      EXPECT_FALSE(s.Sensitive(0.05));
    }
  }
  // Held-out points can only be mislabeled in the gap between the true
  // boundary and the first sensitive training point.
  auto test = LinearSet(2000, 2);
  EXPECT_LE(EvaluateClassifier(m, test, 0.05).fp_pct, 0.5);
}

TEST(CalibrateThreshold, CountsFalsePositivesOverAllSamples) {
  std::vector<double> scores = {0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<char> sens = {0, 1, 0, 1, 1};
  EXPECT_EQ(CalibrateThreshold(scores, sens, 0), 0.2);
  EXPECT_EQ(CalibrateThreshold(scores, sens, 20), 0.4);   // one FP of five
  EXPECT_EQ(CalibrateThreshold(scores, sens, 40), 0.5);
  EXPECT_TRUE(std::isinf(CalibrateThreshold(scores, sens, 60)));
}

TEST(Forest, DeterministicAndCalibrated) {
  auto samples = SkewedMixture("182", 2000, 4);
  auto a = FitClassifier(ClassifierKind::kForest, samples, 0.05, 2.0);
  auto b = FitClassifier(ClassifierKind::kForest, samples, 0.05, 2.0);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.trees().size(), 32u);
  EXPECT_TRUE(a.calibrated());
}

class HeldOut : public ::testing::TestWithParam<std::tuple<const char*, ClassifierKind>> {};

TEST_P(HeldOut, FalsePositivesWithinOnePoint) {
  auto [scenario, kind] = GetParam();
  auto train = SkewedMixture(scenario, 4000, 21);
  auto test = SkewedMixture(scenario, 4000, 22);
  for (double target : {1.0, 2.0, 4.0}) {
    auto m = FitClassifier(kind, train, 0.05, target);
    auto e = EvaluateClassifier(m, test, 0.05);
    EXPECT_LE(e.fp_pct, target + 1.0) << scenario << " target " << target;
  }
}

INSTANTIATE_TEST_SUITE_P(
    Models, HeldOut,
    ::testing::Combine(::testing::Values("182", "222"),
                       ::testing::Values(ClassifierKind::kThreshold, ClassifierKind::kForest)));

TEST(SkewedMixture, InsensitiveShareAtTwoPercent) {
  auto train = SkewedMixture("182", 4000, 31);
  auto test = SkewedMixture("182", 4000, 32);
  auto thr = EvaluateClassifier(FitClassifier(ClassifierKind::kThreshold, train, 0.05, 2.0), test, 0.05);
  auto forest = EvaluateClassifier(FitClassifier(ClassifierKind::kForest, train, 0.05, 2.0), test, 0.05);
  EXPECT_GE(thr.li_pct, 25.0);
  EXPECT_GE(forest.li_pct, 25.0);
  EXPECT_GE(forest.li_pct, thr.li_pct);
}

TEST(SkewedMixture, HigherLatencyIsLessEffective) {
  auto s182 = SkewedMixture("182", 4000, 41);
  auto s222 = SkewedMixture("222", 4000, 41);
  auto c182 = [&] {
    std::vector<double> sc;
    std::vector<char> lab;
    for (auto& s : s182) sc.push_back(s.features.dram_bound), lab.push_back(s.Sensitive(0.05));
    return LiCurveFromScores(sc, lab);
  }();
  auto c222 = [&] {
    std::vector<double> sc;
    std::vector<char> lab;
    for (auto& s : s222) sc.push_back(s.features.dram_bound), lab.push_back(s.Sensitive(0.05));
    return LiCurveFromScores(sc, lab);
  }();
  EXPECT_LT(c222.ValueAt(2.0), c182.ValueAt(2.0));
}

TEST(ClassifierKind, Parse) {
  EXPECT_EQ(ParseClassifierKind("forest"), ClassifierKind::kForest);
  EXPECT_THROW(ParseClassifierKind("svm"), ConfigError);
}

}  // namespace
}  // namespace poolsim::predict
