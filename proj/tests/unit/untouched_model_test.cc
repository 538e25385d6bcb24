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

#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "poolsim/predict/untouched_model.h"

namespace poolsim::predict {
namespace {

TEST(EmpiricalQuantile, Basics) {
  std::vector<double> none;
  EXPECT_EQ(EmpiricalQuantile(none, 5), 0.0);
  std::vector<double> flat = {0.5, 0.5, 0.5};
  EXPECT_EQ(EmpiricalQuantile(flat, 1), 0.5);
  EXPECT_EQ(EmpiricalQuantile(flat, 50), 0.5);
  std::vector<double> ten = {0, .1, .2, .3, .4, .5, .6, .7, .8, .9};
  EXPECT_EQ(EmpiricalQuantile(ten, 10), 0.0);  // k = floor(1.1) = 1
  EXPECT_EQ(EmpiricalQuantile(ten, 20), 0.1);  // k = floor(2.2) = 2
  EXPECT_EQ(EmpiricalQuantile(ten, 50), 0.4);  // k = floor(5.5) = 5
}

TEST(EmpiricalQuantile, UniformSamplesNearTarget) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // The 5th order statistic of 100 uniforms has mean 5/101 and sd ~0.02.
  std::vector<double> xs(100);
  for (auto& x : xs) x = u(rng);
  std::sort(xs.begin(), xs.end());
  EXPECT_NEAR(EmpiricalQuantile(xs, 5), 0.05, 0.03);
  double sum = 0;
  const int trials = 400;
  for (int trial = 0; trial < trials; ++trial) {
    for (auto& x : xs) x = u(rng);
    std::sort(xs.begin(), xs.end());
    sum += EmpiricalQuantile(xs, 5);
  }
  EXPECT_NEAR(sum / trials, 5.0 / 101.0, 0.004);
}

TEST(MinSamplesForPercentile, Values) {
  EXPECT_EQ(MinSamplesForPercentile(4), 24);
  EXPECT_EQ(MinSamplesForPercentile(10), 9);
  EXPECT_EQ(MinSamplesForPercentile(1), 99);
  EXPECT_EQ(MinSamplesForPercentile(2.5), 39);
  EXPECT_EQ(MinSamplesForPercentile(50), 1);
}

TEST(UntouchedHistory, CommitAndWindow) {
  UntouchedHistory h(100);
  h.Add("a", 10, 0.3);
  EXPECT_EQ(h.Count("a"), 0u);  // pending until commit
  EXPECT_EQ(PredictUntouched(h, "a", 5), 0.0);
  h.Commit(20);
  EXPECT_EQ(h.Count("a"), 1u);
  EXPECT_EQ(PredictUntouched(h, "a", 5), 0.3);
  h.Add("a", 50, 0.1);
  h.Commit(115);  // drops the observation at t=10 (< 115-100)
  ASSERT_EQ(h.Count("a"), 1u);
  EXPECT_EQ(h.Sorted("a")[0], 0.1);
  h.Commit(300);
  EXPECT_EQ(h.Count("a"), 0u);
  EXPECT_TRUE(h.Customers().empty());
}

TEST(PredictUntouched, DegenerateTargets) {
  UntouchedHistory h;
  h.Add("a", 0, 0.4);
  h.Commit(1);
  EXPECT_EQ(PredictUntouched(h, "a", 0), 0.0);
  EXPECT_EQ(PredictUntouched(h, "a", 60), 0.0);
  EXPECT_EQ(PredictUntouched(h, "b", 5), 0.0);
}

TEST(PredictUntouched, NeverExceedsHistoryMaxProperty) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    UntouchedHistory h;
    int n = 1 + static_cast<int>(rng() % 40);
    double mx = 0;
    for (int i = 0; i < n; ++i) {
      double x = u(rng);
      mx = std::max(mx, x);
      h.Add("c", i, x);
    }
    h.Commit(n);
    double p = 0.1 + 49.9 * u(rng);
    EXPECT_LE(PredictUntouched(h, "c", p), mx);
  }
}

TEST(UntouchedModel, GatesOnHistory) {
  UntouchedHistory h;
  for (int i = 0; i < 23; ++i) h.Add("c", i, 0.6);
  h.Commit(100);
  UntouchedModel m{4.0, 1};
  EXPECT_EQ(m.RequiredHistory(), 24);
  EXPECT_EQ(m.Predict(h, "c"), 0.0);
  h.Add("c", 50, 0.6);
  h.Commit(100);
  EXPECT_EQ(m.Predict(h, "c"), 0.6);
  UntouchedModel off{0.0, 1};
  EXPECT_EQ(off.Predict(h, "c"), 0.0);
}

TEST(UntouchedModel, HeldOutOverpredictionWithinTarget) {
  // Exchangeable customers: each draws from Beta-like noise around its own
  // mean. A fresh VM is overpredicted at most about target% of the time.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (double target : {1.0, 2.5, 4.0, 10.0}) {
    UntouchedModel m{target, 1};
    size_t n = 0, over = 0;
    for (int c = 0; c < 100; ++c) {
      double mean = u(rng);
      UntouchedHistory h;
      for (int i = 0; i < 120; ++i) h.Add("c", i, std::clamp(mean + noise(rng), 0.0, 1.0));
      h.Commit(200);
      double pred = m.Predict(h, "c");
      for (int i = 0; i < 60; ++i) {
        ++n;
        over += pred > std::clamp(mean + noise(rng), 0.0, 1.0);
      }
    }
    EXPECT_LE(100.0 * over / n, target + 2.0) << "target " << target;
  }
}

TEST(ReplayNightlyHistory, ExitsVisibleAfterNextMidnight) {
  trace::Trace t(4);
  for (size_t i = 0; i < t.size(); ++i) {
    t[i].vm_id = i;
    t[i].customer_id = "c";
    t[i].lifetime_s = 100;
    t[i].ground_truth.untouched_fraction = 0.5;
  }
  t[0].arrival_s = 0;          // exits during day 0
  t[1].arrival_s = 90000;      // day 1: sees VM 0
  t[1].lifetime_s = 100000;    // exits at 190000, during day 2
  t[2].arrival_s = 180000;     // day 2: VM 1 has not exited yet
  t[3].arrival_s = 200000;     // day 2: VM 1 exited but no commit since
  std::vector<size_t> seen;
  ReplayNightlyHistory(t, 7 * kSecondsPerDay, [&](const trace::VmRequest&, const UntouchedHistory& h) {
    seen.push_back(h.Count("c"));
  });
  EXPECT_EQ(seen, (std::vector<size_t>{0, 1, 1, 1}));
  t.push_back(t[3]);
  t[4].vm_id = 4;
  t[4].arrival_s = 3 * 86400;  // after the day-3 commit
  seen.clear();
  ReplayNightlyHistory(t, 7 * kSecondsPerDay, [&](const trace::VmRequest&, const UntouchedHistory& h) {
    seen.push_back(h.Count("c"));
  });
  EXPECT_EQ(seen.back(), 4u);  // VMs 0, 1, 2, 3 all exited before day 3
}

}  // namespace
}  // namespace poolsim::predict
