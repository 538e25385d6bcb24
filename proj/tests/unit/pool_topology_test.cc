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

#include <gtest/gtest.h>

#include "poolsim/common/error.h"
#include "poolsim/common/rng.h"
#include "poolsim/hw/pool_topology.h"

namespace poolsim::hw {
namespace {

TEST(PoolLatency, AnchorsAndMonotone) {
  const auto& s = FindScenario("182");
  EXPECT_EQ(PoolLatencyNs(MakeTopology(8, 1536), s), 70.0);
  EXPECT_EQ(PoolLatencyNs(MakeTopology(16, 3072), s), 90.0);
  EXPECT_GE(PoolLatencyNs(MakeTopology(32, 6144), s), 180.0);
  double prev = 0;
  for (int n : {8, 16, 32, 64}) {
    double v = PoolLatencyNs(MakeTopology(n, 1024), s);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(PoolTopology, SwitchAboveSixteenSockets) {
  EXPECT_FALSE(MakeTopology(8, 10).uses_switch);
  EXPECT_FALSE(MakeTopology(16, 10).uses_switch);
  EXPECT_TRUE(MakeTopology(32, 10).uses_switch);
  EXPECT_TRUE(MakeTopology(64, 10).uses_switch);
  EXPECT_EQ(MakeTopology(16, 3072).emcs_per_pool, 3);
  EXPECT_THROW(MakeTopology(12, 10), ConfigError);
  PoolTopology bad = MakeTopology(32, 10);
  bad.uses_switch = false;
  EXPECT_THROW(ValidateTopology(bad), ConfigError);
}

TEST(Scenarios, Builtins) {
  EXPECT_NEAR(FindScenario("182").ratio(), 1.82, 0.01);
  EXPECT_NEAR(FindScenario("222").ratio(), 2.22, 0.01);
  EXPECT_THROW(FindScenario("300"), ConfigError);
  EXPECT_THROW(ValidateScenario({"x", 100, 90}), ConfigError);
}

TEST(Timing, DefaultsAndSampling) {
  TimingModel t;
  EXPECT_NO_THROW(ValidateTiming(t));
  EXPECT_EQ(t.MigrationMs(4), 200.0);
  Rng rng = MakeRng(1, 2);
  for (int i = 0; i < 1000; ++i) {
    double ms = t.SampleOfflineMs(rng);
    EXPECT_GE(ms, 10.0);
    EXPECT_LE(ms, 100.0);
  }
  t.online_us_per_gb = 20.0;  // 20 us vs 10 ms is only 500x
  EXPECT_THROW(ValidateTiming(t), ConfigError);
}

}  // namespace
}  // namespace poolsim::hw
