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
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "poolsim/common/error.h"
#include "poolsim/control/control_plane.h"

namespace poolsim::control {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int64_t kDayMs = 86'400'000;

trace::VmRequest MakeVm(uint64_t id, int cores, int mem, double untouched, double full_slowdown,
                        std::string customer = "cust-a", std::optional<int> hint = 0) {
  trace::VmRequest vm;
  vm.vm_id = id;
  vm.customer_id = std::move(customer);
  vm.vm_type = "t";
  vm.cores = cores;
  vm.memory_gb = mem;
  vm.server_hint = hint;
  vm.ground_truth.untouched_fraction = untouched;
  vm.ground_truth.slowdown_full_pool = {{"182", full_slowdown}, {"222", full_slowdown}};
  vm.ground_truth.curve_exponent = 1.0;
  return vm;
}

ClusterConfig SmallCluster() {
  ClusterConfig c;
  c.n_servers = 16;
  c.servers_per_cluster = 16;
  c.pool_sockets = 8;
  return c;
}

/// Snapshot whose optimizer, at TP 99, picks classifier threshold `li_knob`
/// and untouched target `um_target`.
predict::ModelSnapshot MakeModel(double li_knob, double um_target) {
  predict::ModelSnapshot m;
  m.scenario = "182";
  m.classifier = predict::SensitivityModel::Threshold();
  m.curves.li_of_fp = predict::TradeoffCurve({{0, 40, li_knob}});
  m.curves.um_of_op = predict::TradeoffCurve({{0, 0, 0}, {1, 30, um_target}});
  return m;
}

ControlConfig PredictiveConfig(ClusterConfig cluster = SmallCluster(), bool mitigation = true) {
  ControlConfig cfg;
  cfg.cluster = cluster;
  cfg.policy = Policy::Predictive({0.05, 99}, mitigation);
  cfg.check_invariants = true;
  return cfg;
}

TEST(Policy, ParseAndName) {
  EXPECT_EQ(ParsePolicy("all-local").kind, PolicyKind::kAllLocal);
  Policy s = ParsePolicy("static:0.15");
  EXPECT_EQ(s.kind, PolicyKind::kStatic);
  EXPECT_DOUBLE_EQ(s.static_fraction, 0.15);
  Policy p = ParsePolicy("predictive:pdm=5,tp=98");
  EXPECT_DOUBLE_EQ(p.combined.pdm, 0.05);
  EXPECT_DOUBLE_EQ(p.combined.tp, 98);
  EXPECT_TRUE(p.mitigation);
  EXPECT_FALSE(ParsePolicy("predictive:mitigation=off").mitigation);
  EXPECT_EQ(PolicyName(p), "predictive:pdm=5,tp=98");
  EXPECT_EQ(PolicyName(ParsePolicy(PolicyName(s))).substr(0, 6), "static");
  for (const char* bad : {"pooled", "static", "static:x", "static:1.5", "predictive:tp=40",
                          "predictive:pdm", "predictive:foo=1", "all-local:1"}) {
    EXPECT_THROW(ParsePolicy(bad), ConfigError) << bad;
  }
}

TEST(ZnumaSpill, Examples) {
  EXPECT_DOUBLE_EQ(ZnumaSpill(10, 0.5, 3), 0.4);
  EXPECT_DOUBLE_EQ(ZnumaSpill(10, 0.5, 5), 0.0);
  EXPECT_DOUBLE_EQ(ZnumaSpill(10, 0.0, 0), 1.0);
  EXPECT_DOUBLE_EQ(ZnumaSpill(10, 1.0, 0), 0.0);
}

TEST(ZnumaSpill, NonincreasingInLocalMemory) {
  std::mt19937 rng(5);
  for (int i = 0; i < 500; ++i) {
    int mem = 1 + static_cast<int>(rng() % 64);
    double u = (rng() % 1000) / 1000.0;
    double prev = 2;
    for (int local = 0; local <= mem; ++local) {
      double s = ZnumaSpill(mem, u, local);
      ASSERT_GE(s, 0);
      ASSERT_LE(s, prev);
      prev = s;
    }
  }
}

TEST(ClusterConfig, Validation) {
  ClusterConfig c = SmallCluster();
  EXPECT_NO_THROW(ValidateClusterConfig(c));
  c.pool_sockets = 12;
  EXPECT_THROW(ValidateClusterConfig(c), ConfigError);
  c = SmallCluster();
  c.pool_sockets = 32;  // larger than the cluster
  EXPECT_THROW(ValidateClusterConfig(c), ConfigError);
  c = SmallCluster();
  c.scenario = "999";
  EXPECT_THROW(ValidateClusterConfig(c), ConfigError);
}

TEST(ControlPlane, StaticSplitFloorsPoolShare) {
  ControlConfig cfg;
  cfg.cluster = SmallCluster();
  cfg.policy = Policy::Static(0.37);
  ControlPlane cp(cfg);
  auto vm = MakeVm(1, 2, 10, 0.2, 0.1);
  auto r = cp.OnArrival(vm, 0);
  ASSERT_TRUE(r.placed);
  EXPECT_EQ(r.server, 0);
  EXPECT_FALSE(r.moved);
  EXPECT_EQ(r.split.pool_gb, 3);
  EXPECT_EQ(r.split.local_gb, 7);
  EXPECT_EQ(r.split.source_slices, (std::vector<int>{0, 1, 2}));
  // touched = 8 GB, 7 local -> 1/8 spills.
  EXPECT_DOUBLE_EQ(cp.vms().at(1).spill, 0.125);
  EXPECT_DOUBLE_EQ(cp.vms().at(1).slowdown, 0.1 * 0.125);
  EXPECT_EQ(cp.state().servers()[0].free_local_gb, 384 - 7);
  EXPECT_EQ(cp.state().pools()[0].assigned(), 3);
}

TEST(ControlPlane, AllLocalNeverTouchesPool) {
  ControlConfig cfg;
  cfg.cluster = SmallCluster();
  ControlPlane cp(cfg);
  auto vm = MakeVm(1, 2, 10, 0.2, 0.1);
  auto r = cp.OnArrival(vm, 0);
  EXPECT_EQ(r.split.pool_gb, 0);
  EXPECT_EQ(cp.vms().at(1).slowdown, 0);
  EXPECT_EQ(cp.state().pools()[0].ready(), cp.state().pools()[0].total());
}

TEST(ControlPlane, PredictiveRequiresMatchingModel) {
  EXPECT_THROW(ControlPlane{PredictiveConfig()}, ConfigError);
  auto m = MakeModel(-kInf, 0);
  m.scenario = "222";
  EXPECT_THROW(ControlPlane(PredictiveConfig(), m), ConfigError);
  m = MakeModel(-kInf, 0);
  m.combined.pdm = 0.10;
  EXPECT_THROW(ControlPlane(PredictiveConfig(), m), ConfigError);
}

/// Gives customer `cust` `n` committed history entries of `untouched`,
/// leaving the clock at the first midnight.
void SeedHistory(ControlPlane& cp, std::vector<trace::VmRequest>& keep, const std::string& cust,
                 int n, double untouched, uint64_t first_id = 1000) {
  for (int i = 0; i < n; ++i) {
    keep.push_back(MakeVm(first_id + i, 1, 1, untouched, 0.0, cust, i % 16));
  }
  for (int i = 0; i < n; ++i) cp.OnArrival(keep[keep.size() - n + i], 1000 + i);
  for (int i = 0; i < n; ++i) cp.OnExit(first_id + i, 10'000 + i);
  cp.AdvanceTo(kDayMs);
}

TEST(ControlPlane, PredictiveUntouchedSplit) {
  ControlPlane cp(PredictiveConfig(), MakeModel(-kInf, 2.0));
  EXPECT_DOUBLE_EQ(cp.model()->untouched.target_op, 2.0);
  std::vector<trace::VmRequest> keep;
  keep.reserve(100);
  SeedHistory(cp, keep, "cust-a", 60, 0.37);
  EXPECT_EQ(cp.history().Count("cust-a"), 60u);
  auto vm = MakeVm(1, 2, 10, 0.5, 0.1);
  auto r = cp.OnArrival(vm, kDayMs + 1);
  EXPECT_FALSE(r.insensitive);
  EXPECT_EQ(r.split.pool_gb, 3);
  EXPECT_EQ(r.split.local_gb, 7);
  // A customer without enough history stays all-local.
  auto other = MakeVm(2, 2, 10, 0.5, 0.1, "cust-b");
  EXPECT_EQ(cp.OnArrival(other, kDayMs + 2).split.pool_gb, 0);
}

TEST(ControlPlane, HistoryBecomesVisibleAtMidnight) {
  ControlPlane cp(PredictiveConfig(), MakeModel(kInf, 0));
  auto seed = MakeVm(5, 1, 1, 0.5, 0.0);
  cp.OnArrival(seed, 0);
  cp.OnExit(5, kDayMs - 1);
  auto before = MakeVm(6, 1, 4, 0.5, 0.0);
  EXPECT_EQ(cp.OnArrival(before, kDayMs - 1).split.pool_gb, 0);
  cp.AdvanceTo(kDayMs);
  auto after = MakeVm(7, 1, 4, 0.5, 0.0);
  auto r = cp.OnArrival(after, kDayMs);
  EXPECT_TRUE(r.insensitive);
  EXPECT_EQ(r.split.pool_gb, 4);
}

TEST(ControlPlane, InsensitiveVmCappedByReadySlices) {
  ClusterConfig c = SmallCluster();
  c.pool_gb_per_socket = 1;  // 8 GB pools
  ControlPlane cp(PredictiveConfig(c), MakeModel(kInf, 0));
  std::vector<trace::VmRequest> keep;
  keep.reserve(10);
  SeedHistory(cp, keep, "cust-a", 1, 0.5);
  auto a = MakeVm(1, 2, 7, 0.5, 0.01);
  auto ra = cp.OnArrival(a, kDayMs + 1);
  EXPECT_TRUE(ra.insensitive);
  EXPECT_EQ(ra.split.pool_gb, 7);
  EXPECT_EQ(ra.split.local_gb, 0);
  auto b = MakeVm(2, 2, 10, 0.5, 0.01);
  auto rb = cp.OnArrival(b, kDayMs + 2);
  EXPECT_EQ(rb.split.pool_gb, 1);
  EXPECT_EQ(rb.split.local_gb, 9);
  auto c3 = MakeVm(3, 2, 10, 0.5, 0.01);
  EXPECT_EQ(cp.OnArrival(c3, kDayMs + 3).split.pool_gb, 0);
}

TEST(ControlPlane, ExitDrainsSlicesAndRecordsHistory) {
  ControlConfig cfg;
  cfg.cluster = SmallCluster();
  cfg.policy = Policy::Static(0.5);
  cfg.check_invariants = true;
  ControlPlane cp(cfg);
  auto vm = MakeVm(1, 2, 8, 0.2, 0.1);
  cp.OnArrival(vm, 0);
  auto follow = cp.OnExit(1, 60'000);
  ASSERT_EQ(follow.size(), 4u);
  std::sort(follow.begin(), follow.end(),
            [](const Followup& a, const Followup& b) { return a.t_ms < b.t_ms; });
  const auto& pool = cp.state().pools()[0];
  EXPECT_EQ(pool.draining(), 4);
  for (const auto& f : follow) {
    EXPECT_EQ(f.kind, FollowupKind::kDrainComplete);
    EXPECT_GE(f.t_ms, 60'010);
    EXPECT_LE(f.t_ms, 60'100);
    cp.OnDrainComplete(f.pool, f.slice, f.t_ms);
  }
  EXPECT_EQ(pool.ready(), pool.total());
  EXPECT_EQ(cp.state().servers()[0].free_cores, 48);
  EXPECT_EQ(cp.state().servers()[0].free_local_gb, 384);
  EXPECT_EQ(cp.history().pending(), 1u);
  EXPECT_THROW(cp.OnExit(1, 70'000), StateError);
}

TEST(ControlPlane, FallbackStaysInCluster) {
  ControlConfig cfg;
  cfg.cluster = SmallCluster();
  cfg.cluster.servers_per_cluster = 8;
  ControlPlane cp(cfg);
  std::vector<trace::VmRequest> vms;
  for (int i = 0; i < 9; ++i) vms.push_back(MakeVm(i, 48, 8, 0, 0, "c", 3));
  for (int i = 0; i < 8; ++i) {
    auto r = cp.OnArrival(vms[i], i);
    ASSERT_TRUE(r.placed);
    EXPECT_EQ(r.moved, i > 0);
    EXPECT_LT(r.server, 8);
  }
  auto r = cp.OnArrival(vms[8], 9);  // cluster 0 is full; cluster 1 is off limits
  EXPECT_FALSE(r.placed);
  EXPECT_EQ(cp.stats().failed, 1);
  EXPECT_EQ(cp.stats().moved, 7);
  auto bad = MakeVm(99, 1, 1, 0, 0, "c", 16);
  EXPECT_THROW(cp.OnArrival(bad, 10), ValidationError);
  EXPECT_THROW(cp.OnArrival(vms[0], 10), StateError);  // already running
  EXPECT_THROW(cp.OnArrival(bad, 5), StateError);      // time went backwards
}

TEST(ControlPlane, MigrationMovesPoolMemoryLocal) {
  ControlConfig cfg = PredictiveConfig();
  cfg.qos.noise_sigma = 0;
  cfg.record_events = true;
  ControlPlane cp(cfg, MakeModel(kInf, 0));
  std::vector<trace::VmRequest> keep;
  keep.reserve(200);
  SeedHistory(cp, keep, "cust-a", 1, 0.5);
  // Filler VMs from an unknown customer keep the budget above one.
  for (int i = 0; i < 120; ++i) keep.push_back(MakeVm(2000 + i, 1, 1, 0, 0, "filler", i % 16));
  for (int i = 0; i < 120; ++i) cp.OnArrival(keep[1 + i], kDayMs + i);
  auto vm = MakeVm(1, 2, 4, 0.25, 0.3);
  auto r = cp.OnArrival(vm, kDayMs + 1000);
  ASSERT_EQ(r.split.pool_gb, 4);
  int free_before = cp.state().servers()[0].free_local_gb;
  EXPECT_TRUE(cp.qos_active());
  EXPECT_DOUBLE_EQ(cp.vms().at(1).slowdown, 0.3);

  std::vector<Followup> started;
  int64_t t = kDayMs + 1000;
  for (int tick = 0; tick < 5 && started.empty(); ++tick) {
    t += 1000;
    started = cp.OnQosTick(t);
  }
  ASSERT_EQ(started.size(), 1u);
  EXPECT_EQ(started[0].kind, FollowupKind::kMigrationComplete);
  EXPECT_EQ(started[0].t_ms, t + 200);  // 4 GB at 50 ms/GB
  EXPECT_EQ(cp.state().servers()[0].free_local_gb, free_before - 4);  // reserved up front
  auto drains = cp.OnMigrationComplete(1, started[0].t_ms);
  EXPECT_EQ(drains.size(), 4u);
  const VmState& st = cp.vms().at(1);
  EXPECT_TRUE(st.migrated);
  EXPECT_EQ(st.split.local_gb, 4);
  EXPECT_EQ(st.split.pool_gb, 0);
  EXPECT_EQ(cp.stats().mispredicted_pre, 1);
  cp.Finalize(started[0].t_ms);
  EXPECT_EQ(cp.stats().mispredicted_post, 0);
  int starts = 0;
  for (const auto& e : cp.events().events()) starts += e.kind == EventKind::kMigrationStart;
  EXPECT_EQ(starts, 1);
}

TEST(ControlPlane, ExitDuringMigrationCancelsIt) {
  ControlConfig cfg = PredictiveConfig();
  cfg.qos.noise_sigma = 0;
  ControlPlane cp(cfg, MakeModel(kInf, 0));
  std::vector<trace::VmRequest> keep;
  keep.reserve(200);
  SeedHistory(cp, keep, "cust-a", 1, 0.5);
  for (int i = 0; i < 120; ++i) keep.push_back(MakeVm(2000 + i, 1, 1, 0, 0, "filler", i % 16));
  for (int i = 0; i < 120; ++i) cp.OnArrival(keep[1 + i], kDayMs + i);
  auto vm = MakeVm(1, 2, 4, 0.25, 0.3);
  int free_before = cp.state().servers()[0].free_local_gb;
  cp.OnArrival(vm, kDayMs + 1000);
  std::vector<Followup> started;
  int64_t t = kDayMs + 1000;
  while (started.empty()) started = cp.OnQosTick(t += 1000);
  cp.OnExit(1, t + 10);
  EXPECT_EQ(cp.stats().migrations_cancelled, 1);
  EXPECT_TRUE(cp.OnMigrationComplete(1, started[0].t_ms).empty());
  EXPECT_EQ(cp.state().servers()[0].free_local_gb, free_before);
  EXPECT_EQ(cp.stats().mispredicted_post, 1);
}

TEST(ControlPlane, MitigationDeferredWithoutBudget) {
  ControlConfig cfg = PredictiveConfig();
  cfg.qos.noise_sigma = 0;
  ControlPlane cp(cfg, MakeModel(kInf, 0));
  std::vector<trace::VmRequest> keep;
  keep.reserve(10);
  SeedHistory(cp, keep, "cust-a", 1, 0.5);
  auto vm = MakeVm(1, 2, 4, 0.25, 0.3);
  cp.OnArrival(vm, kDayMs);
  for (int i = 1; i <= 10; ++i) EXPECT_TRUE(cp.OnQosTick(kDayMs + i * 1000).empty());
  EXPECT_GT(cp.stats().deferrals_budget, 0);
  EXPECT_EQ(cp.stats().deferred_vms, 1);
  EXPECT_EQ(cp.stats().migrations_started, 0);
}

TEST(ControlPlane, MitigationOffDoesNotWatch) {
  ControlConfig cfg = PredictiveConfig(SmallCluster(), false);
  ControlPlane cp(cfg, MakeModel(kInf, 0));
  std::vector<trace::VmRequest> keep;
  keep.reserve(10);
  SeedHistory(cp, keep, "cust-a", 1, 0.5);
  auto vm = MakeVm(1, 2, 4, 0.25, 0.3);
  cp.OnArrival(vm, kDayMs);
  EXPECT_FALSE(cp.qos_active());
}

TEST(ControlPlane, EventLogJsonl) {
  ControlConfig cfg;
  cfg.cluster = SmallCluster();
  cfg.policy = Policy::Static(0.5);
  cfg.record_events = true;
  ControlPlane cp(cfg);
  auto vm = MakeVm(1, 2, 8, 0.2, 0.1);
  cp.OnArrival(vm, 0);
  for (const auto& f : cp.OnExit(1, 100)) cp.OnDrainComplete(f.pool, f.slice, 200);
  std::ostringstream out;
  cp.events().WriteJsonl(out);
  std::istringstream in(out.str());
  std::string line;
  std::map<std::string, int> kinds;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    kinds[j.at("event").get<std::string>()]++;
    if (j["event"] == "schedule") {
      EXPECT_EQ(j.at("ready_before"), cp.state().pools()[0].total());
      EXPECT_EQ(j.at("pool_gb"), 4);
      EXPECT_DOUBLE_EQ(j.at("touched_gb").get<double>(), 6.4);
    }
  }
  EXPECT_EQ(kinds["schedule"], 1);
  EXPECT_EQ(kinds["exit"], 1);
  EXPECT_EQ(kinds["drain_complete"], 4);
}

// Random arrivals, exits and drains under invariant checking; afterwards all
// capacity must be back.
TEST(ControlPlane, ConservationUnderRandomLoad) {
  for (const char* policy : {"static:0.5", "static:1", "all-local"}) {
    ControlConfig cfg;
    cfg.cluster = SmallCluster();
    cfg.cluster.pool_gb_per_socket = 16;
    cfg.policy = ParsePolicy(policy);
    cfg.check_invariants = true;
    ControlPlane cp(cfg);
    std::mt19937_64 rng(11);
    std::vector<trace::VmRequest> vms;
    vms.reserve(3000);
    using Item = std::pair<int64_t, Followup>;
    auto later = [](const Item& a, const Item& b) { return a.first > b.first; };
    std::priority_queue<Item, std::vector<Item>, decltype(later)> pending(later);
    std::vector<std::pair<int64_t, uint64_t>> exits;
    int64_t now = 0;
    for (int i = 0; i < 3000; ++i) {
      now += static_cast<int64_t>(rng() % 5000);
      while (!pending.empty() && pending.top().first <= now) {
        auto [t, f] = pending.top();
        pending.pop();
        cp.OnDrainComplete(f.pool, f.slice, std::max(t, now));
      }
      std::sort(exits.begin(), exits.end(), std::greater<>());
      while (!exits.empty() && exits.back().first <= now) {
        for (auto& f : cp.OnExit(exits.back().second, now)) pending.push({f.t_ms, f});
        exits.pop_back();
      }
      vms.push_back(MakeVm(i, 1 + static_cast<int>(rng() % 16), 1 + static_cast<int>(rng() % 96),
                           0.3, 0.1, "c", static_cast<int>(rng() % 16)));
      if (cp.OnArrival(vms.back(), now).placed) {
        exits.push_back({now + static_cast<int64_t>(rng() % 400'000), vms.back().vm_id});
      }
    }
    std::sort(exits.begin(), exits.end());
    for (auto [t, id] : exits) {
      now = std::max(now, t);
      for (auto& f : cp.OnExit(id, now)) pending.push({f.t_ms, f});
    }
    while (!pending.empty()) {
      auto [t, f] = pending.top();
      pending.pop();
      now = std::max(now, t);
      cp.OnDrainComplete(f.pool, f.slice, now);
    }
    for (const auto& s : cp.state().servers()) {
      EXPECT_EQ(s.free_cores, 48);
      EXPECT_EQ(s.free_local_gb, 384);
      EXPECT_EQ(s.resident_gb, 0);
    }
    for (const auto& p : cp.state().pools()) EXPECT_EQ(p.ready(), p.total());
    EXPECT_EQ(cp.alive(), 0);
    EXPECT_GT(cp.stats().failed + cp.stats().moved, 0) << policy;
  }
}

}  // namespace
}  // namespace poolsim::control
