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

// Acceptance suite. Prints one line per criterion:
//
//   criterion <n> PASS|FAIL <name>: <measurements> [<seconds>s]
//
// and exits nonzero when a criterion fails, unless it is listed in
// --known-failures (a known failure that starts passing is also an error,
// so the list cannot go stale silently).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <CLI11.hpp>

#include "poolsim/common/error.h"
#include "poolsim/hw/slice_table.h"
#include "poolsim/predict/calibration.h"
#include "poolsim/predict/sensitivity_model.h"
#include "poolsim/predict/telemetry.h"
#include "poolsim/predict/tradeoff.h"
#include "poolsim/predict/untouched_model.h"
#include "poolsim/sim/simulator.h"
#include "poolsim/trace/trace_generator.h"

namespace poolsim::acceptance {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records one check; the detail keeps every measurement, failing ones
  // marked with '!'.
  void Check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += ", ";
    detail += ok ? what : "!" + what;
  }
};

bool Within(double v, double target, double tol) { return std::abs(v - target) <= tol + 1e-9; }

// ---------------------------------------------------------------------------
// 1. Slice-table state size.

Outcome StateBound() {
  Outcome o;
  o.Check(hw::StateBytes(1024, 64) == 768,
          fmt::format("state_bytes(1024,64)={}", hw::StateBytes(1024, 64)));
  std::mt19937_64 rng(1);
  int mismatches = 0;
  for (int i = 0; i < 20; ++i) {
    int slices = 1 + static_cast<int>(rng() % 4096);
    int hosts = 1 + static_cast<int>(rng() % hw::kMaxHosts);
    hw::SliceTable t(slices, hosts);
    t.Assign(static_cast<int>(rng() % hosts), static_cast<int>(rng() % (slices + 1)));
    // Independent formula: 16-byte header plus ceil(slices * bits / 8).
    int bits = std::max(1, static_cast<int>(std::ceil(std::log2(hosts))));
    size_t expect = 16 + (static_cast<size_t>(slices) * bits + 7) / 8;
    mismatches += t.ExportSnapshot().size() != expect;
  }
  o.Check(mismatches == 0, fmt::format("snapshot size mismatches={}/20", mismatches));
  return o;
}

// ---------------------------------------------------------------------------
// 2. Ownership properties.

Outcome OwnershipSuite() {
  Outcome o;
  std::mt19937_64 rng(2);
  int64_t violations = 0, cross_releases = 0, cross_rejected = 0;
  for (int seq = 0; seq < 10000; ++seq) {
    int slices = 1 + static_cast<int>(rng() % 64);
    int hosts = 2 + static_cast<int>(rng() % 15);
    hw::SliceTable t(slices, hosts);
    std::vector<int> model(slices, hw::kUnassigned);  // oracle owner per slice
    for (int step = 0; step < 12; ++step) {
      int op = static_cast<int>(rng() % 3);
      int host = static_cast<int>(rng() % hosts);
      if (op == 0) {
        int k = static_cast<int>(rng() % 8);
        hw::SliceTable before = t;
        std::vector<int> got;
        try {
          got = t.Assign(host, k);
        } catch (const CapacityError&) {
          violations += !(t == before);
          continue;
        }
        // Inverse: releasing what was assigned restores the table.
        hw::SliceTable undo = t;
        undo.Release(host, got);
        violations += !(undo == before);
        for (int s : got) {
          violations += model[s] != hw::kUnassigned;  // exclusivity
          model[s] = host;
        }
      } else if (op == 1) {
        std::vector<int> owned, foreign;
        for (int s = 0; s < slices; ++s) {
          if (model[s] == host) owned.push_back(s);
          else if (model[s] != hw::kUnassigned) foreign.push_back(s);
        }
        if (!foreign.empty() && rng() % 2) {
          // Cross-host release: must throw and change nothing.
          ++cross_releases;
          std::vector<int> req = owned;
          req.push_back(foreign[rng() % foreign.size()]);
          hw::SliceTable before = t;
          try {
            t.Release(host, req);
          } catch (const OwnershipError&) {
            ++cross_rejected;
          }
          violations += !(t == before);
        } else if (!owned.empty()) {
          std::shuffle(owned.begin(), owned.end(), rng);
          owned.resize(1 + rng() % owned.size());
          t.Release(host, owned);
          for (int s : owned) model[s] = hw::kUnassigned;
        }
      } else {
        // Purity: checks never mutate; result matches the oracle.
        int s = static_cast<int>(rng() % slices);
        hw::SliceTable before = t;
        bool allowed = t.CheckAccess(host, s) == hw::Access::kAllowed;
        violations += allowed != (model[s] == host);
        violations += !(t == before);
      }
      for (int s = 0; s < slices; ++s) violations += t.owner(s) != model[s];
    }
  }
  o.Check(violations == 0, fmt::format("invariant violations={}", violations));
  o.Check(cross_rejected == cross_releases && cross_releases > 0,
          fmt::format("cross-host releases rejected={}/{}", cross_rejected, cross_releases));
  return o;
}

// ---------------------------------------------------------------------------
// 3. Combined optimizer against a brute-force maximizer.

predict::TradeoffCurve RandomMonotoneCurve(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<predict::CurvePoint> pts;
  int n = 1 + static_cast<int>(rng() % 15);
  double rate = 0, value = 0;
  for (int k = 0; k < n; ++k) {
    rate += rng() % 2 ? std::round(u(rng) * 20) / 10.0 : u(rng) * 2.0;
    value = std::min(100.0, value + 8.0 * u(rng));
    pts.push_back({std::min(rate, 100.0), value, static_cast<double>(k)});
  }
  return predict::TradeoffCurve(pts);
}

double BruteForceObjective(const predict::TradeoffCurves& c, double budget) {
  // Every grid point with fp + op <= budget, evaluated directly.
  int steps = static_cast<int>(std::floor(budget * 10.0 + 1e-9));
  double best = -1;
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; i + j <= steps; ++j) {
      best = std::max(best, c.li_of_fp.ValueAt(i / 10.0) + c.um_of_op.ValueAt(j / 10.0));
    }
  }
  return best;
}

Outcome OptimizerSuite() {
  Outcome o;
  std::mt19937_64 rng(3);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    predict::TradeoffCurves c{RandomMonotoneCurve(rng), RandomMonotoneCurve(rng)};
    double tp = 100.0 - static_cast<double>(rng() % 101) / 10.0;
    auto s = predict::SolveCombined(c, {0.05, tp});
    mismatches += s.objective != BruteForceObjective(c, 100.0 - tp);
    mismatches += s.fp + s.op > 100.0 - tp + 1e-9;
  }
  o.Check(mismatches == 0, fmt::format("objective mismatches={}/1000", mismatches));
  predict::TradeoffCurves c{RandomMonotoneCurve(rng), RandomMonotoneCurve(rng)};
  auto zero = predict::SolveCombined(c, {0.05, 100.0});
  o.Check(zero.fp == 0 && zero.op == 0, fmt::format("zero budget fp={} op={}", zero.fp, zero.op));
  return o;
}

// ---------------------------------------------------------------------------
// 4. Untouched-memory quantile predictor.

trace::TraceGenConfig PredictorTraceConfig(uint64_t seed) {
  trace::TraceGenConfig g;
  g.n_vms = 10000;
  g.n_clusters = 1;
  g.servers_per_cluster = 32;
  g.seed = seed;
  return g;
}

Outcome QuantilePredictor() {
  Outcome o;
  trace::Trace t = trace::GenerateTrace(PredictorTraceConfig(41));
  std::vector<double> targets = {1, 2.5, 4, 10};
  std::vector<predict::UntouchedModel> models;
  for (double p : targets) models.push_back({p, 1});
  auto evals = predict::EvaluateUntouched(t, models);
  for (size_t i = 0; i < targets.size(); ++i) {
    o.Check(evals[i].op_rate_pct <= targets[i] + 2.0,
            fmt::format("OP@{}={:.2f}", targets[i], evals[i].op_rate_pct));
  }

  // Tradeoff curve: achieved OP and claimed share over a fine target sweep.
  std::vector<predict::UntouchedModel> sweep;
  for (double p = 0.25; p <= 20.0; p += 0.25) sweep.push_back({p, 1});
  auto curve = predict::EvaluateUntouched(t, sweep);
  double um4 = 0;
  for (const auto& e : curve) {
    if (e.op_rate_pct <= 4.0) um4 = std::max(um4, e.um_pct);
  }
  o.Check(um4 >= 20.0, fmt::format("UM at OP<=4%={:.1f}", um4));

  // Static comparison at UM = 20%: every VM claims 20% untouched and is
  // overpredicted whenever it touches more than 80%.
  double static_op = 0;
  for (const auto& vm : t) static_op += vm.ground_truth.untouched_fraction < 0.20;
  static_op = 100.0 * static_op / t.size();
  std::optional<double> pred_op;
  for (const auto& e : curve) {
    if (e.um_pct >= 20.0) {
      pred_op = e.op_rate_pct;
      break;
    }
  }
  o.Check(pred_op && static_op > 2.0 * *pred_op,
          fmt::format("OP at UM=20%: static={:.2f} predictive={}", static_op,
                      pred_op ? fmt::format("{:.2f}", *pred_op) : "n/a"));
  return o;
}

// ---------------------------------------------------------------------------
// 5. Sensitivity classifiers.

Outcome ClassifierSuite() {
  Outcome o;
  for (std::string sc : {"182", "222"}) {
    trace::TraceGenConfig g;
    g.seed = 51;
    auto train = predict::BuildLabeledSet(trace::GenerateTrace(g), sc, 4000, {}, 51);
    g.seed = 52;
    auto test = predict::BuildLabeledSet(trace::GenerateTrace(g), sc, 4000, {}, 52);
    for (auto kind : {predict::ClassifierKind::kThreshold, predict::ClassifierKind::kForest}) {
      for (double target : {1.0, 2.0, 4.0}) {
        auto e = predict::EvaluateClassifier(predict::FitClassifier(kind, train, 0.05, target),
                                             test, 0.05);
        o.Check(e.fp_pct <= target + 1.0,
                fmt::format("{}/{} FP@{}={:.2f}", sc, predict::ClassifierKindName(kind), target,
                            e.fp_pct));
      }
    }
    if (sc == "182") {
      auto thr = predict::EvaluateClassifier(
          predict::FitClassifier(predict::ClassifierKind::kThreshold, train, 0.05, 2.0), test,
          0.05);
      auto forest = predict::EvaluateClassifier(
          predict::FitClassifier(predict::ClassifierKind::kForest, train, 0.05, 2.0), test, 0.05);
      o.Check(thr.li_pct >= 25.0 && forest.li_pct >= 25.0,
              fmt::format("LI@2% threshold={:.1f} forest={:.1f}", thr.li_pct, forest.li_pct));
      o.Check(forest.li_pct >= thr.li_pct, "forest LI >= threshold LI");
    }
  }
  return o;
}

// ---------------------------------------------------------------------------
// 6-10. Cluster simulations on the calibrated 50k-VM trace.

struct SimFixture {
  trace::Trace trace;
  std::map<std::string, predict::ModelSnapshot> models;
  sim::SimOptions base;
  int jobs = 1;
};

constexpr int64_t kWarmupS = 3 * 86400;

SimFixture MakeFixture(uint64_t n_vms, int jobs) {
  SimFixture f;
  trace::TraceGenConfig g;
  g.n_vms = n_vms;
  g.seed = 1;
  f.trace = trace::GenerateTrace(g);
  g.seed = 1001;  // calibration never sees the evaluation trace
  trace::Trace cal = trace::GenerateTrace(g);
  for (std::string sc : {"182", "222"}) {
    predict::CalibrationConfig c;
    c.scenario = sc;
    c.combined = {0.05, 98};
    f.models[sc] = predict::Calibrate(cal, c);
  }
  f.base.control.cluster.n_servers = g.n_clusters * g.servers_per_cluster;
  f.base.control.cluster.servers_per_cluster = g.servers_per_cluster;
  f.base.control.cluster.pool_sockets = 16;
  f.base.warmup_s = kWarmupS;
  f.jobs = jobs;
  return f;
}

sim::RunSpec Predictive(const SimFixture& f, const std::string& scenario, bool events) {
  sim::RunSpec s{f.base, f.models.at(scenario)};
  s.options.control.cluster.scenario = scenario;
  s.options.control.policy = control::Policy::Predictive({0.05, 98});
  s.options.record_events = events;
  return s;
}

sim::RunSpec Static(const SimFixture& f, double fraction, const std::string& scenario = "182") {
  sim::RunSpec s{f.base, std::nullopt};
  s.options.control.cluster.scenario = scenario;
  s.options.control.policy = control::Policy::Static(fraction);
  return s;
}

// Runs of criterion 8, shared with 6, 9 and 10.
struct PolicyRuns {
  sim::SimResult pred182, pred222, static182, static222;
};

PolicyRuns RunPolicies(const SimFixture& f) {
  auto r = sim::RunMany(f.trace,
                        {Predictive(f, "182", true), Predictive(f, "222", true), Static(f, 0.15),
                         Static(f, 0.15, "222")},
                        f.jobs);
  return {std::move(r[0]), std::move(r[1]), std::move(r[2]), std::move(r[3])};
}

Outcome UnderpredictionSafety(const PolicyRuns& runs) {
  Outcome o;
  for (const auto* r : {&runs.pred182, &runs.pred222}) {
    std::set<uint64_t> safe;
    int64_t slowed = 0, migrated = 0, scanned = 0;
    for (const auto& e : r->events.events()) {
      if (e.kind == control::EventKind::kSchedule && e.local_gb >= e.touched_gb) {
        ++scanned;
        safe.insert(e.vm_id);
        slowed += e.slowdown != 0.0;
      }
      if (e.kind == control::EventKind::kMigrationStart) migrated += safe.count(e.vm_id);
    }
    o.Check(slowed == 0 && migrated == 0 && scanned > 0,
            fmt::format("{}: {} underpredicted VMs, slowed={} migrated={}", r->metrics.scenario,
                        scanned, slowed, migrated));
  }
  return o;
}

Outcome SavingsCurve(const SimFixture& f) {
  Outcome o;
  auto rows = sim::SweepPoolSizes(f.trace, Static(f, 0.5).options, {8, 16, 32, 64}, {}, f.jobs);
  std::vector<double> s;
  for (const auto& m : rows) s.push_back(m.dram_savings_pct);
  o.Check(s[0] <= s[1] && s[1] <= s[2] && s[2] <= s[3],
          fmt::format("savings 8/16/32/64={:.2f}/{:.2f}/{:.2f}/{:.2f}", s[0], s[1], s[2], s[3]));
  o.Check(s[3] - s[2] <= s[2] - s[1] && s[2] - s[1] <= s[1] - s[0],
          fmt::format("gains {:.2f}/{:.2f}/{:.2f}", s[1] - s[0], s[2] - s[1], s[3] - s[2]));
  o.Check(Within(s[2], 12, 3), fmt::format("savings(32)={:.2f} (12+-3)", s[2]));
  o.Check(Within(s[3], 13, 3), fmt::format("savings(64)={:.2f} (13+-3)", s[3]));
  return o;
}

Outcome PolicyComparison(const PolicyRuns& r) {
  Outcome o;
  const auto& p182 = r.pred182.metrics;
  const auto& p222 = r.pred222.metrics;
  const auto& st = r.static182.metrics;
  o.Check(p182.dram_savings_pct >= p222.dram_savings_pct &&
              p222.dram_savings_pct >= st.dram_savings_pct,
          fmt::format("order 182={:.2f} >= 222={:.2f} >= static={:.2f}", p182.dram_savings_pct,
                      p222.dram_savings_pct, st.dram_savings_pct));
  o.Check(Within(p182.dram_savings_pct, 9, 3),
          fmt::format("predictive-182 savings={:.2f} (9+-3)", p182.dram_savings_pct));
  o.Check(Within(p222.dram_savings_pct, 7, 3),
          fmt::format("predictive-222 savings={:.2f} (7+-3)", p222.dram_savings_pct));
  o.Check(Within(st.dram_savings_pct, 3, 2),
          fmt::format("static savings={:.2f} (3+-2)", st.dram_savings_pct));
  o.Check(Within(st.misprediction_pct, 2.5, 1),
          fmt::format("static mispredictions={:.2f} (2.5+-1; 222: {:.2f})", st.misprediction_pct,
                      r.static222.metrics.misprediction_pct));
  o.Check(p182.misprediction_pct <= 2.0 && p222.misprediction_pct <= 2.0,
          fmt::format("predictive mispredictions 182={:.2f} 222={:.2f} (pre {:.2f}/{:.2f}, "
                      "migrations {}/{})",
                      p182.misprediction_pct, p222.misprediction_pct, p182.misprediction_pre_pct,
                      p222.misprediction_pre_pct, p182.migrations, p222.migrations));
  return o;
}

Outcome NonBlocking(const SimFixture& f, const PolicyRuns& runs) {
  Outcome o;
  std::map<uint64_t, int64_t> arrival_ms;
  for (const auto& vm : f.trace) arrival_ms[vm.vm_id] = vm.arrival_s * 1000;
  for (const auto* r : {&runs.pred182, &runs.pred222}) {
    int64_t waited = 0, starts = 0;
    for (const auto& e : r->events.events()) {
      if (e.kind != control::EventKind::kSchedule) continue;
      ++starts;
      // A start waits if it is delayed or needs slices not yet online.
      waited += e.t_ms != arrival_ms.at(e.vm_id) || e.pool_gb > e.ready_before;
    }
    const auto& m = r->metrics;
    o.Check(waited == 0, fmt::format("{}: starts waiting on drains={}/{}", m.scenario, waited,
                                     starts));
    o.Check(m.offline_above_1gbps_pct <= 0.01 && m.offline_above_10gbps_pct <= 0.001,
            fmt::format("{}: demand >1GB/s {:.4f}% >10GB/s {:.4f}% (p99.99={:.3f} GB/s)",
                        m.scenario, m.offline_above_1gbps_pct, m.offline_above_10gbps_pct,
                        m.offline_gbps_percentiles.count(99.99)
                            ? m.offline_gbps_percentiles.at(99.99)
                            : 0.0));
  }
  return o;
}

Outcome Determinism(const SimFixture& f, const PolicyRuns& runs) {
  Outcome o;
  auto again = sim::RunMany(f.trace, {Predictive(f, "182", false), Static(f, 0.15)}, f.jobs);
  bool same_pred = sim::MetricsToJson(again[0].metrics).dump() ==
                   sim::MetricsToJson(runs.pred182.metrics).dump();
  bool same_static = sim::MetricsToJson(again[1].metrics).dump() ==
                     sim::MetricsToJson(runs.static182.metrics).dump();
  o.Check(same_pred, "predictive documents identical");
  o.Check(same_static, "static documents identical");
  return o;
}

int Main(int argc, char** argv) {
  CLI::App app{"poolsim acceptance suite"};
  std::vector<int> only, known;
  uint64_t n_vms = 50000;
  int jobs = 1;
  app.add_option("--only", only, "criteria to run (default all)")->delimiter(',');
  app.add_option("--known-failures", known, "criteria expected to fail")->delimiter(',');
  app.add_option("--vms", n_vms, "VMs in the simulation trace")->capture_default_str();
  app.add_option("--jobs", jobs, "parallel simulations")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  auto wanted = [&](int c) { return only.empty() || std::count(only.begin(), only.end(), c); };
  int unexpected = 0;
  auto report = [&](int c, const char* name, const std::function<Outcome()>& fn) {
    if (!wanted(c)) return;
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.Check(false, fmt::format("exception: {}", e.what()));
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    bool expected_fail = std::count(known.begin(), known.end(), c) > 0;
    std::cout << fmt::format("criterion {} {} {}: {} [{:.1f}s]{}\n", c, o.pass ? "PASS" : "FAIL",
                             name, o.detail, secs,
                             expected_fail ? (o.pass ? " (listed as known failure)"
                                                     : " (known failure)")
                                           : "")
              << std::flush;
    unexpected += o.pass == expected_fail;
  };

  report(1, "slice-table state bound", StateBound);
  report(2, "ownership properties", OwnershipSuite);
  report(3, "combined optimizer vs brute force", OptimizerSuite);
  report(4, "quantile predictor OP guarantee", QuantilePredictor);
  report(5, "classifier FP guarantee", ClassifierSuite);

  bool need_sim = false;
  for (int c = 6; c <= 10; ++c) need_sim = need_sim || wanted(c);
  if (need_sim) {
    auto t0 = Clock::now();
    SimFixture f = MakeFixture(n_vms, jobs);
    std::optional<PolicyRuns> runs;
    auto policy_runs = [&]() -> const PolicyRuns& {
      if (!runs) runs = RunPolicies(f);
      return *runs;
    };
    std::cout << fmt::format("setup: {} VMs, {} servers, calibration {:.1f}s\n", f.trace.size(),
                             f.base.control.cluster.n_servers,
                             std::chrono::duration<double>(Clock::now() - t0).count());
    report(6, "underprediction safety", [&] { return UnderpredictionSafety(policy_runs()); });
    report(7, "savings curve shape", [&] { return SavingsCurve(f); });
    report(8, "policy comparison", [&] { return PolicyComparison(policy_runs()); });
    report(9, "non-blocking offlining", [&] { return NonBlocking(f, policy_runs()); });
    report(10, "determinism", [&] { return Determinism(f, policy_runs()); });
  }
  return unexpected == 0 ? 0 : 1;
}

}  // namespace
}  // namespace poolsim::acceptance

int main(int argc, char** argv) { return poolsim::acceptance::Main(argc, argv); }
