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

// poolsim command-line front end. Commands compose through files only:
//
//   poolsim gen-trace --config gen.yaml --out trace.csv
//   poolsim calibrate --trace cal.csv --pdm 5 --out model.json
//   poolsim run --trace trace.csv --policy predictive:pdm=5,tp=98 --models model.json --out run/
//   poolsim sweep --trace trace.csv --policy static:0.5 --sizes 8,16,32,64 --out sweep/
//   poolsim report --in sweep/ --out report/
//
// Failures print one line to stderr:
//   error: kind=<kind> code=<exit code> message="<text>"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <CLI11.hpp>

#include "poolsim/common/error.h"
#include "poolsim/config/yaml_config.h"
#include "poolsim/control/policy.h"
#include "poolsim/predict/calibration.h"
#include "poolsim/predict/model_snapshot.h"
#include "poolsim/predict/sensitivity_model.h"
#include "poolsim/sim/simulator.h"
#include "poolsim/trace/trace_generator.h"
#include "poolsim/trace/trace_io.h"

namespace poolsim::cli {
namespace {

namespace fs = std::filesystem;

constexpr int kExitUsage = 2;

int ExitCode(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return 3;
    case ErrorKind::kParse: return 4;
    case ErrorKind::kConfig: return 5;
    case ErrorKind::kValidation: return 6;
    case ErrorKind::kCalibration: return 7;
    case ErrorKind::kArgument: return 8;
    case ErrorKind::kCapacity:
    case ErrorKind::kOwnership:
    case ErrorKind::kState: return 9;
  }
  return 10;
}

std::string Quote(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out;
}

int ReportError(std::string_view kind, int code, std::string_view message) {
  std::cerr << fmt::format("error: kind={} code={} message=\"{}\"\n", kind, code, Quote(message));
  return code;
}

std::string Timestamp() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}",
                     fmt::gmtime(std::chrono::system_clock::to_time_t(
                         std::chrono::system_clock::now())));
}

// Writes through a temporary sibling so a failed command leaves no partial
// file behind.
void WriteFile(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(fmt::format("cannot create directory {}", path.parent_path().string()));
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
    out << content;
    if (!out) throw IoError(fmt::format("write failed for {}", path.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError(fmt::format("cannot write {}", path.string()));
}

template <class Fn>
std::string Render(Fn fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

void RequireInput(const std::string& path, std::string_view what) {
  if (path.empty()) throw ConfigError(fmt::format("no {} given", what));
  if (!fs::is_regular_file(path)) throw IoError(fmt::format("{} not found: {}", what, path));
}

// ---------------------------------------------------------------------------
// gen-trace

struct GenArgs {
  std::string config, out;
  std::optional<uint64_t> seed, n_vms;
};

void CmdGenTrace(const GenArgs& a) {
  trace::TraceGenConfig cfg;
  if (!a.config.empty()) cfg = config::LoadTraceGenConfig(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.n_vms) cfg.n_vms = *a.n_vms;
  trace::ValidateConfig(cfg);
  trace::Trace t = trace::GenerateTrace(cfg);
  WriteFile(a.out, Render([&](std::ostream& o) { trace::WriteTrace(t, o); }));
  std::cout << fmt::format("wrote {} VMs to {}\n", t.size(), a.out);
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateArgs {
  std::string trace, out, report, scenario = "182", classifier = "forest";
  double pdm_pct = 5, tp = 98;
  uint64_t seed = 1;
};

std::string CurvesCsv(const predict::ModelSnapshot& s) {
  std::string out = "curve,rate_pct,value_pct,knob\n";
  auto add = [&](std::string_view name, const predict::TradeoffCurve& c) {
    for (const auto& p : c.points()) {
      out += fmt::format("{},{},{},{}\n", name, p.rate, p.value, p.knob);
    }
  };
  add("li_of_fp", s.curves.li_of_fp);
  add("um_of_op", s.curves.um_of_op);
  return out;
}

void CmdCalibrate(const CalibrateArgs& a) {
  RequireInput(a.trace, "trace");
  predict::CalibrationConfig cfg;
  cfg.scenario = a.scenario;
  cfg.combined = {a.pdm_pct / 100.0, a.tp};
  cfg.classifier = predict::ParseClassifierKind(a.classifier);
  cfg.seed = a.seed;
  predict::ModelSnapshot snap = predict::Calibrate(trace::ReadTrace(fs::path(a.trace)), cfg);
  std::string report = a.report;
  if (report.empty()) report = fs::path(a.out).replace_extension(".curves.csv").string();
  std::string model = Render([&](std::ostream& o) { predict::WriteModelSnapshot(snap, o); });
  WriteFile(a.out, model);
  WriteFile(report, CurvesCsv(snap));
  const auto& s = snap.solution;
  std::cout << fmt::format(
      "scenario={} pdm={}% tp={}% fp={:.1f}% op={:.1f}% insensitive={:.1f}% untouched={:.1f}% "
      "pool_share={:.1f}%\n",
      snap.scenario, a.pdm_pct, a.tp, s.fp, s.op, s.li, s.um, s.PoolSharePct());
}

// ---------------------------------------------------------------------------
// run / sweep

struct RunArgs {
  std::string config, trace, cluster, models, out, scenario;
  std::vector<std::string> policies;
  std::optional<uint64_t> seed;
  std::optional<int64_t> warmup_s;
  std::optional<int> jobs;
  std::vector<int> sizes;
  bool events = false, check_invariants = false, no_timestamp = false;
};

config::RunConfig Resolve(const RunArgs& a) {
  config::RunConfig r;
  if (!a.config.empty()) r = config::LoadRunConfig(a.config);
  if (!a.trace.empty()) r.trace = a.trace;
  if (!a.models.empty()) r.models = a.models;
  if (!a.out.empty()) r.out = a.out;
  if (!a.cluster.empty()) r.cluster = config::LoadClusterFile(a.cluster);
  if (!a.scenario.empty()) {
    r.cluster.cluster.scenario = a.scenario;
    control::ValidateClusterConfig(r.cluster.cluster);
  }
  if (a.seed) r.seed = *a.seed;
  if (a.warmup_s) r.warmup_s = *a.warmup_s;
  if (a.jobs) r.jobs = *a.jobs;
  if (!a.sizes.empty()) r.sizes = a.sizes;
  r.record_events |= a.events;
  r.check_invariants |= a.check_invariants;
  if (r.warmup_s < 0) throw ConfigError("warmup must be >= 0");
  if (r.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (r.out.empty()) throw ConfigError("no output directory given (--out)");
  return r;
}

std::vector<control::Policy> Policies(const RunArgs& a, const config::RunConfig& r) {
  std::vector<control::Policy> out;
  if (a.policies.empty()) {
    out.push_back(control::ParsePolicy(r.policy));
  } else {
    for (const auto& p : a.policies) out.push_back(control::ParsePolicy(p));
  }
  return out;
}

struct Inputs {
  trace::Trace trace;
  std::optional<predict::ModelSnapshot> model;
};

Inputs LoadInputs(const config::RunConfig& r, const std::vector<control::Policy>& policies) {
  Inputs in;
  RequireInput(r.trace, "trace");
  bool predictive = std::any_of(policies.begin(), policies.end(), [](const auto& p) {
    return p.kind == control::PolicyKind::kPredictive;
  });
  if (predictive) {
    if (r.models.empty()) throw ConfigError("predictive policies need a model snapshot (--models)");
    RequireInput(r.models, "model snapshot");
    in.model = predict::ReadModelSnapshot(fs::path(r.models));
  }
  in.trace = trace::ReadTrace(fs::path(r.trace));
  return in;
}

sim::SimOptions Options(const config::RunConfig& r, const control::Policy& policy) {
  sim::SimOptions o;
  o.control.cluster = r.cluster.cluster;
  o.control.qos = r.cluster.qos;
  o.control.policy = policy;
  o.control.accounting_pdm = r.accounting_pdm;
  o.control.seed = r.seed;
  o.control.check_invariants = r.check_invariants;
  o.warmup_s = r.warmup_s;
  o.record_events = r.record_events;
  return o;
}

std::string Slug(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return !std::isalnum(c) && c != '.'; }, '_');
  return s;
}

std::string MetricsDoc(const sim::SimMetrics& m, bool no_timestamp) {
  return sim::MetricsToJson(m, no_timestamp ? "" : Timestamp()).dump(2) + "\n";
}

void PrintSummary(const sim::SimMetrics& m) {
  std::cout << fmt::format(
      "{} scenario={} sockets={} savings={:.2f}% pool_share={:.1f}% mispredictions={:.2f}% "
      "migrations={} failed={} moved={}\n",
      m.policy, m.scenario, m.pool_sockets, m.dram_savings_pct, m.pool_dram_share_pct,
      m.misprediction_pct, m.migrations, m.failed, m.moved);
}

void CmdRun(const RunArgs& a) {
  config::RunConfig r = Resolve(a);
  auto policies = Policies(a, r);
  if (policies.size() != 1) throw ConfigError("run takes exactly one --policy");
  Inputs in = LoadInputs(r, policies);
  sim::SimResult res = sim::RunSimulation(in.trace, Options(r, policies[0]), in.model);
  fs::path out(r.out);
  WriteFile(out / "metrics.json", MetricsDoc(res.metrics, a.no_timestamp));
  WriteFile(out / "metrics.csv",
            Render([&](std::ostream& o) { sim::WriteFlatTable({res.metrics}, o); }));
  if (r.record_events) {
    WriteFile(out / "events.jsonl", Render([&](std::ostream& o) { res.events.WriteJsonl(o); }));
  }
  PrintSummary(res.metrics);
}

void CmdSweep(const RunArgs& a) {
  config::RunConfig r = Resolve(a);
  auto policies = Policies(a, r);
  std::vector<int> sizes = r.sizes;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  // Validate every cluster shape before any simulation runs.
  for (int s : sizes) {
    control::ClusterConfig c = r.cluster.cluster;
    c.pool_sockets = s;
    control::ValidateClusterConfig(c);
  }
  Inputs in = LoadInputs(r, policies);
  std::vector<sim::RunSpec> specs;
  for (const auto& p : policies) {
    for (int s : sizes) {
      sim::SimOptions o = Options(r, p);
      o.record_events = false;
      o.control.cluster.pool_sockets = s;
      specs.push_back({o, in.model});
    }
  }
  auto results = sim::RunMany(in.trace, specs, r.jobs);
  std::vector<sim::SimMetrics> rows;
  fs::path out(r.out);
  for (const auto& res : results) {
    const auto& m = res.metrics;
    WriteFile(out / fmt::format("metrics-{}-s{}.json", Slug(m.policy), m.pool_sockets),
              MetricsDoc(m, a.no_timestamp));
    rows.push_back(m);
    PrintSummary(m);
  }
  WriteFile(out / "sweep.csv", Render([&](std::ostream& o) { sim::WriteFlatTable(rows, o); }));
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::string in, out;
};

void CmdReport(const ReportArgs& a) {
  if (!fs::is_directory(a.in)) throw IoError(fmt::format("input directory not found: {}", a.in));
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.in)) {
    std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.starts_with("metrics") && e.path().extension() == ".json") {
      files.push_back(e.path());
    }
  }
  if (files.empty()) throw IoError(fmt::format("no metrics*.json files in {}", a.in));
  std::vector<sim::SimMetrics> rows;
  for (const auto& f : files) rows.push_back(sim::ReadMetricsJson(f.string()));
  std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
    return std::tie(x.policy, x.scenario, x.pool_sockets, x.seed) <
           std::tie(y.policy, y.scenario, y.pool_sockets, y.seed);
  });

  fs::path out(a.out);
  WriteFile(out / "summary.csv", Render([&](std::ostream& o) { sim::WriteFlatTable(rows, o); }));

  std::string curve = "policy,scenario,pool_sockets,dram_savings_pct,pool_dram_share_pct\n";
  std::string strand = "policy,scenario,pool_sockets,core_util_lo_pct,core_util_hi_pct,samples,"
                       "stranded_pct\n";
  std::string offline = "policy,scenario,pool_sockets,percentile,demand_gbps\n";
  std::string hourly = "policy,scenario,pool_sockets,hour,core_util_pct,stranded_pct\n";
  for (const auto& m : rows) {
    std::string key = fmt::format("\"{}\",{},{}", m.policy, m.scenario, m.pool_sockets);
    curve += fmt::format("{},{},{}\n", key, m.dram_savings_pct, m.pool_dram_share_pct);
    for (const auto& b : m.stranding) {
      strand += fmt::format("{},{},{},{},{}\n", key, b.lo_pct, b.hi_pct, b.samples,
                            b.mean_stranded_pct);
    }
    for (const auto& [p, v] : m.offline_gbps_percentiles) {
      offline += fmt::format("{},{},{}\n", key, p, v);
    }
    for (const auto& h : m.hourly_stranding) {
      hourly += fmt::format("{},{},{},{}\n", key, h.hour, h.core_util_pct, h.stranded_pct);
    }
  }
  WriteFile(out / "savings_curve.csv", curve);
  WriteFile(out / "stranding.csv", strand);
  WriteFile(out / "offlining.csv", offline);
  WriteFile(out / "hourly_stranding.csv", hourly);
  std::cout << fmt::format("{} runs -> {}\n", rows.size(), a.out);
}

void AddRunOptions(CLI::App* cmd, RunArgs& a, bool sweep) {
  cmd->add_option("--config", a.config, "run file (YAML); flags override it");
  cmd->add_option("--trace", a.trace, "trace CSV");
  cmd->add_option("--cluster", a.cluster, "cluster file (YAML)");
  cmd->add_option("--policy", a.policies,
                  sweep ? "policy, repeatable: all-local | static:<f> | predictive:pdm=5,tp=98"
                        : "all-local | static:<f> | predictive:pdm=5,tp=98[,mitigation=off]");
  cmd->add_option("--models", a.models, "model snapshot from `calibrate`");
  cmd->add_option("--scenario", a.scenario, "latency scenario override (182 or 222)");
  cmd->add_option("--seed", a.seed, "simulation seed (default 1)");
  cmd->add_option("--warmup-s", a.warmup_s, "seconds excluded from peak measurement (default 0)");
  cmd->add_option("--out", a.out, "output directory");
  cmd->add_flag("--check-invariants", a.check_invariants, "full capacity scan after every event");
  cmd->add_flag("--no-timestamp", a.no_timestamp, "omit generated_at from metrics documents");
  if (sweep) {
    cmd->add_option("--sizes", a.sizes, "pool sizes (default 8,16,32,64)")->delimiter(',');
    cmd->add_option("--jobs", a.jobs, "parallel runs (default 1)");
  } else {
    cmd->add_flag("--events", a.events, "write events.jsonl");
  }
}

int Main(int argc, char** argv) {
  CLI::App app{"CXL memory-pool cluster simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "poolsim 0.1.0");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-trace", "generate a synthetic VM trace");
  gen_cmd->add_option("--config", gen.config, "generator config (YAML); defaults if omitted");
  gen_cmd->add_option("--out", gen.out, "trace CSV to write")->required();
  gen_cmd->add_option("--seed", gen.seed, "override the config seed");
  gen_cmd->add_option("--n-vms", gen.n_vms, "override the config VM count");

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "fit prediction models and tradeoff curves");
  cal_cmd->add_option("--trace", cal.trace, "calibration trace CSV")->required();
  cal_cmd->add_option("--pdm", cal.pdm_pct, "performance degradation margin in percent")
      ->required();
  cal_cmd->add_option("--tp", cal.tp, "percent of VMs that must stay within the PDM")
      ->capture_default_str();
  cal_cmd->add_option("--scenario", cal.scenario, "latency scenario")->capture_default_str();
  cal_cmd->add_option("--classifier", cal.classifier, "forest or threshold")
      ->capture_default_str();
  cal_cmd->add_option("--seed", cal.seed, "calibration seed")->capture_default_str();
  cal_cmd->add_option("--out", cal.out, "model snapshot (JSON)")->required();
  cal_cmd->add_option("--report", cal.report, "tradeoff curves CSV (default <out>.curves.csv)");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "simulate one policy over a trace");
  AddRunOptions(run_cmd, run, false);

  RunArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "simulate policies across pool sizes");
  AddRunOptions(sweep_cmd, sweep, true);

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "turn metrics documents into plot-ready tables");
  rep_cmd->add_option("--in", rep.in, "directory with metrics*.json")->required();
  rep_cmd->add_option("--out", rep.out, "output directory")->required();

  std::string ref_out;
  auto* ref_cmd = app.add_subcommand("config-reference", "print every config key and default");
  ref_cmd->add_option("--out", ref_out, "write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return ReportError("usage", kExitUsage, e.what());
  }

  try {
    if (*gen_cmd) CmdGenTrace(gen);
    if (*cal_cmd) CmdCalibrate(cal);
    if (*run_cmd) CmdRun(run);
    if (*sweep_cmd) CmdSweep(sweep);
    if (*rep_cmd) CmdReport(rep);
    if (*ref_cmd) {
      if (ref_out.empty()) {
        std::cout << config::ConfigReference();
      } else {
        WriteFile(ref_out, config::ConfigReference());
      }
    }
  } catch (const Error& e) {
    return ReportError(ErrorKindName(e.kind()), ExitCode(e.kind()), e.what());
  } catch (const std::exception& e) {
    return ReportError("internal", 10, e.what());
  }
  return 0;
}

}  // namespace
}  // namespace poolsim::cli

int main(int argc, char** argv) { return poolsim::cli::Main(argc, argv); }
