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

#include "poolsim/sim/metrics.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "poolsim/common/error.h"

namespace poolsim::sim {
namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kFormat = "poolsim-metrics";
constexpr int kVersion = 1;

std::string PercentileKey(double p) { return fmt::format("p{:g}", p); }

template <typename T>
void Put(Json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
void Get(const nlohmann::json& j, const char* key, std::optional<T>& v) {
  if (j.contains(key)) v = j.at(key).get<T>();
}

std::string CsvField(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

double Percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  auto lo = static_cast<size_t>(std::floor(pos));
  size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Json MetricsToJson(const SimMetrics& m, const std::string& generated_at) {
  Json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  if (!generated_at.empty()) j["generated_at"] = generated_at;
  j["run"] = {{"policy", m.policy},         {"scenario", m.scenario}, {"pool_sockets", m.pool_sockets},
              {"n_servers", m.n_servers},   {"seed", m.seed},         {"n_vms", m.n_vms},
              {"sim_end_s", m.sim_end_s},   {"warmup_s", m.warmup_s}};
  j["dram"] = {{"baseline_gb", m.baseline_dram_gb},
               {"local_gb", m.local_dram_gb},
               {"pool_gb", m.pool_dram_gb},
               {"savings_pct", m.dram_savings_pct},
               {"pool_share_pct", m.pool_dram_share_pct}};
  j["scheduling"] = {{"scheduled", m.scheduled},
                     {"failed", m.failed},
                     {"moved", m.moved},
                     {"pool_vm_pct", m.pool_vm_pct},
                     {"insensitive_vm_pct", m.insensitive_vm_pct},
                     {"spilled_vm_pct", m.spilled_vm_pct},
                     {"pool_memory_pct", m.pool_memory_pct}};
  j["performance"] = {{"misprediction_pre_pct", m.misprediction_pre_pct},
                      {"misprediction_pct", m.misprediction_pct},
                      {"migrations", m.migrations},
                      {"migrations_cancelled", m.migrations_cancelled},
                      {"deferred_mitigations", m.deferred_mitigations},
                      {"deferred_vms", m.deferred_vms}};
  Json pct = Json::object();
  for (const auto& [p, v] : m.offline_gbps_percentiles) pct[PercentileKey(p)] = v;
  j["offlining"] = {{"vm_starts", m.offline_samples},
                    {"demand_gbps", pct},
                    {"above_1gbps_pct", m.offline_above_1gbps_pct},
                    {"above_10gbps_pct", m.offline_above_10gbps_pct}};
  Json buckets = Json::array();
  for (const auto& b : m.stranding) {
    buckets.push_back({{"lo_pct", b.lo_pct},
                       {"hi_pct", b.hi_pct},
                       {"samples", b.samples},
                       {"mean_stranded_pct", b.mean_stranded_pct}});
  }
  Json hourly = Json::array();
  for (const auto& h : m.hourly_stranding) {
    hourly.push_back(Json::array({h.hour, h.core_util_pct, h.stranded_pct}));
  }
  j["stranding"] = {{"at_75_pct", m.stranding_at_75_pct},
                    {"buckets", buckets},
                    {"hourly_columns", Json::array({"hour", "core_util_pct", "stranded_pct"})},
                    {"hourly", hourly}};
  if (m.model_fp_pct) {
    Json model;
    Put(model, "fp_pct", m.model_fp_pct);
    Put(model, "op_pct", m.model_op_pct);
    Put(model, "li_pct", m.model_li_pct);
    Put(model, "um_pct", m.model_um_pct);
    Put(model, "pool_share_pct", m.model_pool_share_pct);
    j["model"] = model;
  }
  return j;
}

SimMetrics MetricsFromJson(const nlohmann::json& j) {
  try {
    if (j.at("format") != kFormat) throw ParseError("not a poolsim metrics document");
    if (j.at("version") != kVersion) {
      throw ParseError(fmt::format("unsupported metrics version {}", j.at("version").dump()));
    }
    SimMetrics m;
    const auto& run = j.at("run");
    m.policy = run.at("policy");
    m.scenario = run.at("scenario");
    m.pool_sockets = run.at("pool_sockets");
    m.n_servers = run.at("n_servers");
    m.seed = run.at("seed");
    m.n_vms = run.at("n_vms");
    m.sim_end_s = run.at("sim_end_s");
    m.warmup_s = run.at("warmup_s");
    const auto& d = j.at("dram");
    m.baseline_dram_gb = d.at("baseline_gb");
    m.local_dram_gb = d.at("local_gb");
    m.pool_dram_gb = d.at("pool_gb");
    m.dram_savings_pct = d.at("savings_pct");
    m.pool_dram_share_pct = d.at("pool_share_pct");
    const auto& s = j.at("scheduling");
    m.scheduled = s.at("scheduled");
    m.failed = s.at("failed");
    m.moved = s.at("moved");
    m.pool_vm_pct = s.at("pool_vm_pct");
    m.insensitive_vm_pct = s.at("insensitive_vm_pct");
    m.spilled_vm_pct = s.at("spilled_vm_pct");
    m.pool_memory_pct = s.at("pool_memory_pct");
    const auto& p = j.at("performance");
    m.misprediction_pre_pct = p.at("misprediction_pre_pct");
    m.misprediction_pct = p.at("misprediction_pct");
    m.migrations = p.at("migrations");
    m.migrations_cancelled = p.at("migrations_cancelled");
    m.deferred_mitigations = p.at("deferred_mitigations");
    m.deferred_vms = p.at("deferred_vms");
    const auto& o = j.at("offlining");
    m.offline_samples = o.at("vm_starts");
    for (double q : kOfflinePercentiles) {
      const auto& d2 = o.at("demand_gbps");
      if (d2.contains(PercentileKey(q))) m.offline_gbps_percentiles[q] = d2.at(PercentileKey(q));
    }
    m.offline_above_1gbps_pct = o.at("above_1gbps_pct");
    m.offline_above_10gbps_pct = o.at("above_10gbps_pct");
    const auto& st = j.at("stranding");
    m.stranding_at_75_pct = st.at("at_75_pct");
    for (const auto& b : st.at("buckets")) {
      m.stranding.push_back(
          {b.at("lo_pct"), b.at("hi_pct"), b.at("samples"), b.at("mean_stranded_pct")});
    }
    for (const auto& h : st.at("hourly")) {
      m.hourly_stranding.push_back({h.at(0), h.at(1), h.at(2)});
    }
    if (j.contains("model")) {
      const auto& md = j.at("model");
      Get(md, "fp_pct", m.model_fp_pct);
      Get(md, "op_pct", m.model_op_pct);
      Get(md, "li_pct", m.model_li_pct);
      Get(md, "um_pct", m.model_um_pct);
      Get(md, "pool_share_pct", m.model_pool_share_pct);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("metrics document: {}", e.what()));
  }
}

void WriteMetricsJson(const SimMetrics& m, const std::string& path,
                      const std::string& generated_at) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write metrics '{}'", path));
  out << MetricsToJson(m, generated_at).dump(2) << '\n';
  if (!out) throw IoError(fmt::format("write failed for '{}'", path));
}

SimMetrics ReadMetricsJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open metrics '{}'", path));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("{}: {}", path, e.what()));
  }
  return MetricsFromJson(j);
}

std::vector<std::string> FlatColumns() {
  return {"policy",
          "scenario",
          "pool_sockets",
          "n_servers",
          "seed",
          "n_vms",
          "baseline_dram_gb",
          "local_dram_gb",
          "pool_dram_gb",
          "dram_savings_pct",
          "pool_dram_share_pct",
          "scheduled",
          "failed",
          "moved",
          "pool_vm_pct",
          "insensitive_vm_pct",
          "pool_memory_pct",
          "misprediction_pre_pct",
          "misprediction_pct",
          "migrations",
          "deferred_mitigations",
          "offline_p99.99_gbps",
          "offline_above_1gbps_pct",
          "offline_above_10gbps_pct",
          "stranding_at_75_pct",
          "model_pool_share_pct"};
}

void WriteFlatTable(const std::vector<SimMetrics>& rows, std::ostream& out) {
  const auto cols = FlatColumns();
  for (size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& m : rows) {
    auto p9999 = m.offline_gbps_percentiles.count(99.99) ? m.offline_gbps_percentiles.at(99.99) : 0.0;
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                       CsvField(m.policy), m.scenario, m.pool_sockets, m.n_servers, m.seed, m.n_vms,
                       m.baseline_dram_gb, m.local_dram_gb, m.pool_dram_gb, m.dram_savings_pct,
                       m.pool_dram_share_pct, m.scheduled, m.failed, m.moved, m.pool_vm_pct,
                       m.insensitive_vm_pct, m.pool_memory_pct, m.misprediction_pre_pct,
                       m.misprediction_pct, m.migrations, m.deferred_mitigations, p9999,
                       m.offline_above_1gbps_pct, m.offline_above_10gbps_pct,
                       m.stranding_at_75_pct,
                       m.model_pool_share_pct ? fmt::format("{}", *m.model_pool_share_pct) : "");
  }
}

}  // namespace poolsim::sim
