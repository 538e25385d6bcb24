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
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "poolsim/sim/stranding.h"

namespace poolsim::sim {

/// Offlining-demand percentile keys reported for every run.
inline const std::vector<double> kOfflinePercentiles = {50, 99, 99.9, 99.99, 99.999};

struct HourlyStranding {
  int64_t hour = 0;
  double core_util_pct = 0;
  double stranded_pct = 0;
};

/// Results of one simulation. Memory in GB, rates in percent of scheduled
/// VMs unless noted.
struct SimMetrics {
  std::string policy;
  std::string scenario;
  int pool_sockets = 0;
  int n_servers = 0;
  uint64_t seed = 0;
  int64_t n_vms = 0;
  int64_t sim_end_s = 0;
  int64_t warmup_s = 0;

  // Provisioning at peak over the measured window.
  double baseline_dram_gb = 0;
  double local_dram_gb = 0;
  double pool_dram_gb = 0;
  double dram_savings_pct = 0;
  double pool_dram_share_pct = 0;  // pool / (local + pool)

  int64_t scheduled = 0;
  int64_t failed = 0;
  int64_t moved = 0;
  double pool_vm_pct = 0;
  double insensitive_vm_pct = 0;
  double spilled_vm_pct = 0;
  double pool_memory_pct = 0;  // of scheduled VM memory, at placement

  double misprediction_pre_pct = 0;
  double misprediction_pct = 0;  // after mitigation
  int64_t migrations = 0;
  int64_t migrations_cancelled = 0;
  int64_t deferred_mitigations = 0;
  int64_t deferred_vms = 0;

  int64_t offline_samples = 0;  // VM starts on servers attached to a pool
  std::map<double, double> offline_gbps_percentiles;
  double offline_above_1gbps_pct = 0;
  double offline_above_10gbps_pct = 0;

  std::vector<StrandingTracker::Bucket> stranding;
  double stranding_at_75_pct = 0;
  std::vector<HourlyStranding> hourly_stranding;

  // Calibrated operating point for predictive runs.
  std::optional<double> model_fp_pct, model_op_pct, model_li_pct, model_um_pct,
      model_pool_share_pct;
};

/// Percentile by linear interpolation between order statistics; 0 if empty.
double Percentile(std::vector<double> values, double p);

/// Stable-key document; `generated_at` is the only nondeterministic field
/// and is omitted when empty.
nlohmann::ordered_json MetricsToJson(const SimMetrics& m, const std::string& generated_at = "");
SimMetrics MetricsFromJson(const nlohmann::json& j);

void WriteMetricsJson(const SimMetrics& m, const std::string& path,
                      const std::string& generated_at = "");
/// Throws IoError / ParseError.
SimMetrics ReadMetricsJson(const std::string& path);

/// Flat table of scalar fields, one row per run.
std::vector<std::string> FlatColumns();
void WriteFlatTable(const std::vector<SimMetrics>& rows, std::ostream& out);

}  // namespace poolsim::sim
