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

#include "poolsim/sim/stranding.h"

#include <algorithm>
#include <cmath>

#include "poolsim/common/error.h"

namespace poolsim::sim {

StrandingSample MeasureStranding(const control::ClusterState& state, int first, int last) {
  const auto& cfg = state.config();
  const auto& servers = state.servers();
  if (first < 0 || last > static_cast<int>(servers.size()) || first > last) {
    throw ArgumentError("stranding range outside the cluster");
  }
  StrandingSample out;
  if (first == last) return out;
  double used_cores = 0, stranded = 0;
  for (int s = first; s < last; ++s) {
    used_cores += cfg.cores_per_server - servers[s].free_cores;
    if (servers[s].free_cores == 0) stranded += servers[s].free_local_gb;
  }
  int n = last - first;
  out.core_util_pct = 100.0 * used_cores / (static_cast<double>(n) * cfg.cores_per_server);
  out.stranded_gb = stranded;
  out.stranded_pct = 100.0 * stranded / (static_cast<double>(n) * cfg.local_dram_gb);
  return out;
}

StrandingTracker::StrandingTracker(double bucket_pct) : bucket_pct_(bucket_pct) {
  if (!(bucket_pct > 0 && bucket_pct <= 100)) throw ConfigError("bucket_pct must be in (0, 100]");
  int n = static_cast<int>(std::ceil(100.0 / bucket_pct - 1e-9));
  sum_.assign(n, 0.0);
  n_.assign(n, 0);
}

int StrandingTracker::Index(double core_util_pct) const {
  int i = static_cast<int>(std::floor(core_util_pct / bucket_pct_ + 1e-9));
  return std::clamp(i, 0, static_cast<int>(sum_.size()) - 1);
}

void StrandingTracker::Add(const StrandingSample& s) {
  int i = Index(s.core_util_pct);
  sum_[i] += s.stranded_pct;
  ++n_[i];
}

std::vector<StrandingTracker::Bucket> StrandingTracker::Buckets() const {
  std::vector<Bucket> out;
  for (size_t i = 0; i < sum_.size(); ++i) {
    if (n_[i] == 0) continue;
    double lo = static_cast<double>(i) * bucket_pct_;
    out.push_back({lo, std::min(100.0, lo + bucket_pct_), n_[i], sum_[i] / n_[i]});
  }
  return out;
}

double StrandingTracker::MeanAt(double core_util_pct) const {
  int i = Index(core_util_pct);
  return n_[i] ? sum_[i] / n_[i] : 0.0;
}

}  // namespace poolsim::sim
