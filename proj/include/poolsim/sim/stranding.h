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
#include <vector>

#include "poolsim/control/cluster_state.h"

namespace poolsim::sim {

struct StrandingSample {
  double core_util_pct = 0;  // cores scheduled / cores present
  double stranded_pct = 0;   // stranded GB / local DRAM present
  double stranded_gb = 0;
};

/// Stranded memory over servers [first, last): free local DRAM on servers
/// whose cores are all rented.
StrandingSample MeasureStranding(const control::ClusterState& state, int first, int last);

/// Mean stranding per core-utilization bucket.
class StrandingTracker {
 public:
  explicit StrandingTracker(double bucket_pct = 5.0);

  void Add(const StrandingSample& s);

  struct Bucket {
    double lo_pct = 0;
    double hi_pct = 0;
    int64_t samples = 0;
    double mean_stranded_pct = 0;
  };
  /// Nonempty buckets in ascending order.
  std::vector<Bucket> Buckets() const;
  /// Mean of the bucket containing `core_util_pct` (0 if empty).
  double MeanAt(double core_util_pct) const;
  double bucket_pct() const { return bucket_pct_; }

 private:
  int Index(double core_util_pct) const;

  double bucket_pct_;
  std::vector<double> sum_;
  std::vector<int64_t> n_;
};

}  // namespace poolsim::sim
