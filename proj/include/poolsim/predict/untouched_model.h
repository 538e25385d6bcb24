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
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "poolsim/trace/vm_request.h"

namespace poolsim::predict {

inline constexpr int64_t kSecondsPerDay = 86400;

/// Percentiles of the untouched fraction kept per customer for reporting.
inline constexpr double kSummaryPercentiles[] = {1, 5, 10, 20, 50};

/// Order-statistic quantile of sorted samples: element k-1 with
/// k = max(1, floor(p/100 * (n+1))). For exchangeable samples a fresh draw
/// falls strictly below it with probability at most k/(n+1) <= p/100, as long
/// as n+1 >= 100/p. Returns 0 for an empty input.
double EmpiricalQuantile(std::span<const double> sorted, double percentile);

/// Smallest history for which EmpiricalQuantile keeps the p/100 bound.
int MinSamplesForPercentile(double percentile);

/// Per-customer record of untouched fractions of VMs that exited during the
/// last `window_s` seconds. New observations stay pending until Commit(), so
/// predictions see a frozen view between commits.
class UntouchedHistory {
 public:
  explicit UntouchedHistory(int64_t window_s = 7 * kSecondsPerDay) : window_s_(window_s) {}

  void Add(std::string_view customer, int64_t exit_s, double untouched_fraction);
  /// Publishes pending observations and drops those that exited before
  /// now_s - window.
  void Commit(int64_t now_s);

  /// Sorted committed observations (empty span for unknown customers).
  std::span<const double> Sorted(std::string_view customer) const;
  size_t Count(std::string_view customer) const { return Sorted(customer).size(); }
  size_t pending() const { return pending_.size(); }
  int64_t window_s() const { return window_s_; }

  std::vector<std::string> Customers() const;
  std::map<double, double> Summary(std::string_view customer) const;

 private:
  struct Observation {
    int64_t exit_s;
    double value;
  };
  struct Customer {
    std::deque<Observation> window;  // committed, in commit order
    std::vector<double> sorted;
  };

  int64_t window_s_;
  std::vector<std::pair<std::string, Observation>> pending_;
  std::map<std::string, Customer, std::less<>> customers_;
};

/// Target-OP quantile of the customer's committed history, 0 without history
/// or for target_op outside (0, 50].
double PredictUntouched(const UntouchedHistory& history, std::string_view customer,
                        double target_op);

/// Prediction policy used by the scheduler: the quantile is only trusted
/// once the customer has enough history for the target.
struct UntouchedModel {
  double target_op = 4.0;  // percent; 0 disables the model
  int min_history = 1;

  int RequiredHistory() const;
  double Predict(const UntouchedHistory& history, std::string_view customer) const;
};

/// Replays a trace in arrival order with nightly commits: observations enter
/// when a VM exits and become visible at the first midnight strictly after
/// the exit. Calls `on_arrival` for each VM with the history view in force
/// at its arrival.
void ReplayNightlyHistory(
    const trace::Trace& trace, int64_t window_s,
    const std::function<void(const trace::VmRequest&, const UntouchedHistory&)>& on_arrival);

struct UntouchedEvaluation {
  double op_rate_pct = 0;  // share of VMs whose prediction exceeds the truth
  double um_pct = 0;       // mean predicted untouched fraction, in percent
  size_t n = 0;
  size_t with_history = 0;
};

/// Evaluates several models over one replay of `trace`.
std::vector<UntouchedEvaluation> EvaluateUntouched(const trace::Trace& trace,
                                                   std::span<const UntouchedModel> models,
                                                   int64_t window_s = 7 * kSecondsPerDay);

}  // namespace poolsim::predict
