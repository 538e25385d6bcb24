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

#include "poolsim/predict/untouched_model.h"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <utility>

namespace poolsim::predict {

double EmpiricalQuantile(std::span<const double> sorted, double percentile) {
  if (sorted.empty()) return 0.0;
  const size_t n = sorted.size();
  auto k = static_cast<size_t>(std::floor(percentile / 100.0 * static_cast<double>(n + 1)));
  k = std::clamp<size_t>(k, 1, n);
  return sorted[k - 1];
}

int MinSamplesForPercentile(double percentile) {
  if (!(percentile > 0.0)) return 0;
  return std::max(1, static_cast<int>(std::ceil(100.0 / percentile - 1e-9)) - 1);
}

void UntouchedHistory::Add(std::string_view customer, int64_t exit_s, double untouched_fraction) {
  pending_.emplace_back(std::string(customer),
                        Observation{exit_s, std::clamp(untouched_fraction, 0.0, 1.0)});
}

void UntouchedHistory::Commit(int64_t now_s) {
  std::set<std::string, std::less<>> touched;
  for (auto& [name, obs] : pending_) {
    auto& c = customers_[name];
    c.window.push_back(obs);
    touched.insert(name);
  }
  pending_.clear();
  const int64_t cutoff = now_s - window_s_;
  for (auto& [name, c] : customers_) {
    size_t before = c.window.size();
    std::erase_if(c.window, [&](const Observation& o) { return o.exit_s < cutoff; });
    if (c.window.size() != before || touched.contains(name)) {
      c.sorted.clear();
      for (const auto& o : c.window) c.sorted.push_back(o.value);
      std::sort(c.sorted.begin(), c.sorted.end());
    }
  }
  std::erase_if(customers_, [](const auto& kv) { return kv.second.window.empty(); });
}

std::span<const double> UntouchedHistory::Sorted(std::string_view customer) const {
  auto it = customers_.find(customer);
  if (it == customers_.end()) return {};
  return it->second.sorted;
}

std::vector<std::string> UntouchedHistory::Customers() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : customers_) out.push_back(name);
  return out;
}

std::map<double, double> UntouchedHistory::Summary(std::string_view customer) const {
  std::map<double, double> out;
  auto sorted = Sorted(customer);
  for (double p : kSummaryPercentiles) out[p] = EmpiricalQuantile(sorted, p);
  return out;
}

double PredictUntouched(const UntouchedHistory& history, std::string_view customer,
                        double target_op) {
  if (!(target_op > 0.0 && target_op <= 50.0)) return 0.0;
  return EmpiricalQuantile(history.Sorted(customer), target_op);
}

int UntouchedModel::RequiredHistory() const {
  return std::max(min_history, MinSamplesForPercentile(target_op));
}

double UntouchedModel::Predict(const UntouchedHistory& history, std::string_view customer) const {
  if (!(target_op > 0.0)) return 0.0;
  if (history.Count(customer) < static_cast<size_t>(RequiredHistory())) return 0.0;
  return PredictUntouched(history, customer, target_op);
}

void ReplayNightlyHistory(
    const trace::Trace& trace, int64_t window_s,
    const std::function<void(const trace::VmRequest&, const UntouchedHistory&)>& on_arrival) {
  UntouchedHistory history(window_s);
  using Exit = std::pair<int64_t, size_t>;  // exit time, trace index
  std::priority_queue<Exit, std::vector<Exit>, std::greater<>> exits;
  int64_t next_midnight = kSecondsPerDay;
  for (size_t i = 0; i < trace.size(); ++i) {
    const auto& vm = trace[i];
    while (next_midnight <= vm.arrival_s) {
      while (!exits.empty() && exits.top().first < next_midnight) {
        const auto& done = trace[exits.top().second];
        history.Add(done.customer_id, done.exit_s(), done.ground_truth.untouched_fraction);
        exits.pop();
      }
      history.Commit(next_midnight);
      next_midnight += kSecondsPerDay;
    }
    on_arrival(vm, history);
    exits.emplace(vm.exit_s(), i);
  }
}

std::vector<UntouchedEvaluation> EvaluateUntouched(const trace::Trace& trace,
                                                   std::span<const UntouchedModel> models,
                                                   int64_t window_s) {
  std::vector<UntouchedEvaluation> out(models.size());
  std::vector<double> um_sum(models.size(), 0.0);
  std::vector<size_t> over(models.size(), 0);
  ReplayNightlyHistory(trace, window_s, [&](const trace::VmRequest& vm, const UntouchedHistory& h) {
    for (size_t m = 0; m < models.size(); ++m) {
      double pred = models[m].Predict(h, vm.customer_id);
      um_sum[m] += pred;
      over[m] += pred > vm.ground_truth.untouched_fraction;
      out[m].with_history += h.Count(vm.customer_id) >= static_cast<size_t>(models[m].RequiredHistory());
      ++out[m].n;
    }
  });
  for (size_t m = 0; m < models.size(); ++m) {
    if (out[m].n == 0) continue;
    out[m].op_rate_pct = 100.0 * static_cast<double>(over[m]) / static_cast<double>(out[m].n);
    out[m].um_pct = 100.0 * um_sum[m] / static_cast<double>(out[m].n);
  }
  return out;
}

}  // namespace poolsim::predict
