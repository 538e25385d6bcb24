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

#include <string>
#include <string_view>

#include "poolsim/predict/tradeoff.h"

namespace poolsim::control {

enum class PolicyKind { kAllLocal, kStatic, kPredictive };

/// How VM memory is split between server-local DRAM and the pool.
///   all-local                   everything local (the baseline)
///   static:<fraction>           floor(fraction * memory) on the pool
///   predictive:pdm=5,tp=98      model-driven split, PDM and TP in percent
struct Policy {
  PolicyKind kind = PolicyKind::kAllLocal;
  double static_fraction = 0;
  predict::CombinedConfig combined;
  /// QoS monitoring and one-time migration (predictive only).
  bool mitigation = true;

  static Policy AllLocal() { return {}; }
  static Policy Static(double fraction);
  static Policy Predictive(predict::CombinedConfig combined, bool mitigation = true);
};

/// Throws ConfigError for unknown names or malformed arguments.
Policy ParsePolicy(std::string_view spec);
/// Canonical spelling, accepted back by ParsePolicy.
std::string PolicyName(const Policy& p);
void ValidatePolicy(const Policy& p);

}  // namespace poolsim::control
