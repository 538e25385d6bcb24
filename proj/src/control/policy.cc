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

#include "poolsim/control/policy.h"

#include <charconv>
#include <vector>

#include <fmt/format.h>

#include "poolsim/common/error.h"

namespace poolsim::control {
namespace {

double ParseDouble(std::string_view text, std::string_view what) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("policy: invalid {} '{}'", what, text));
  }
  return v;
}

}  // namespace

Policy Policy::Static(double fraction) {
  Policy p;
  p.kind = PolicyKind::kStatic;
  p.static_fraction = fraction;
  return p;
}

Policy Policy::Predictive(predict::CombinedConfig combined, bool mitigation) {
  Policy p;
  p.kind = PolicyKind::kPredictive;
  p.combined = combined;
  p.mitigation = mitigation;
  return p;
}

void ValidatePolicy(const Policy& p) {
  if (p.kind == PolicyKind::kStatic && !(p.static_fraction >= 0.0 && p.static_fraction <= 1.0)) {
    throw ConfigError(fmt::format("static fraction {} outside [0,1]", p.static_fraction));
  }
  if (p.kind == PolicyKind::kPredictive) predict::ValidateCombinedConfig(p.combined);
}

Policy ParsePolicy(std::string_view spec) {
  std::string_view name = spec.substr(0, spec.find(':'));
  std::string_view args = name.size() < spec.size() ? spec.substr(name.size() + 1) : "";
  Policy p;
  if (name == "all-local") {
    if (!args.empty()) throw ConfigError("policy all-local takes no arguments");
  } else if (name == "static") {
    if (args.empty()) throw ConfigError("policy static needs a fraction, e.g. static:0.15");
    p = Policy::Static(ParseDouble(args, "static fraction"));
  } else if (name == "predictive") {
    p = Policy::Predictive({});
    while (!args.empty()) {
      std::string_view item = args.substr(0, args.find(','));
      args.remove_prefix(std::min(args.size(), item.size() + 1));
      auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError(fmt::format("policy: expected key=value, got '{}'", item));
      }
      std::string_view key = item.substr(0, eq), value = item.substr(eq + 1);
      if (key == "pdm") {
        p.combined.pdm = ParseDouble(value, "pdm") / 100.0;
      } else if (key == "tp") {
        p.combined.tp = ParseDouble(value, "tp");
      } else if (key == "mitigation") {
        if (value != "on" && value != "off") throw ConfigError("mitigation must be on or off");
        p.mitigation = value == "on";
      } else {
        throw ConfigError(fmt::format("policy: unknown predictive option '{}'", key));
      }
    }
  } else {
    throw ConfigError(fmt::format(
        "unknown policy '{}' (expected all-local, static:<f> or predictive[:pdm=..,tp=..])", name));
  }
  ValidatePolicy(p);
  return p;
}

std::string PolicyName(const Policy& p) {
  switch (p.kind) {
    case PolicyKind::kAllLocal:
      return "all-local";
    case PolicyKind::kStatic:
      return fmt::format("static:{:g}", p.static_fraction);
    case PolicyKind::kPredictive:
      return fmt::format("predictive:pdm={:g},tp={:g}{}", p.combined.pdm * 100.0, p.combined.tp,
                         p.mitigation ? "" : ",mitigation=off");
  }
  return "?";
}

}  // namespace poolsim::control
