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

#include "poolsim/predict/model_snapshot.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

#include "poolsim/common/error.h"

namespace poolsim::predict {
namespace {

using nlohmann::json;

constexpr char kFormat[] = "poolsim-model";

json Number(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : "-inf";
}

double ToNumber(const json& j) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ParseError(fmt::format("expected a number, got \"{}\"", s));
  }
  return j.get<double>();
}

json CurveToJson(const TradeoffCurve& c) {
  json arr = json::array();
  for (const auto& p : c.points()) arr.push_back({p.rate, p.value, Number(p.knob)});
  return arr;
}

TradeoffCurve CurveFromJson(const json& j) {
  std::vector<CurvePoint> pts;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 3) throw ParseError("curve point must be [rate, value, knob]");
    pts.push_back({p[0].get<double>(), p[1].get<double>(), ToNumber(p[2])});
  }
  return TradeoffCurve(std::move(pts));
}

json TreeToJson(const Tree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    if (n.feature < 0) {
      nodes.push_back({{"leaf", n.value}});
    } else {
      nodes.push_back({{"feature", FeatureName(n.feature)},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right}});
    }
  }
  return nodes;
}

int FeatureIndex(const std::string& name) {
  for (int i = 0; i < SensitivityFeatures::kCount; ++i) {
    if (name == FeatureName(i)) return i;
  }
  throw ParseError(fmt::format("unknown feature '{}'", name));
}

Tree TreeFromJson(const json& j) {
  Tree t;
  for (const auto& n : j) {
    TreeNode node;
    if (n.contains("leaf")) {
      node.value = n.at("leaf").get<double>();
    } else {
      node.feature = FeatureIndex(n.at("feature").get<std::string>());
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<int>();
      node.right = n.at("right").get<int>();
    }
    t.nodes.push_back(node);
  }
  const int size = static_cast<int>(t.nodes.size());
  if (size == 0) throw ParseError("empty tree");
  for (int i = 0; i < size; ++i) {
    const auto& n = t.nodes[i];
    if (n.feature >= 0 && (n.left <= i || n.right <= i || n.left >= size || n.right >= size)) {
      throw ParseError("tree child index out of range");
    }
  }
  return t;
}

json ToJson(const ModelSnapshot& s) {
  json classifier = {{"kind", ClassifierKindName(s.classifier.kind())},
                     {"threshold", Number(s.classifier.threshold())}};
  if (s.classifier.kind() == ClassifierKind::kForest) {
    json trees = json::array();
    for (const auto& t : s.classifier.trees()) trees.push_back(TreeToJson(t));
    classifier["trees"] = std::move(trees);
  }
  const auto& tc = s.telemetry;
  json customers = json::object();
  for (const auto& [name, c] : s.customers) {
    json pct = json::object();
    for (const auto& [p, v] : c.percentiles) pct[fmt::format("{:g}", p)] = v;
    customers[name] = {{"n", c.n}, {"untouched_percentiles", pct}};
  }
  return {
      {"format", kFormat},
      {"version", kSnapshotFormatVersion},
      {"scenario", s.scenario},
      {"combined", {{"pdm", s.combined.pdm}, {"tp", s.combined.tp}}},
      {"labeled_samples", s.labeled_samples},
      {"classifier", std::move(classifier)},
      {"telemetry",
       {{"reference_scenario", tc.reference_scenario},
        {"slowdown_scale", tc.slowdown_scale},
        {"dram_sigma", tc.dram_sigma},
        {"dram_floor_sigma", tc.dram_floor_sigma},
        {"memory_base", tc.memory_base},
        {"memory_gain", tc.memory_gain},
        {"memory_sigma", tc.memory_sigma},
        {"memory_floor_sigma", tc.memory_floor_sigma},
        {"seed", tc.seed}}},
      {"untouched",
       {{"target_op", s.untouched.target_op},
        {"min_history", s.untouched.min_history},
        {"history_window_s", s.history_window_s}}},
      {"curves", {{"li_of_fp", CurveToJson(s.curves.li_of_fp)},
                  {"um_of_op", CurveToJson(s.curves.um_of_op)}}},
      {"solution",
       {{"fp", s.solution.fp},
        {"op", s.solution.op},
        {"li", s.solution.li},
        {"um", s.solution.um},
        {"objective", s.solution.objective},
        {"pool_share_pct", s.solution.PoolSharePct()}}},
      {"customers", std::move(customers)},
  };
}

ModelSnapshot FromJson(const json& j) {
  if (!j.is_object() || j.value("format", "") != kFormat) {
    throw ParseError("not a model snapshot (missing format header)");
  }
  if (j.at("version").get<int>() != kSnapshotFormatVersion) {
    throw ParseError(fmt::format("unsupported model snapshot version {}", j.at("version").dump()));
  }
  ModelSnapshot s;
  s.scenario = j.at("scenario").get<std::string>();
  s.combined.pdm = j.at("combined").at("pdm").get<double>();
  s.combined.tp = j.at("combined").at("tp").get<double>();
  s.labeled_samples = j.at("labeled_samples").get<size_t>();

  const auto& c = j.at("classifier");
  ClassifierKind kind = ParseClassifierKind(c.at("kind").get<std::string>());
  if (kind == ClassifierKind::kForest) {
    std::vector<Tree> trees;
    for (const auto& t : c.at("trees")) trees.push_back(TreeFromJson(t));
    s.classifier = SensitivityModel::FromTrees(std::move(trees));
  }
  s.classifier.set_threshold(ToNumber(c.at("threshold")));

  const auto& t = j.at("telemetry");
  s.telemetry.reference_scenario = t.at("reference_scenario").get<std::string>();
  s.telemetry.slowdown_scale = t.at("slowdown_scale").get<double>();
  s.telemetry.dram_sigma = t.at("dram_sigma").get<double>();
  s.telemetry.dram_floor_sigma = t.at("dram_floor_sigma").get<double>();
  s.telemetry.memory_base = t.at("memory_base").get<double>();
  s.telemetry.memory_gain = t.at("memory_gain").get<double>();
  s.telemetry.memory_sigma = t.at("memory_sigma").get<double>();
  s.telemetry.memory_floor_sigma = t.at("memory_floor_sigma").get<double>();
  s.telemetry.seed = t.at("seed").get<uint64_t>();

  const auto& u = j.at("untouched");
  s.untouched.target_op = u.at("target_op").get<double>();
  s.untouched.min_history = u.at("min_history").get<int>();
  s.history_window_s = u.at("history_window_s").get<int64_t>();

  s.curves.li_of_fp = CurveFromJson(j.at("curves").at("li_of_fp"));
  s.curves.um_of_op = CurveFromJson(j.at("curves").at("um_of_op"));
  const auto& sol = j.at("solution");
  s.solution.fp = sol.at("fp").get<double>();
  s.solution.op = sol.at("op").get<double>();
  s.solution.li = sol.at("li").get<double>();
  s.solution.um = sol.at("um").get<double>();
  s.solution.objective = sol.at("objective").get<double>();

  for (const auto& [name, cj] : j.at("customers").items()) {
    CustomerSummary cs;
    cs.n = cj.at("n").get<size_t>();
    for (const auto& [p, v] : cj.at("untouched_percentiles").items()) {
      cs.percentiles[std::stod(p)] = v.get<double>();
    }
    s.customers[name] = std::move(cs);
  }
  return s;
}

}  // namespace

void WriteModelSnapshot(const ModelSnapshot& snapshot, std::ostream& out) {
  out << ToJson(snapshot).dump(2) << '\n';
}

void WriteModelSnapshot(const ModelSnapshot& snapshot, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write model snapshot '{}'", path.string()));
  WriteModelSnapshot(snapshot, out);
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

ModelSnapshot ReadModelSnapshot(std::istream& in) {
  try {
    return FromJson(json::parse(in));
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("model snapshot: {}", e.what()));
  } catch (const ArgumentError& e) {
    throw ParseError(fmt::format("model snapshot: {}", e.what()));
  } catch (const ConfigError& e) {
    throw ParseError(fmt::format("model snapshot: {}", e.what()));
  } catch (const CalibrationError& e) {
    throw ParseError(fmt::format("model snapshot: {}", e.what()));
  }
}

ModelSnapshot ReadModelSnapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open model snapshot '{}'", path.string()));
  return ReadModelSnapshot(in);
}

}  // namespace poolsim::predict
