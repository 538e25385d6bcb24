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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "poolsim/control/cluster_state.h"
#include "poolsim/control/qos_monitor.h"
#include "poolsim/trace/trace_generator.h"

// YAML config files. Every key is optional and falls back to the compiled
// default; unknown keys and wrongly typed values raise ConfigError with the
// offending key and line, malformed YAML raises ParseError and unreadable
// files IoError. Loaded configs are validated before they are returned.
namespace poolsim::config {

/// Cluster file: cluster shape plus optional `timing`, `latency_ns` and
/// `qos` sections.
struct ClusterFile {
  control::ClusterConfig cluster;
  control::QosConfig qos;
};

/// Run file. Paths are resolved against the file's directory; `cluster` is
/// either an inline mapping or a path to a cluster file.
struct RunConfig {
  std::string trace;
  std::string models;
  std::string out;
  ClusterFile cluster;
  std::string policy = "all-local";
  uint64_t seed = 1;
  int64_t warmup_s = 0;
  double accounting_pdm = 0.05;
  bool record_events = false;
  bool check_invariants = false;
  std::vector<int> sizes = {8, 16, 32, 64};
  int jobs = 1;
};

trace::TraceGenConfig ParseTraceGenConfig(std::string_view yaml,
                                          std::string_view source = "<string>");
trace::TraceGenConfig LoadTraceGenConfig(const std::filesystem::path& path);

ClusterFile ParseClusterFile(std::string_view yaml, std::string_view source = "<string>");
ClusterFile LoadClusterFile(const std::filesystem::path& path);

/// `base_dir` anchors relative paths inside the document.
RunConfig ParseRunConfig(std::string_view yaml, const std::filesystem::path& base_dir = {},
                         std::string_view source = "<string>");
RunConfig LoadRunConfig(const std::filesystem::path& path);

/// Markdown page listing every key of the three file kinds with its type,
/// default and meaning.
std::string ConfigReference();

}  // namespace poolsim::config
