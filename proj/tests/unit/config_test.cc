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

#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "poolsim/common/error.h"
#include "poolsim/config/yaml_config.h"

namespace poolsim::config {
namespace {

namespace fs = std::filesystem;

// Message of the error `fn` throws; fails the test if it does not throw E.
template <class E, class Fn>
std::string ErrorOf(Fn fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected exception";
  return "";
}

TEST(TraceGenConfig, EmptyDocumentKeepsDefaults) {
  trace::TraceGenConfig d;
  trace::TraceGenConfig c = ParseTraceGenConfig("");
  EXPECT_EQ(c.n_vms, d.n_vms);
  EXPECT_EQ(c.core_sizes, d.core_sizes);
  EXPECT_EQ(c.slowdown_mixtures.size(), 2u);
}

TEST(TraceGenConfig, OverridesFields) {
  trace::TraceGenConfig c = ParseTraceGenConfig(R"(
# small trace
n_vms: 500
seed: 9
core_sizes: [1, 2]
core_weights: [0.5, 0.5]
slowdown_mixtures:
  "182": {edges: [0, 0.1, 0.2], weights: [0.9, 0.1]}
)");
  EXPECT_EQ(c.n_vms, 500u);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.core_sizes, (std::vector<int>{1, 2}));
  ASSERT_EQ(c.slowdown_mixtures.size(), 1u);
  EXPECT_EQ(c.slowdown_mixtures.at("182").weights, (std::vector<double>{0.9, 0.1}));
}

TEST(TraceGenConfig, RejectsUnknownKeysAndBadTypes) {
  std::string msg =
      ErrorOf<ConfigError>([] { ParseTraceGenConfig("n_vms: 5\nn_vm: 3\n", "t.yaml"); });
  EXPECT_NE(msg.find("t.yaml:2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("n_vm"), std::string::npos);
  msg = ErrorOf<ConfigError>([] { ParseTraceGenConfig("n_vms: lots\n"); });
  EXPECT_NE(msg.find("unsigned integer"), std::string::npos) << msg;
  EXPECT_THROW(ParseTraceGenConfig("n_vms: -4\n"), ConfigError);
  EXPECT_THROW(ParseTraceGenConfig("core_sizes: 4\n"), ConfigError);
  EXPECT_THROW(ParseTraceGenConfig("seed: [1]\n"), ConfigError);
  // Passes parsing, fails validation.
  EXPECT_THROW(ParseTraceGenConfig("core_weights: [1]\n"), ConfigError);
}

TEST(TraceGenConfig, MalformedYamlIsAParseError) {
  EXPECT_THROW(ParseTraceGenConfig("n_vms: [1, 2\n"), ParseError);
  EXPECT_THROW(ParseTraceGenConfig("- just\n- a list\n"), ConfigError);
}

TEST(ClusterFile, NestedSections) {
  ClusterFile f = ParseClusterFile(R"(
n_servers: 64
pool_sockets: 32
scenario: "222"
timing: {migration_ms_per_pool_gb: 20}
latency_ns: {8: 75, 16: 90, 32: 180, 64: 210}
qos:
  period_ms: 500
)");
  EXPECT_EQ(f.cluster.n_servers, 64);
  EXPECT_EQ(f.cluster.pool_sockets, 32);
  EXPECT_EQ(f.cluster.scenario, "222");
  EXPECT_EQ(f.cluster.timing.migration_ms_per_pool_gb, 20.0);
  EXPECT_EQ(f.cluster.timing.offline_ms_per_gb_max, 100.0);
  EXPECT_EQ(f.cluster.latency.added_ns.at(8), 75.0);
  EXPECT_EQ(f.qos.period_ms, 500);
}

TEST(ClusterFile, ValidatesAfterParsing) {
  EXPECT_THROW(ParseClusterFile("scenario: \"150\"\n"), ConfigError);
  EXPECT_THROW(ParseClusterFile("pool_sockets: 12\n"), ConfigError);
  std::string msg = ErrorOf<ConfigError>([] { ParseClusterFile("qos: {period: 5}\n"); });
  EXPECT_NE(msg.find("qos.period"), std::string::npos) << msg;
  EXPECT_THROW(ParseClusterFile("qos: {period_ms: 0}\n"), ConfigError);
}

TEST(RunConfig, ResolvesPathsAndClusterFiles) {
  fs::path dir = fs::temp_directory_path() / "poolsim_config_test";
  fs::create_directories(dir);
  std::ofstream(dir / "cluster.yaml") << "n_servers: 32\nservers_per_cluster: 32\n";
  std::ofstream(dir / "run.yaml") << "trace: data/t.csv\ncluster: cluster.yaml\n"
                                     "policy: static:0.25\nsizes: [16, 8]\n";
  RunConfig r = LoadRunConfig(dir / "run.yaml");
  EXPECT_EQ(fs::path(r.trace), dir / "data/t.csv");
  EXPECT_EQ(r.cluster.cluster.n_servers, 32);
  EXPECT_EQ(r.policy, "static:0.25");
  EXPECT_EQ(r.sizes, (std::vector<int>{16, 8}));

  RunConfig inline_cluster = ParseRunConfig("cluster: {n_servers: 64}\ntrace: /abs.csv\n", dir);
  EXPECT_EQ(inline_cluster.cluster.cluster.n_servers, 64);
  EXPECT_EQ(inline_cluster.trace, "/abs.csv");

  EXPECT_THROW(ParseRunConfig("policy: greedy\n"), ConfigError);
  EXPECT_THROW(ParseRunConfig("cluster: {pool_size: 8}\n"), ConfigError);
  EXPECT_THROW(ParseRunConfig("cluster: missing.yaml\n", dir), IoError);
  EXPECT_THROW(LoadRunConfig(dir / "nope.yaml"), IoError);
  fs::remove_all(dir);
}

TEST(ConfigReference, ListsEveryKeyWithDefaults) {
  std::string ref = ConfigReference();
  for (const char* key : {"`n_vms`", "`untouched_median`", "`pool_sockets`",
                          "`timing.offline_ms_per_gb_min`", "`qos.budget_fraction`",
                          "`latency_ns`", "`policy`", "`warmup_s`"}) {
    EXPECT_NE(ref.find(key), std::string::npos) << key;
  }
  EXPECT_NE(ref.find("| `pool_sockets` | integer | `16` |"), std::string::npos);
}

}  // namespace
}  // namespace poolsim::config
