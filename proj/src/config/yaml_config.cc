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

#include "poolsim/config/yaml_config.h"

#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <yaml-cpp/yaml.h>

#include "poolsim/common/error.h"
#include "poolsim/control/policy.h"

namespace poolsim::config {
namespace {

namespace fs = std::filesystem;

std::string Where(std::string_view source, const YAML::Node& node) {
  int line = node.Mark().line;
  return line < 0 ? std::string(source) : fmt::format("{}:{}", source, line + 1);
}

template <class T>
std::string TypeName() {
  if constexpr (std::is_same_v<T, bool>) return "bool";
  else if constexpr (std::is_same_v<T, std::string>) return "string";
  else if constexpr (std::is_floating_point_v<T>) return "number";
  else if constexpr (std::is_unsigned_v<T>) return "unsigned integer";
  else if constexpr (std::is_integral_v<T>) return "integer";
  else return "list of " + TypeName<typename T::value_type>();
}

template <class T>
std::string Show(const T& v) {
  if constexpr (std::is_same_v<T, std::string>) return v.empty() ? "\"\"" : v;
  else if constexpr (std::is_arithmetic_v<T>) return fmt::format("{}", v);
  else return fmt::format("[{}]", fmt::join(v, ", "));
}

// One documented key. `set` receives the value node and the file name used
// in error messages.
struct Field {
  std::string key;
  std::string type;
  std::string default_value;
  std::string doc;
  std::function<void(const YAML::Node&, std::string_view)> set;
};
using Schema = std::vector<Field>;

template <class T>
void Bind(Schema& s, std::string key, T& target, std::string doc) {
  constexpr bool kScalar = std::is_arithmetic_v<T> || std::is_same_v<T, std::string>;
  s.push_back({key, TypeName<T>(), Show(target), std::move(doc),
               [&target, key](const YAML::Node& n, std::string_view src) {
                 try {
                   if (kScalar ? !n.IsScalar() : !n.IsSequence()) {
                     throw YAML::BadConversion(n.Mark());
                   }
                   // yaml-cpp wraps negative values into unsigned targets.
                   if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
                     if (n.Scalar().starts_with('-')) throw YAML::BadConversion(n.Mark());
                   }
                   target = n.as<T>();
                 } catch (const YAML::Exception&) {
                   throw ConfigError(fmt::format("{}: key '{}' expects a {}", Where(src, n), key,
                                                 TypeName<T>()));
                 }
               }});
}

void Apply(const YAML::Node& node, const Schema& schema, std::string_view source,
           const std::string& prefix = "") {
  if (!node || node.IsNull()) return;
  if (!node.IsMap()) {
    throw ConfigError(fmt::format("{}: {} must be a mapping", Where(source, node),
                                  prefix.empty() ? "document" : "'" + prefix + "'"));
  }
  for (const auto& kv : node) {
    std::string key = kv.first.as<std::string>();
    auto it = std::find_if(schema.begin(), schema.end(),
                           [&](const Field& f) { return f.key == key; });
    if (it == schema.end()) {
      throw ConfigError(
          fmt::format("{}: unknown key '{}{}'", Where(source, kv.first), prefix, key));
    }
    it->set(kv.second, source);
  }
}

// Nested mapping documented under dotted keys.
Field Section(std::string key, std::string doc, std::function<Schema()> make) {
  return {key, "mapping", "", std::move(doc),
          [key, make](const YAML::Node& n, std::string_view src) {
            Apply(n, make(), src, key + ".");
          }};
}

YAML::Node ParseYaml(std::string_view text, std::string_view source) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ParseError(fmt::format("{}:{}: {}", source, e.mark.line + 1, e.msg));
  }
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Schema TraceGenSchema(trace::TraceGenConfig& c) {
  Schema s;
  Bind(s, "n_vms", c.n_vms, "VMs to generate");
  Bind(s, "n_clusters", c.n_clusters, "clusters in the reference placement");
  Bind(s, "servers_per_cluster", c.servers_per_cluster, "servers per cluster");
  Bind(s, "cores_per_server", c.cores_per_server, "cores per server");
  Bind(s, "dram_gb_per_server", c.dram_gb_per_server, "local DRAM per server (GB)");
  Bind(s, "target_core_utilization", c.target_core_utilization,
       "expected share of allocated cores; sets the arrival rate");
  Bind(s, "diurnal_amplitude", c.diurnal_amplitude, "relative amplitude of the daily cycle");
  Bind(s, "lifetime_median_s", c.lifetime_median_s, "median VM lifetime (s)");
  Bind(s, "lifetime_sigma", c.lifetime_sigma, "standard deviation of log-lifetime");
  Bind(s, "min_lifetime_s", c.min_lifetime_s, "shortest lifetime (s)");
  Bind(s, "core_sizes", c.core_sizes, "VM core counts");
  Bind(s, "core_weights", c.core_weights, "probability of each core count");
  Bind(s, "gb_per_core", c.gb_per_core, "memory-to-core ratios (GB per core)");
  Bind(s, "gb_per_core_weights", c.gb_per_core_weights, "probability of each ratio");
  Bind(s, "best_fit_probability", c.best_fit_probability,
       "share of placements that pick the fullest fitting server");
  Bind(s, "emit_server_hint", c.emit_server_hint, "write the reference placement");
  Bind(s, "n_customers", c.n_customers, "customer population");
  Bind(s, "customer_zipf_exponent", c.customer_zipf_exponent, "customer popularity skew");
  Bind(s, "customer_strata", c.customer_strata,
       "customers per stratum when drawing customer latents");
  Bind(s, "untouched_median", c.untouched_median, "median untouched-memory fraction");
  Bind(s, "untouched_zero_mass", c.untouched_zero_mass, "share of VMs touching all memory");
  Bind(s, "untouched_concentration", c.untouched_concentration,
       "alpha + beta of the untouched Beta body");
  Bind(s, "untouched_customer_correlation", c.untouched_customer_correlation,
       "copula correlation of untouched fractions within a customer");
  s.push_back({"slowdown_mixtures", "mapping", "182 and 222 built in",
               "scenario -> {edges: [...], weights: [...]}; replaces the built-in mixtures",
               [&c](const YAML::Node& n, std::string_view src) {
                 if (!n.IsMap()) {
                   throw ConfigError(fmt::format("{}: 'slowdown_mixtures' must be a mapping",
                                                 Where(src, n)));
                 }
                 c.slowdown_mixtures.clear();
                 for (const auto& kv : n) {
                   std::string name = kv.first.as<std::string>();
                   trace::SlowdownMixture m;
                   Schema ms;
                   Bind(ms, "edges", m.edges, "");
                   Bind(ms, "weights", m.weights, "");
                   Apply(kv.second, ms, src, "slowdown_mixtures." + name + ".");
                   c.slowdown_mixtures[name] = std::move(m);
                 }
               }});
  Bind(s, "slowdown_customer_correlation", c.slowdown_customer_correlation,
       "copula correlation of slowdowns within a customer");
  Bind(s, "exponent_min", c.exponent_min, "smallest slowdown-curve exponent");
  Bind(s, "exponent_max", c.exponent_max, "largest slowdown-curve exponent");
  Bind(s, "exponent_beta_a", c.exponent_beta_a, "Beta shape a of the exponent");
  Bind(s, "exponent_beta_b", c.exponent_beta_b, "Beta shape b of the exponent");
  Bind(s, "seed", c.seed, "random seed");
  return s;
}

Schema TimingSchema(hw::TimingModel& t) {
  Schema s;
  Bind(s, "offline_ms_per_gb_min", t.offline_ms_per_gb_min, "fastest slice offlining (ms/GB)");
  Bind(s, "offline_ms_per_gb_max", t.offline_ms_per_gb_max, "slowest slice offlining (ms/GB)");
  Bind(s, "online_us_per_gb", t.online_us_per_gb, "slice onlining (us/GB)");
  Bind(s, "migration_ms_per_pool_gb", t.migration_ms_per_pool_gb,
       "mitigation time per GB moved from pool to local (ms)");
  return s;
}

Schema QosSchema(control::QosConfig& q) {
  Schema s;
  Bind(s, "period_ms", q.period_ms, "monitoring period (ms)");
  Bind(s, "noise_sigma", q.noise_sigma, "noise on each slowdown observation");
  Bind(s, "min_observations", q.min_observations, "observations before a VM can be flagged");
  Bind(s, "settle_observations", q.settle_observations,
       "observations after which a VM under the PDM stops being watched");
  Bind(s, "budget_fraction", q.budget_fraction,
       "migrations allowed per window as a share of VMs");
  Bind(s, "budget_window_ms", q.budget_window_ms, "rolling migration-budget window (ms)");
  return s;
}

Schema ClusterSchema(ClusterFile& f) {
  auto& c = f.cluster;
  Schema s;
  Bind(s, "n_servers", c.n_servers, "servers in the simulation");
  Bind(s, "servers_per_cluster", c.servers_per_cluster,
       "servers per cluster; moved VMs stay in their cluster");
  Bind(s, "cores_per_server", c.cores_per_server, "cores per server");
  Bind(s, "local_dram_gb", c.local_dram_gb, "local DRAM per server (GB)");
  Bind(s, "pool_sockets", c.pool_sockets, "sockets sharing one pool: 8, 16, 32 or 64");
  Bind(s, "pool_gb_per_socket", c.pool_gb_per_socket, "pool capacity per attached socket (GB)");
  Bind(s, "slices_per_emc", c.slices_per_emc, "1 GB slices per memory controller");
  Bind(s, "scenario", c.scenario, "latency scenario: 182 or 222");
  s.push_back(Section("timing", "pool timing model", [&c] { return TimingSchema(c.timing); }));
  s.push_back({"latency_ns", "mapping", "{8: 70, 16: 90, 32: 180, 64: 210}",
               "pool size -> added latency over local DRAM (ns)",
               [&c](const YAML::Node& n, std::string_view src) {
                 try {
                   if (!n.IsMap()) throw YAML::BadConversion(n.Mark());
                   c.latency.added_ns = n.as<std::map<int, double>>();
                 } catch (const YAML::Exception&) {
                   throw ConfigError(fmt::format(
                       "{}: key 'latency_ns' expects a mapping of integer to number",
                       Where(src, n)));
                 }
               }});
  s.push_back(Section("qos", "QoS monitoring and mitigation", [&f] { return QosSchema(f.qos); }));
  return s;
}

void Validate(const ClusterFile& f) {
  control::ValidateClusterConfig(f.cluster);
  control::ValidateQosConfig(f.qos);
}

Schema RunSchema(RunConfig& r, const fs::path& base_dir) {
  auto resolve = [base_dir](std::string& p) {
    if (!p.empty() && fs::path(p).is_relative() && !base_dir.empty()) {
      p = (base_dir / p).lexically_normal().string();
    }
  };
  Schema s;
  auto bind_path = [&](std::string key, std::string& target, std::string doc) {
    Bind(s, std::move(key), target, std::move(doc));
    s.back().set = [inner = s.back().set, &target, resolve](const YAML::Node& n,
                                                             std::string_view src) {
      inner(n, src);
      resolve(target);
    };
  };
  bind_path("trace", r.trace, "trace file");
  bind_path("models", r.models, "model snapshot (predictive policies)");
  bind_path("out", r.out, "output directory");
  s.push_back({"cluster", "mapping or string", "defaults",
               "inline cluster settings or the path of a cluster file",
               [&r, resolve](const YAML::Node& n, std::string_view src) {
                 if (n.IsScalar()) {
                   std::string p = n.as<std::string>();
                   resolve(p);
                   r.cluster = LoadClusterFile(p);
                 } else {
                   Apply(n, ClusterSchema(r.cluster), src, "cluster.");
                 }
               }});
  Bind(s, "policy", r.policy, "all-local, static:<fraction> or predictive:pdm=<%>,tp=<%>");
  Bind(s, "seed", r.seed, "simulation seed");
  Bind(s, "warmup_s", r.warmup_s, "seconds excluded from peak measurement");
  Bind(s, "accounting_pdm", r.accounting_pdm,
       "slowdown bound for counting mispredictions of non-predictive policies");
  Bind(s, "record_events", r.record_events, "write the event log");
  Bind(s, "check_invariants", r.check_invariants, "re-verify capacities after every event");
  Bind(s, "sizes", r.sizes, "pool sizes for sweeps");
  Bind(s, "jobs", r.jobs, "parallel runs for sweeps");
  return s;
}

void AppendTable(std::string& out, const Schema& schema, const std::string& prefix = "") {
  for (const auto& f : schema) {
    out += fmt::format("| `{}{}` | {} | {} | {} |\n", prefix, f.key, f.type,
                       f.default_value.empty() ? "" : "`" + f.default_value + "`", f.doc);
  }
}

}  // namespace

trace::TraceGenConfig ParseTraceGenConfig(std::string_view yaml, std::string_view source) {
  trace::TraceGenConfig c;
  Apply(ParseYaml(yaml, source), TraceGenSchema(c), source);
  trace::ValidateConfig(c);
  return c;
}

trace::TraceGenConfig LoadTraceGenConfig(const fs::path& path) {
  return ParseTraceGenConfig(ReadFile(path), path.string());
}

ClusterFile ParseClusterFile(std::string_view yaml, std::string_view source) {
  ClusterFile f;
  Apply(ParseYaml(yaml, source), ClusterSchema(f), source);
  Validate(f);
  return f;
}

ClusterFile LoadClusterFile(const fs::path& path) {
  return ParseClusterFile(ReadFile(path), path.string());
}

RunConfig ParseRunConfig(std::string_view yaml, const fs::path& base_dir,
                         std::string_view source) {
  RunConfig r;
  Apply(ParseYaml(yaml, source), RunSchema(r, base_dir), source);
  Validate(r.cluster);
  control::ParsePolicy(r.policy);
  if (r.warmup_s < 0) throw ConfigError("warmup_s must be >= 0");
  if (r.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (!(r.accounting_pdm >= 0)) throw ConfigError("accounting_pdm must be >= 0");
  return r;
}

RunConfig LoadRunConfig(const fs::path& path) {
  return ParseRunConfig(ReadFile(path), path.parent_path(), path.string());
}

std::string ConfigReference() {
  std::string out =
      "# Configuration reference\n\n"
      "All files are YAML. Every key is optional; omitted keys keep the default shown.\n"
      "Unknown keys are rejected.\n";
  const std::string header = "\n| key | type | default | meaning |\n|---|---|---|---|\n";

  trace::TraceGenConfig tg;
  out += "\n## Trace generator (`gen-trace --config`)\n" + header;
  AppendTable(out, TraceGenSchema(tg));
  out += "\nDefault slowdown mixtures (full-pool slowdown, piecewise uniform):\n\n";
  for (const auto& [name, m] : tg.slowdown_mixtures) {
    out += fmt::format("- `{}`: edges [{}], weights [{}]\n", name, fmt::join(m.edges, ", "),
                       fmt::join(m.weights, ", "));
  }

  ClusterFile cf;
  out += "\n## Cluster (`--cluster`)\n" + header;
  for (const auto& f : ClusterSchema(cf)) {
    if (f.key == "timing") {
      AppendTable(out, TimingSchema(cf.cluster.timing), "timing.");
    } else if (f.key == "qos") {
      AppendTable(out, QosSchema(cf.qos), "qos.");
    } else {
      AppendTable(out, {f});
    }
  }

  RunConfig rc;
  out += "\n## Run (`run --config`, `sweep --config`)\n\n"
         "Command-line flags override values from the file.\n" +
         header;
  AppendTable(out, RunSchema(rc, {}));
  return out;
}

}  // namespace poolsim::config
