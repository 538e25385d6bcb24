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

#include "poolsim/trace/trace_io.h"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "poolsim/common/error.h"

namespace poolsim::trace {
namespace {

constexpr std::array<std::string_view, 10> kFixedColumns = {
    "vm_id",     "customer_id",   "vm_type",     "arrival",            "lifetime",
    "cores",     "memory_gb",     "server_hint", "untouched_fraction", "curve_exponent"};
constexpr std::string_view kSlowdownPrefix = "slowdown_";

enum Column : size_t {
  kVmId,
  kCustomer,
  kVmType,
  kArrival,
  kLifetime,
  kCores,
  kMemory,
  kServerHint,
  kUntouched,
  kExponent,
};

std::vector<std::string_view> SplitCsv(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

template <typename T>
T ParseNumber(std::string_view text, size_t line_no, std::string_view field) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(
        fmt::format("line {}: field '{}' has invalid value '{}'", line_no, field, text));
  }
  return value;
}

struct HeaderLayout {
  std::array<size_t, kFixedColumns.size()> fixed{};
  std::vector<std::pair<std::string, size_t>> slowdowns;  // scenario -> column
  size_t width = 0;
};

HeaderLayout ParseHeader(std::string_view line) {
  HeaderLayout layout;
  auto cols = SplitCsv(line);
  layout.width = cols.size();
  std::array<bool, kFixedColumns.size()> seen{};
  std::set<std::string, std::less<>> scenarios;
  for (size_t i = 0; i < cols.size(); ++i) {
    std::string_view name = cols[i];
    bool matched = false;
    for (size_t f = 0; f < kFixedColumns.size(); ++f) {
      if (name == kFixedColumns[f]) {
        if (seen[f]) throw ParseError(fmt::format("line 1: duplicate column '{}'", name));
        seen[f] = true;
        layout.fixed[f] = i;
        matched = true;
      }
    }
    if (matched) continue;
    if (name.starts_with(kSlowdownPrefix) && name.size() > kSlowdownPrefix.size()) {
      std::string scenario(name.substr(kSlowdownPrefix.size()));
      if (!scenarios.insert(scenario).second) {
        throw ParseError(fmt::format("line 1: duplicate column '{}'", name));
      }
      layout.slowdowns.emplace_back(std::move(scenario), i);
      continue;
    }
    throw ParseError(fmt::format("line 1: unknown column '{}'", name));
  }
  for (size_t f = 0; f < kFixedColumns.size(); ++f) {
    if (!seen[f]) {
      throw ParseError(fmt::format("line 1: missing field '{}'", kFixedColumns[f]));
    }
  }
  return layout;
}

VmRequest ParseRecord(std::string_view line, size_t line_no, const HeaderLayout& layout) {
  auto cols = SplitCsv(line);
  auto field = [&](size_t col, std::string_view name, bool allow_empty) -> std::string_view {
    if (col >= cols.size() || (!allow_empty && cols[col].empty())) {
      throw ParseError(fmt::format("line {}: missing field '{}'", line_no, name));
    }
    return cols[col];
  };
  auto fixed = [&](Column c, bool allow_empty = false) {
    return field(layout.fixed[c], kFixedColumns[c], allow_empty);
  };
  if (cols.size() > layout.width) {
    throw ParseError(fmt::format("line {}: {} fields, header has {}", line_no, cols.size(),
                                 layout.width));
  }

  VmRequest vm;
  vm.vm_id = ParseNumber<uint64_t>(fixed(kVmId), line_no, "vm_id");
  vm.customer_id = std::string(fixed(kCustomer));
  vm.vm_type = std::string(fixed(kVmType));
  vm.arrival_s = ParseNumber<int64_t>(fixed(kArrival), line_no, "arrival");
  vm.lifetime_s = ParseNumber<int64_t>(fixed(kLifetime), line_no, "lifetime");
  vm.cores = ParseNumber<int>(fixed(kCores), line_no, "cores");
  vm.memory_gb = ParseNumber<int>(fixed(kMemory), line_no, "memory_gb");
  std::string_view hint = fixed(kServerHint, /*allow_empty=*/true);
  if (!hint.empty()) vm.server_hint = ParseNumber<int>(hint, line_no, "server_hint");
  vm.ground_truth.untouched_fraction =
      ParseNumber<double>(fixed(kUntouched), line_no, "untouched_fraction");
  vm.ground_truth.curve_exponent =
      ParseNumber<double>(fixed(kExponent), line_no, "curve_exponent");
  for (const auto& [scenario, col] : layout.slowdowns) {
    std::string name = fmt::format("{}{}", kSlowdownPrefix, scenario);
    vm.ground_truth.slowdown_full_pool[scenario] =
        ParseNumber<double>(field(col, name, false), line_no, name);
  }
  return vm;
}

void CheckWritable(std::string_view value, const VmRequest& vm, std::string_view field) {
  if (value.find_first_of(",\r\n") != std::string_view::npos) {
    throw ArgumentError(
        fmt::format("vm {}: field '{}' contains a comma or newline", vm.vm_id, field));
  }
}

}  // namespace

Trace ReadTrace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("line 1: empty trace file (no header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  HeaderLayout layout = ParseHeader(line);

  Trace trace;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    VmRequest vm = ParseRecord(line, line_no, layout);
    try {
      Validate(vm);
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("line {}: {}", line_no, e.what()));
    }
    if (!trace.empty() && vm.arrival_s < trace.back().arrival_s) {
      throw ValidationError(fmt::format("line {}: arrival {} precedes previous arrival {}",
                                        line_no, vm.arrival_s, trace.back().arrival_s));
    }
    trace.push_back(std::move(vm));
  }
  ValidateTrace(trace);
  return trace;
}

Trace ReadTrace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open trace '{}'", path.string()));
  return ReadTrace(in);
}

void WriteTrace(const Trace& trace, std::ostream& out) {
  std::set<std::string, std::less<>> scenarios;
  for (const auto& vm : trace) {
    for (const auto& [name, _] : vm.ground_truth.slowdown_full_pool) scenarios.insert(name);
  }
  std::string buf;
  for (size_t i = 0; i < kFixedColumns.size(); ++i) {
    if (i > 0) buf += ',';
    buf += kFixedColumns[i];
  }
  for (const auto& s : scenarios) fmt::format_to(std::back_inserter(buf), ",{}{}", kSlowdownPrefix, s);
  buf += '\n';
  out << buf;

  for (const auto& vm : trace) {
    CheckWritable(vm.customer_id, vm, "customer_id");
    CheckWritable(vm.vm_type, vm, "vm_type");
    buf.clear();
    auto it = std::back_inserter(buf);
    fmt::format_to(it, "{},{},{},{},{},{},{},", vm.vm_id, vm.customer_id, vm.vm_type,
                   vm.arrival_s, vm.lifetime_s, vm.cores, vm.memory_gb);
    if (vm.server_hint) fmt::format_to(it, "{}", *vm.server_hint);
    fmt::format_to(it, ",{:.6f},{:.6f}", vm.ground_truth.untouched_fraction,
                   vm.ground_truth.curve_exponent);
    for (const auto& s : scenarios) {
      auto found = vm.ground_truth.slowdown_full_pool.find(s);
      if (found == vm.ground_truth.slowdown_full_pool.end()) {
        throw ArgumentError(fmt::format("vm {}: no slowdown for scenario '{}'", vm.vm_id, s));
      }
      fmt::format_to(it, ",{:.6f}", found->second);
    }
    buf += '\n';
    out << buf;
  }
}

void WriteTrace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write trace '{}'", path.string()));
  WriteTrace(trace, out);
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace poolsim::trace
