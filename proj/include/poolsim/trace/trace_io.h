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

#include <filesystem>
#include <iosfwd>

#include "poolsim/trace/vm_request.h"

namespace poolsim::trace {

// Trace files are UTF-8 CSV with a header row. Columns:
//
//   vm_id,customer_id,vm_type,arrival,lifetime,cores,memory_gb,server_hint,
//   untouched_fraction,curve_exponent,slowdown_<scenario>...
//
// Times are integer seconds, fractions carry at most six decimals and an
// empty server_hint means "no placement in the trace". One slowdown column
// per latency scenario, written in sorted scenario order.

/// Throws ParseError (with the 1-based line number and field name) on
/// malformed input and ValidationError on records that break invariants or
/// arrive out of order.
Trace ReadTrace(std::istream& in);
Trace ReadTrace(const std::filesystem::path& path);

/// Writes the canonical form. Throws ArgumentError if a string field would
/// not survive a round trip (embedded comma or newline) and IoError if the
/// file cannot be written.
void WriteTrace(const Trace& trace, std::ostream& out);
void WriteTrace(const Trace& trace, const std::filesystem::path& path);

}  // namespace poolsim::trace
