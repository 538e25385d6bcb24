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

#include "poolsim/control/event_log.h"

#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "poolsim/common/error.h"

namespace poolsim::control {

std::string_view EventKindName(EventKind kind) {
  switch (kind) {
    case EventKind::kSchedule: return "schedule";
    case EventKind::kScheduleFailed: return "schedule_failed";
    case EventKind::kExit: return "exit";
    case EventKind::kDrainComplete: return "drain_complete";
    case EventKind::kMigrationStart: return "migration_start";
    case EventKind::kMigrationComplete: return "migration_complete";
    case EventKind::kMigrationCancelled: return "migration_cancelled";
    case EventKind::kMitigationDeferred: return "mitigation_deferred";
  }
  return "unknown";
}

namespace {

nlohmann::ordered_json ToJson(const Event& e) {
  nlohmann::ordered_json j;
  j["t_ms"] = e.t_ms;
  j["event"] = EventKindName(e.kind);
  if (e.kind != EventKind::kDrainComplete) j["vm_id"] = e.vm_id;
  if (e.server >= 0) j["server"] = e.server;
  if (e.pool >= 0) j["pool"] = e.pool;
  if (e.slice >= 0) j["slice"] = e.slice;
  if (e.kind == EventKind::kSchedule) {
    j["cores"] = e.cores;
    j["memory_gb"] = e.memory_gb;
    j["local_gb"] = e.local_gb;
    j["pool_gb"] = e.pool_gb;
    j["ready_before"] = e.ready_before;
    j["touched_gb"] = e.touched_gb;
    j["slowdown"] = e.slowdown;
    j["moved"] = e.moved;
    j["insensitive"] = e.insensitive;
  } else if (e.pool_gb > 0) {
    j["pool_gb"] = e.pool_gb;
  }
  if (!e.reason.empty()) j["reason"] = e.reason;
  return j;
}

}  // namespace

void EventLog::WriteJsonl(std::ostream& out) const {
  for (const auto& e : events_) out << ToJson(e).dump() << '\n';
}

void EventLog::WriteJsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write event log '{}'", path));
  WriteJsonl(out);
  if (!out) throw IoError(fmt::format("write failed for '{}'", path));
}

}  // namespace poolsim::control
