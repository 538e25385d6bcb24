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
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace poolsim::control {

enum class EventKind {
  kSchedule,
  kScheduleFailed,
  kExit,
  kDrainComplete,
  kMigrationStart,
  kMigrationComplete,
  kMigrationCancelled,
  kMitigationDeferred,
};

std::string_view EventKindName(EventKind kind);

/// One control-plane decision. Fields that do not apply to a kind keep their
/// defaults and are left out of the JSONL form.
struct Event {
  int64_t t_ms = 0;
  EventKind kind = EventKind::kSchedule;
  uint64_t vm_id = 0;
  int server = -1;
  int pool = -1;
  int slice = -1;
  int cores = 0;
  int memory_gb = 0;
  int local_gb = 0;
  int pool_gb = 0;
  int ready_before = -1;
  double touched_gb = 0;
  double slowdown = 0;
  bool moved = false;
  bool insensitive = false;
  std::string reason = {};
};

class EventLog {
 public:
  void Record(Event e) { events_.push_back(std::move(e)); }
  const std::vector<Event>& events() const { return events_; }
  size_t size() const { return events_.size(); }

  void WriteJsonl(std::ostream& out) const;
  /// Throws IoError.
  void WriteJsonl(const std::string& path) const;

 private:
  std::vector<Event> events_;
};

}  // namespace poolsim::control
