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
#include <span>
#include <set>
#include <vector>

namespace poolsim::hw {

using HostId = int;
inline constexpr HostId kUnassigned = -1;
inline constexpr int kMaxHosts = 64;

enum class Access { kAllowed, kFatal };

/// Bits needed to name one of `n_hosts` owners: ceil(log2(n_hosts)), and at
/// least 1 so a single-host table still has a representable entry.
int BitsPerEntry(int n_hosts);

/// Packed permission-table size in bytes. Throws ArgumentError when n_hosts
/// is outside [1, 64].
uint64_t StateBytes(uint64_t n_slices, int n_hosts);

/// Ownership table of one external memory controller: each 1 GB slice is
/// owned by at most one host. Single writer; const methods are safe to call
/// concurrently.
class SliceTable {
 public:
  static constexpr size_t kSnapshotHeaderBytes = 16;

  SliceTable(int n_slices, int n_hosts);

  int n_slices() const { return static_cast<int>(owner_.size()); }
  int n_hosts() const { return n_hosts_; }
  int free_count() const { return static_cast<int>(free_.size()); }
  HostId owner(int slice) const;

  /// Gives `k` unassigned slices to `host`, lowest index first. Throws
  /// CapacityError (table unchanged) when fewer than k are free.
  std::vector<int> Assign(HostId host, int k);

  /// All-or-nothing: throws OwnershipError and changes nothing if any slice
  /// is not owned by `host` (or is listed twice).
  void Release(HostId host, std::span<const int> slices);

  /// Pure. Throws ArgumentError for an out-of-range slice or host.
  Access CheckAccess(HostId requestor, int slice) const;

  /// 16-byte header ("EMCS", u32 n_slices, u16 n_hosts, u8 bits, u8 version,
  /// 4 reserved bytes) followed by StateBytes() of packed entries, least
  /// significant bit first. An unassigned slice is stored as the all-ones
  /// code, which aliases the last host when n_hosts is a power of two.
  std::vector<uint8_t> ExportSnapshot() const;
  static SliceTable ImportSnapshot(std::span<const uint8_t> bytes);

  bool operator==(const SliceTable& other) const { return n_hosts_ == other.n_hosts_ && owner_ == other.owner_; }

 private:
  void CheckHost(HostId host) const;
  void CheckSlice(int slice) const;

  int n_hosts_;
  std::vector<HostId> owner_;
  std::set<int> free_;
};

}  // namespace poolsim::hw
