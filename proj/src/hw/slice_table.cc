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

#include "poolsim/hw/slice_table.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <unordered_set>

#include <fmt/format.h>

#include "poolsim/common/error.h"

namespace poolsim::hw {
namespace {

constexpr uint8_t kMagic[4] = {'E', 'M', 'C', 'S'};
constexpr uint8_t kSnapshotVersion = 1;

void PutLe(std::vector<uint8_t>& out, size_t offset, uint64_t value, int bytes) {
  for (int i = 0; i < bytes; ++i) out[offset + i] = static_cast<uint8_t>(value >> (8 * i));
}

uint64_t GetLe(std::span<const uint8_t> in, size_t offset, int bytes) {
  uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<uint64_t>(in[offset + i]) << (8 * i);
  return v;
}

}  // namespace

int BitsPerEntry(int n_hosts) {
  if (n_hosts < 1 || n_hosts > kMaxHosts) {
    throw ArgumentError(fmt::format("n_hosts {} outside [1, {}]", n_hosts, kMaxHosts));
  }
  return std::max(1, static_cast<int>(std::bit_width(static_cast<unsigned>(n_hosts - 1))));
}

uint64_t StateBytes(uint64_t n_slices, int n_hosts) {
  return (n_slices * BitsPerEntry(n_hosts) + 7) / 8;
}

SliceTable::SliceTable(int n_slices, int n_hosts) : n_hosts_(n_hosts) {
  BitsPerEntry(n_hosts);  // validates
  if (n_slices < 1) throw ArgumentError(fmt::format("n_slices {} must be >= 1", n_slices));
  owner_.assign(n_slices, kUnassigned);
  for (int i = 0; i < n_slices; ++i) free_.insert(free_.end(), i);
}

void SliceTable::CheckHost(HostId host) const {
  if (host < 0 || host >= n_hosts_) {
    throw ArgumentError(fmt::format("host {} outside [0, {})", host, n_hosts_));
  }
}

void SliceTable::CheckSlice(int slice) const {
  if (slice < 0 || slice >= n_slices()) {
    throw ArgumentError(fmt::format("slice {} outside [0, {})", slice, n_slices()));
  }
}

HostId SliceTable::owner(int slice) const {
  CheckSlice(slice);
  return owner_[slice];
}

std::vector<int> SliceTable::Assign(HostId host, int k) {
  CheckHost(host);
  if (k < 0) throw ArgumentError(fmt::format("cannot assign {} slices", k));
  if (k > free_count()) {
    throw CapacityError(
        fmt::format("host {} requested {} slices, {} free", host, k, free_count()));
  }
  std::vector<int> out;
  out.reserve(k);
  auto it = free_.begin();
  for (int i = 0; i < k; ++i) {
    owner_[*it] = host;
    out.push_back(*it);
    it = free_.erase(it);
  }
  return out;
}

void SliceTable::Release(HostId host, std::span<const int> slices) {
  CheckHost(host);
  std::unordered_set<int> seen;
  for (int s : slices) {
    CheckSlice(s);
    if (owner_[s] != host) {
      throw OwnershipError(fmt::format("host {} released slice {} owned by {}", host, s,
                                       owner_[s] == kUnassigned ? std::string("nobody")
                                                                : std::to_string(owner_[s])));
    }
    if (!seen.insert(s).second) {
      throw OwnershipError(fmt::format("slice {} released twice", s));
    }
  }
  for (int s : slices) {
    owner_[s] = kUnassigned;
    free_.insert(s);
  }
}

Access SliceTable::CheckAccess(HostId requestor, int slice) const {
  CheckHost(requestor);
  CheckSlice(slice);
  return owner_[slice] == requestor ? Access::kAllowed : Access::kFatal;
}

std::vector<uint8_t> SliceTable::ExportSnapshot() const {
  const int bits = BitsPerEntry(n_hosts_);
  const uint64_t unassigned_code = (uint64_t{1} << bits) - 1;
  std::vector<uint8_t> out(kSnapshotHeaderBytes + StateBytes(owner_.size(), n_hosts_), 0);
  std::memcpy(out.data(), kMagic, 4);
  PutLe(out, 4, owner_.size(), 4);
  PutLe(out, 8, n_hosts_, 2);
  out[10] = static_cast<uint8_t>(bits);
  out[11] = kSnapshotVersion;
  size_t bit = 0;
  for (HostId h : owner_) {
    uint64_t code = h == kUnassigned ? unassigned_code : static_cast<uint64_t>(h);
    for (int b = 0; b < bits; ++b, ++bit) {
      if (code >> b & 1) out[kSnapshotHeaderBytes + bit / 8] |= static_cast<uint8_t>(1u << (bit % 8));
    }
  }
  return out;
}

SliceTable SliceTable::ImportSnapshot(std::span<const uint8_t> bytes) {
  if (bytes.size() < kSnapshotHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError("slice table snapshot: bad header");
  }
  if (bytes[11] != kSnapshotVersion) {
    throw ParseError(fmt::format("slice table snapshot: unsupported version {}", bytes[11]));
  }
  const int n_slices = static_cast<int>(GetLe(bytes, 4, 4));
  const int n_hosts = static_cast<int>(GetLe(bytes, 8, 2));
  SliceTable table(n_slices, n_hosts);
  const int bits = BitsPerEntry(n_hosts);
  if (bytes[10] != bits || bytes.size() != kSnapshotHeaderBytes + StateBytes(n_slices, n_hosts)) {
    throw ParseError("slice table snapshot: size does not match header");
  }
  const uint64_t unassigned_code = (uint64_t{1} << bits) - 1;
  size_t bit = 0;
  for (int s = 0; s < n_slices; ++s) {
    uint64_t code = 0;
    for (int b = 0; b < bits; ++b, ++bit) {
      code |= static_cast<uint64_t>(bytes[kSnapshotHeaderBytes + bit / 8] >> (bit % 8) & 1) << b;
    }
    if (code == unassigned_code) continue;
    if (code >= static_cast<uint64_t>(n_hosts)) {
      throw ParseError(fmt::format("slice table snapshot: slice {} has owner code {}", s, code));
    }
    table.owner_[s] = static_cast<HostId>(code);
    table.free_.erase(s);
  }
  return table;
}

}  // namespace poolsim::hw
