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

#include "poolsim/predict/calibration.h"

namespace poolsim::predict {

inline constexpr int kSnapshotFormatVersion = 1;

/// Pretty-printed JSON with a "format"/"version" header. Non-finite
/// thresholds are written as the strings "inf" and "-inf".
void WriteModelSnapshot(const ModelSnapshot& snapshot, std::ostream& out);
void WriteModelSnapshot(const ModelSnapshot& snapshot, const std::filesystem::path& path);

/// Throws ParseError for malformed or mismatched documents, IoError for
/// unreadable files.
ModelSnapshot ReadModelSnapshot(std::istream& in);
ModelSnapshot ReadModelSnapshot(const std::filesystem::path& path);

}  // namespace poolsim::predict
