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

#include "poolsim/common/error.h"

namespace poolsim {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return "config_error";
    case ErrorKind::kParse:
      return "parse_error";
    case ErrorKind::kValidation:
      return "validation_error";
    case ErrorKind::kCapacity:
      return "capacity_error";
    case ErrorKind::kOwnership:
      return "ownership_error";
    case ErrorKind::kArgument:
      return "argument_error";
    case ErrorKind::kState:
      return "state_error";
    case ErrorKind::kCalibration:
      return "calibration_error";
    case ErrorKind::kIo:
      return "io_error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

}  // namespace poolsim
