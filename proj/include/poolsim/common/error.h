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

#include <stdexcept>
#include <string>
#include <string_view>

namespace poolsim {

/// Error categories. The CLI maps each category to its own exit code.
enum class ErrorKind {
  kConfig,
  kParse,
  kValidation,
  kCapacity,
  kOwnership,
  kArgument,
  kState,
  kCalibration,
  kIo,
};

std::string_view ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Thin subclasses so call sites can catch one category without inspecting
// kind().
#define POOLSIM_DEFINE_ERROR(Name, Kind)                 \
  class Name : public Error {                           \
   public:                                              \
    explicit Name(const std::string& message)           \
        : Error(ErrorKind::Kind, message) {}            \
  };

POOLSIM_DEFINE_ERROR(ConfigError, kConfig)
POOLSIM_DEFINE_ERROR(ParseError, kParse)
POOLSIM_DEFINE_ERROR(ValidationError, kValidation)
POOLSIM_DEFINE_ERROR(CapacityError, kCapacity)
POOLSIM_DEFINE_ERROR(OwnershipError, kOwnership)
POOLSIM_DEFINE_ERROR(ArgumentError, kArgument)
POOLSIM_DEFINE_ERROR(StateError, kState)
POOLSIM_DEFINE_ERROR(CalibrationError, kCalibration)
POOLSIM_DEFINE_ERROR(IoError, kIo)

#undef POOLSIM_DEFINE_ERROR

}  // namespace poolsim
