// Copyright 2026 The circleflow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
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

namespace circleflow {

enum class ErrorCode {
  InvalidInput,
  NonManifold,
  InconsistentOrientation,
  Disconnected,
  EmptySubset,
  NonPositiveRadius,
  NumericalDegeneracy,
  C1Violation,
  DomainViolation,
  EnumerationTooLarge,
  InsufficientHistory,
  NotDiskType,
  NonflatInterior,
  ParseError,
  ValidationError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NonManifold: return "NonManifold";
    case ErrorCode::InconsistentOrientation: return "InconsistentOrientation";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::NonPositiveRadius: return "NonPositiveRadius";
    case ErrorCode::NumericalDegeneracy: return "NumericalDegeneracy";
    case ErrorCode::C1Violation: return "C1Violation";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::NotDiskType: return "NotDiskType";
    case ErrorCode::NonflatInterior: return "NonflatInterior";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace circleflow
