// Copyright 2026 The Nexus Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NEXUS_ERROR_HPP_
#define NEXUS_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace nexus {

enum class ErrorCode {
  // sketch
  kUnbalancedMarkers,
  kNestedMarkers,
  kSearchNotFound,
  kAmbiguousSearch,
  kFrozenRegionTouched,
  kValueEditBreaksLine,
  // population
  kDuplicateId,
  kMissingParent,
  kUnknownPlayer,
  kUnknownRecord,
  kConflictingOutcome,
  // rating
  kEmptyMatchLog,
  kUnknownIdInMatch,
  kNonPositiveStrength,
  kPopulationTooSmall,
  // selection
  kNoRatedSketch,
  kMissingTemplateVariable,
  // backends
  kInvalidRequest,
  kScriptExhausted,
  kTransportError,
  kCheckerUnavailable,
  // agents / validate
  kBackendFailure,
  kGoalSorryMismatch,
  // evalkit
  kIndivisibleChunking,
  // cli / io
  kConfigError,
  kIoError,
  kJournalParse,
  kNotReplayable,
};

const char* error_code_name(ErrorCode code);

// Exception carrying a stable error code next to the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nexus

#endif  // NEXUS_ERROR_HPP_
