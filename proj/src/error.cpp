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

#include "nexus/error.hpp"

namespace nexus {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnbalancedMarkers: return "UnbalancedMarkers";
    case ErrorCode::kNestedMarkers: return "NestedMarkers";
    case ErrorCode::kSearchNotFound: return "SearchNotFound";
    case ErrorCode::kAmbiguousSearch: return "AmbiguousSearch";
    case ErrorCode::kFrozenRegionTouched: return "FrozenRegionTouched";
    case ErrorCode::kValueEditBreaksLine: return "ValueEditBreaksLine";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kMissingParent: return "MissingParent";
    case ErrorCode::kUnknownPlayer: return "UnknownPlayer";
    case ErrorCode::kUnknownRecord: return "UnknownRecord";
    case ErrorCode::kConflictingOutcome: return "ConflictingOutcome";
    case ErrorCode::kEmptyMatchLog: return "EmptyMatchLog";
    case ErrorCode::kUnknownIdInMatch: return "UnknownIdInMatch";
    case ErrorCode::kNonPositiveStrength: return "NonPositiveStrength";
    case ErrorCode::kPopulationTooSmall: return "PopulationTooSmall";
    case ErrorCode::kNoRatedSketch: return "NoRatedSketch";
    case ErrorCode::kMissingTemplateVariable: return "MissingTemplateVariable";
    case ErrorCode::kInvalidRequest: return "InvalidRequest";
    case ErrorCode::kScriptExhausted: return "ScriptExhausted";
    case ErrorCode::kTransportError: return "TransportError";
    case ErrorCode::kCheckerUnavailable: return "CheckerUnavailable";
    case ErrorCode::kBackendFailure: return "BackendFailure";
    case ErrorCode::kGoalSorryMismatch: return "GoalSorryMismatch";
    case ErrorCode::kIndivisibleChunking: return "IndivisibleChunking";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kJournalParse: return "JournalParse";
    case ErrorCode::kNotReplayable: return "NotReplayable";
  }
  return "UnknownError";
}

}  // namespace nexus
