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

#include "nexus/backends.hpp"

#include "nexus/error.hpp"

namespace nexus {

const char* tool_call_name(ToolCall::Kind kind) {
  switch (kind) {
    case ToolCall::Kind::kSearchReplace:
      return "search_replace";
    case ToolCall::Kind::kFocusedProve:
      return "focused_prove";
    case ToolCall::Kind::kEndEpisode:
      return "end_episode";
  }
  return "unknown";
}

const char* verdict_name(Verdict verdict) {
  switch (verdict) {
    case Verdict::kProved:
      return "proved";
    case Verdict::kDisproved:
      return "disproved";
    case Verdict::kFailed:
      return "failed";
  }
  return "unknown";
}

Verdict verdict_from_name(const std::string& name) {
  if (name == "proved") return Verdict::kProved;
  if (name == "disproved") return Verdict::kDisproved;
  if (name == "failed") return Verdict::kFailed;
  throw Error(ErrorCode::kInvalidRequest, "unknown verdict name: " + name);
}

void validate_request(const GenerationRequest& request) {
  if (request.messages.empty()) {
    throw Error(ErrorCode::kInvalidRequest, "generation request has no messages");
  }
  const std::string& first = request.messages.front().role;
  if (first != "system" && first != "user") {
    throw Error(ErrorCode::kInvalidRequest,
                "conversation must open with a system or user message, got '" +
                    first + "'");
  }
}

}  // namespace nexus
