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

#ifndef NEXUS_REPLAY_HPP_
#define NEXUS_REPLAY_HPP_

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "nexus/backends.hpp"

namespace nexus {

// Deserializes one scripted response entry:
//   {"text": "...", "usage": {"input_tokens": 1, ...},
//    "tool_calls": [{"tool": "search_replace", "search": "...",
//                    "replace": "..."},
//                   {"tool": "focused_prove", "goal": "..."},
//                   {"tool": "end_episode", "lesson": "..."}]}
// Missing fields default to empty/zero. Throws ConfigError on shape errors.
GenerationResponse response_from_json(const nlohmann::json& entry);

TokenUsage usage_from_json(const nlohmann::json& value);

// Scripted language backend: returns canned responses in order, ignoring
// the request content. The script is a JSON object
//   {"loop": false, "responses": [ <entry>, ... ]}
// Requests past the end throw ScriptExhausted unless "loop" is true, in
// which case the cursor wraps around.
class ReplayLlm : public Llm {
 public:
  // Parses a script from JSON text. `origin` names the source in errors.
  explicit ReplayLlm(const std::string& json_text,
                     const std::string& origin = "<script>");

  static std::unique_ptr<ReplayLlm> from_file(const std::string& path);

  GenerationResponse generate(const GenerationRequest& request) override;

  std::size_t size() const { return responses_.size(); }

 private:
  std::vector<GenerationResponse> responses_;
  bool loop_ = false;
  std::size_t cursor_ = 0;
  std::mutex mutex_;
};

}  // namespace nexus

#endif  // NEXUS_REPLAY_HPP_
