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

#ifndef NEXUS_BACKENDS_HPP_
#define NEXUS_BACKENDS_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace nexus {

// ---------------------------------------------------------------------------
// Language-model generation
// ---------------------------------------------------------------------------

struct Message {
  std::string role;  // "system", "user", or "assistant"
  std::string text;
};

struct ToolCall {
  enum class Kind { kSearchReplace, kFocusedProve, kEndEpisode };
  Kind kind = Kind::kEndEpisode;
  // kSearchReplace
  std::string search;
  std::string replace;
  // kFocusedProve
  std::string goal;
  // kEndEpisode
  std::string lesson;
};

const char* tool_call_name(ToolCall::Kind kind);

struct TokenUsage {
  std::int64_t input_tokens = 0;
  std::int64_t cache_read_tokens = 0;
  std::int64_t output_tokens = 0;

  TokenUsage& operator+=(const TokenUsage& other) {
    input_tokens += other.input_tokens;
    cache_read_tokens += other.cache_read_tokens;
    output_tokens += other.output_tokens;
    return *this;
  }
  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

struct GenerationRequest {
  std::vector<Message> messages;
  int max_turn_tokens = 0;  // 0 = backend default
};

struct GenerationResponse {
  std::string text;
  std::vector<ToolCall> tool_calls;
  TokenUsage usage;
};

class Llm {
 public:
  virtual ~Llm() = default;
  // Implementations may assume the request passed validate_request.
  virtual GenerationResponse generate(const GenerationRequest& request) = 0;
};

// Throws InvalidRequest unless messages are non-empty and the conversation
// opens with a system or user message.
void validate_request(const GenerationRequest& request);

// ---------------------------------------------------------------------------
// Sketch checking
// ---------------------------------------------------------------------------

struct CheckIssue {
  std::string location;  // "line:col", best effort
  std::string message;
};

struct Diagnostics {
  bool compiles = false;
  std::vector<CheckIssue> errors;
  // Each entry is a self-contained goal rendering, e.g. "⊢ 1+1 = 2".
  std::vector<std::string> open_goals;
};

class Checker {
 public:
  virtual ~Checker() = default;
  virtual Diagnostics check(const std::string& sketch_text) = 0;
};

// ---------------------------------------------------------------------------
// Focused proving
// ---------------------------------------------------------------------------

struct ProverBudget {
  int simulations = 400;
  int timeout_ms = 0;  // 0 = no explicit timeout
};

enum class Verdict { kProved, kDisproved, kFailed };

const char* verdict_name(Verdict verdict);
Verdict verdict_from_name(const std::string& name);

struct ProverOutcome {
  Verdict verdict = Verdict::kFailed;
  std::string script;    // proof text when proved/disproved
  std::string feedback;  // failure summary when failed (informational else)
};

class Prover {
 public:
  virtual ~Prover() = default;
  virtual ProverOutcome focused_prove(const std::string& goal_text,
                                      const ProverBudget& budget,
                                      std::uint64_t seed) = 0;
};

}  // namespace nexus

#endif  // NEXUS_BACKENDS_HPP_
