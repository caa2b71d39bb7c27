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

#ifndef NEXUS_EXTERNAL_HPP_
#define NEXUS_EXTERNAL_HPP_

#include <string>

#include "nexus/backends.hpp"

namespace nexus {

// Minimal http URL splitter ("http://host:port/path"). Throws ConfigError
// on anything else (only plain http is supported in-process).
struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string path = "/";
};
ParsedUrl parse_url(const std::string& url);

// Language backend over HTTP. Sends
//   {"messages": [{"role": ..., "text": ...}], "max_turn_tokens": N}
// and expects a scripted-response-shaped JSON reply ({"text", "tool_calls",
// "usage"}). A bearer token is attached when the named environment
// variable is set. Connection/status failures throw TransportError;
// malformed reply bodies throw BackendFailure.
class WireLlm : public Llm {
 public:
  explicit WireLlm(const std::string& endpoint,
                   const std::string& token_env = "NEXUS_LLM_TOKEN");
  GenerationResponse generate(const GenerationRequest& request) override;

 private:
  ParsedUrl url_;
  std::string token_;
};

// Focused prover over HTTP. Sends
//   {"goal": ..., "simulations": N, "timeout_ms": N, "seed": N}
// and expects {"verdict": "proved"|"disproved"|"failed", "script": ...,
// "feedback": ...}.
class WireProver : public Prover {
 public:
  explicit WireProver(const std::string& endpoint,
                      const std::string& token_env = "NEXUS_PROVER_TOKEN");
  ProverOutcome focused_prove(const std::string& goal_text,
                              const ProverBudget& budget,
                              std::uint64_t seed) override;

 private:
  ParsedUrl url_;
  std::string token_;
};

// Checker that shells out: the command template's "{file}" is replaced by
// the path of a temp file holding the sketch text, the command runs under
// the shell, and its stdout is parsed line by line:
//   OK                      acknowledges a clean check
//   ERROR <line>:<col> <message>
//   GOAL <id> <goal text>
// Unrecognized lines are ignored. A command that cannot be executed, or
// that produces no protocol line at all, throws CheckerUnavailable.
class CommandChecker : public Checker {
 public:
  explicit CommandChecker(const std::string& command_template);
  Diagnostics check(const std::string& sketch_text) override;

 private:
  std::string command_template_;
};

}  // namespace nexus

#endif  // NEXUS_EXTERNAL_HPP_
