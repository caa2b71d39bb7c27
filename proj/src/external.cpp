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

#include "nexus/external.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

#include "nexus/error.hpp"
#include "nexus/replay.hpp"

namespace nexus {

namespace {

using nlohmann::json;

std::string env_or_empty(const std::string& name) {
  const char* value = std::getenv(name.c_str());
  return value == nullptr ? std::string{} : std::string(value);
}

json post_json(const ParsedUrl& url, const std::string& token,
               const json& body) {
  httplib::Client client(url.host, url.port);
  client.set_connection_timeout(10);
  client.set_read_timeout(120);
  httplib::Headers headers;
  if (!token.empty()) {
    headers.emplace("Authorization", "Bearer " + token);
  }
  const httplib::Result result =
      client.Post(url.path, headers, body.dump(), "application/json");
  if (!result) {
    throw Error(ErrorCode::kTransportError,
                "POST " + url.host + ":" + std::to_string(url.port) +
                    url.path + " failed: " + httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw Error(ErrorCode::kTransportError,
                "POST " + url.path + " returned status " +
                    std::to_string(result->status));
  }
  try {
    return json::parse(result->body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBackendFailure,
                std::string("backend reply is not valid JSON: ") + e.what());
  }
}

}  // namespace

ParsedUrl parse_url(const std::string& url) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind(kScheme, 0) != 0) {
    throw Error(ErrorCode::kConfigError,
                "endpoint must start with http:// : " + url);
  }
  ParsedUrl parsed;
  const std::string rest = url.substr(kScheme.size());
  const std::size_t slash = rest.find('/');
  std::string authority =
      slash == std::string::npos ? rest : rest.substr(0, slash);
  parsed.path = slash == std::string::npos ? "/" : rest.substr(slash);
  const std::size_t colon = authority.find(':');
  if (colon != std::string::npos) {
    const std::string port_text = authority.substr(colon + 1);
    try {
      parsed.port = std::stoi(port_text);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfigError,
                  "bad port '" + port_text + "' in endpoint " + url);
    }
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) {
    throw Error(ErrorCode::kConfigError, "endpoint has no host: " + url);
  }
  parsed.host = authority;
  return parsed;
}

WireLlm::WireLlm(const std::string& endpoint, const std::string& token_env)
    : url_(parse_url(endpoint)), token_(env_or_empty(token_env)) {}

GenerationResponse WireLlm::generate(const GenerationRequest& request) {
  validate_request(request);
  json messages = json::array();
  for (const Message& m : request.messages) {
    messages.push_back(json{{"role", m.role}, {"text", m.text}});
  }
  const json reply = post_json(
      url_, token_,
      json{{"messages", messages},
           {"max_turn_tokens", request.max_turn_tokens}});
  try {
    return response_from_json(reply);
  } catch (const Error& e) {
    throw Error(ErrorCode::kBackendFailure,
                std::string("bad generation reply: ") + e.what());
  }
}

WireProver::WireProver(const std::string& endpoint,
                       const std::string& token_env)
    : url_(parse_url(endpoint)), token_(env_or_empty(token_env)) {}

ProverOutcome WireProver::focused_prove(const std::string& goal_text,
                                        const ProverBudget& budget,
                                        std::uint64_t seed) {
  const json reply = post_json(url_, token_,
                               json{{"goal", goal_text},
                                    {"simulations", budget.simulations},
                                    {"timeout_ms", budget.timeout_ms},
                                    {"seed", seed}});
  if (!reply.is_object() || !reply.contains("verdict")) {
    throw Error(ErrorCode::kBackendFailure,
                "prover reply must be an object with a \"verdict\"");
  }
  ProverOutcome outcome;
  try {
    outcome.verdict = verdict_from_name(reply.at("verdict").get<std::string>());
  } catch (const Error& e) {
    throw Error(ErrorCode::kBackendFailure,
                std::string("bad prover verdict: ") + e.what());
  }
  outcome.script = reply.value("script", std::string{});
  outcome.feedback = reply.value("feedback", std::string{});
  return outcome;
}

CommandChecker::CommandChecker(const std::string& command_template)
    : command_template_(command_template) {
  if (command_template_.find("{file}") == std::string::npos) {
    throw Error(ErrorCode::kConfigError,
                "checker command must contain {file}: " + command_template_);
  }
}

Diagnostics CommandChecker::check(const std::string& sketch_text) {
  namespace fs = std::filesystem;
  static std::atomic<std::uint64_t> counter{0};
  const fs::path temp =
      fs::temp_directory_path() /
      ("nexus-check-" + std::to_string(static_cast<long>(::getpid())) + "-" +
       std::to_string(counter.fetch_add(1)) + ".txt");
  {
    std::ofstream out(temp, std::ios::binary);
    if (!out) {
      throw Error(ErrorCode::kIoError,
                  "cannot write temp file " + temp.string());
    }
    out << sketch_text;
  }
  std::string command = command_template_;
  const std::string placeholder = "{file}";
  for (std::size_t pos = command.find(placeholder); pos != std::string::npos;
       pos = command.find(placeholder, pos)) {
    command.replace(pos, placeholder.size(), temp.string());
    pos += temp.string().size();
  }

  FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) {
    std::error_code ec;
    fs::remove(temp, ec);
    throw Error(ErrorCode::kCheckerUnavailable,
                "cannot run checker command: " + command);
  }
  std::string output;
  char buffer[4096];
  std::size_t n = 0;
  while ((n = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) {
    output.append(buffer, n);
  }
  const int status = ::pclose(pipe);
  {
    std::error_code ec;
    fs::remove(temp, ec);
  }
  const int exit_code =
      WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (exit_code == 127) {
    throw Error(ErrorCode::kCheckerUnavailable,
                "checker command not found: " + command);
  }

  Diagnostics diag;
  bool saw_protocol_line = false;
  std::istringstream lines(output);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "OK") {
      saw_protocol_line = true;
    } else if (line.rfind("ERROR ", 0) == 0) {
      saw_protocol_line = true;
      const std::string body = line.substr(6);
      const std::size_t space = body.find(' ');
      CheckIssue issue;
      issue.location = space == std::string::npos ? body : body.substr(0, space);
      issue.message =
          space == std::string::npos ? std::string{} : body.substr(space + 1);
      diag.errors.push_back(std::move(issue));
    } else if (line.rfind("GOAL ", 0) == 0) {
      saw_protocol_line = true;
      const std::string body = line.substr(5);
      const std::size_t space = body.find(' ');
      diag.open_goals.push_back(
          space == std::string::npos ? std::string{} : body.substr(space + 1));
    }
    // anything else is checker noise and is ignored
  }
  if (!saw_protocol_line) {
    throw Error(ErrorCode::kCheckerUnavailable,
                "checker produced no protocol output (exit " +
                    std::to_string(exit_code) + "): " + command);
  }
  diag.compiles = diag.errors.empty();
  return diag;
}

}  // namespace nexus
