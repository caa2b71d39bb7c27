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

#include "nexus/replay.hpp"

#include <fstream>
#include <sstream>

#include "nexus/error.hpp"

namespace nexus {

namespace {

using nlohmann::json;

std::string type_name(const json& value) { return value.type_name(); }

}  // namespace

TokenUsage usage_from_json(const json& value) {
  TokenUsage usage;
  if (value.is_null()) return usage;
  if (!value.is_object()) {
    throw Error(ErrorCode::kConfigError,
                "usage must be an object, got " + type_name(value));
  }
  usage.input_tokens = value.value("input_tokens", std::int64_t{0});
  usage.cache_read_tokens = value.value("cache_read_tokens", std::int64_t{0});
  usage.output_tokens = value.value("output_tokens", std::int64_t{0});
  return usage;
}

GenerationResponse response_from_json(const json& entry) {
  if (!entry.is_object()) {
    throw Error(ErrorCode::kConfigError,
                "response entry must be an object, got " + type_name(entry));
  }
  GenerationResponse response;
  response.text = entry.value("text", std::string{});
  response.usage = usage_from_json(entry.value("usage", json{}));
  const json calls = entry.value("tool_calls", json::array());
  if (!calls.is_array()) {
    throw Error(ErrorCode::kConfigError, "tool_calls must be an array");
  }
  for (const json& call : calls) {
    if (!call.is_object() || !call.contains("tool")) {
      throw Error(ErrorCode::kConfigError,
                  "each tool call needs a \"tool\" field");
    }
    const std::string tool = call.at("tool").get<std::string>();
    ToolCall parsed;
    if (tool == "search_replace") {
      parsed.kind = ToolCall::Kind::kSearchReplace;
      parsed.search = call.value("search", std::string{});
      parsed.replace = call.value("replace", std::string{});
    } else if (tool == "focused_prove") {
      parsed.kind = ToolCall::Kind::kFocusedProve;
      parsed.goal = call.value("goal", std::string{});
    } else if (tool == "end_episode") {
      parsed.kind = ToolCall::Kind::kEndEpisode;
      parsed.lesson = call.value("lesson", std::string{});
    } else {
      throw Error(ErrorCode::kConfigError, "unknown tool '" + tool + "'");
    }
    response.tool_calls.push_back(std::move(parsed));
  }
  return response;
}

ReplayLlm::ReplayLlm(const std::string& json_text, const std::string& origin) {
  json script;
  try {
    script = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError,
                origin + ": script is not valid JSON: " + e.what());
  }
  if (!script.is_object() || !script.contains("responses") ||
      !script.at("responses").is_array()) {
    throw Error(ErrorCode::kConfigError,
                origin + ": script must be {\"responses\": [...]}");
  }
  loop_ = script.value("loop", false);
  try {
    for (const json& entry : script.at("responses")) {
      responses_.push_back(response_from_json(entry));
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, origin + ": " + e.what());
  }
}

std::unique_ptr<ReplayLlm> ReplayLlm::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open replay script " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::make_unique<ReplayLlm>(buffer.str(), path);
}

GenerationResponse ReplayLlm::generate(const GenerationRequest& request) {
  validate_request(request);
  const std::lock_guard<std::mutex> lock(mutex_);
  if (cursor_ >= responses_.size()) {
    if (loop_ && !responses_.empty()) {
      cursor_ = 0;
    } else {
      throw Error(ErrorCode::kScriptExhausted,
                  "replay script exhausted after " +
                      std::to_string(responses_.size()) + " responses");
    }
  }
  return responses_[cursor_++];
}

}  // namespace nexus
