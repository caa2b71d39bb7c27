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

#include "nexus/journal.hpp"

#include <chrono>

#include "nexus/error.hpp"

namespace nexus {
namespace {

double wall_seconds() {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  return std::chrono::duration<double>(now).count();
}

}  // namespace

Journal::Journal(const std::filesystem::path& path) : to_file_(true) {
  file_.open(path, std::ios::out | std::ios::trunc);
  if (!file_) {
    throw Error(ErrorCode::kIoError,
                "cannot open journal file: " + path.string());
  }
  nlohmann::ordered_json header;
  header["schema"] = kSchema;
  file_ << header.dump() << '\n';
  file_.flush();
}

std::uint64_t Journal::append(std::string_view kind,
                              nlohmann::ordered_json data) {
  std::lock_guard<std::mutex> lock(mutex_);
  Event event;
  event.seq = next_seq_++;
  event.wall_time = wall_seconds();
  event.kind = std::string(kind);
  event.data = std::move(data);
  if (to_file_) {
    nlohmann::ordered_json line;
    line["seq"] = event.seq;
    line["t"] = event.wall_time;
    line["kind"] = event.kind;
    line["data"] = event.data;
    file_ << line.dump() << '\n';
    file_.flush();
  }
  events_.push_back(event);
  return event.seq;
}

std::vector<Journal::Event> Journal::events() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return events_;
}

std::vector<Journal::Event> Journal::read_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError,
                "cannot read journal file: " + path.string());
  }
  std::vector<Event> events;
  std::string line;
  std::size_t line_number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    nlohmann::ordered_json parsed;
    try {
      parsed = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kJournalParse,
                  path.string() + ":" + std::to_string(line_number) + ": " +
                      e.what());
    }
    if (!header_seen) {
      if (!parsed.contains("schema") || parsed["schema"] != kSchema) {
        throw Error(ErrorCode::kJournalParse,
                    path.string() + ":1: missing or unsupported schema header");
      }
      header_seen = true;
      continue;
    }
    if (!parsed.contains("seq") || !parsed.contains("kind") ||
        !parsed.contains("data")) {
      throw Error(ErrorCode::kJournalParse,
                  path.string() + ":" + std::to_string(line_number) +
                      ": event line missing seq/kind/data");
    }
    Event event;
    event.seq = parsed["seq"].get<std::uint64_t>();
    event.wall_time = parsed.value("t", 0.0);
    event.kind = parsed["kind"].get<std::string>();
    event.data = parsed["data"];
    events.push_back(std::move(event));
  }
  if (!header_seen) {
    throw Error(ErrorCode::kJournalParse,
                path.string() + ": empty journal (no schema header)");
  }
  return events;
}

std::vector<std::string> Journal::semantic_lines(
    const std::vector<Event>& events) {
  std::vector<std::string> lines;
  lines.reserve(events.size());
  for (const Event& event : events) {
    if (event.kind == "run_meta") continue;
    nlohmann::ordered_json line;
    line["seq"] = event.seq;
    line["kind"] = event.kind;
    line["data"] = event.data;
    lines.push_back(line.dump());
  }
  return lines;
}

}  // namespace nexus
