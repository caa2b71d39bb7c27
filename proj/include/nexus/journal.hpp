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

#ifndef NEXUS_JOURNAL_HPP_
#define NEXUS_JOURNAL_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace nexus {

// Append-only JSONL run log. The first line is a schema header; every other
// line is one event: {"seq": n, "t": <wall seconds>, "kind": "...",
// "data": {...}}. Payloads carry logical timestamps only, so two runs of
// the same deterministic schedule differ purely in the "t" field — which is
// exactly what semantic_lines strips for comparisons.
class Journal {
 public:
  struct Event {
    std::uint64_t seq = 0;
    double wall_time = 0.0;
    std::string kind;
    nlohmann::ordered_json data;
  };

  static constexpr std::string_view kSchema = "nexus-journal/1";

  // In-memory journal (tests, dry runs).
  Journal() = default;

  // File-backed journal; writes the schema header immediately.
  // Throws IoError if the file cannot be opened.
  explicit Journal(const std::filesystem::path& path);

  // Thread-safe append. Returns the event's sequence number.
  std::uint64_t append(std::string_view kind, nlohmann::ordered_json data);

  // Snapshot of all events appended so far.
  std::vector<Event> events() const;

  // Parses a journal file (header checked). Throws JournalParse with the
  // offending line number on malformed input.
  static std::vector<Event> read_file(const std::filesystem::path& path);

  // Canonical one-line renderings for determinism comparisons: wall time is
  // stripped and environment-describing "run_meta" events are dropped.
  static std::vector<std::string> semantic_lines(
      const std::vector<Event>& events);

 private:
  mutable std::mutex mutex_;
  std::ofstream file_;
  bool to_file_ = false;
  std::uint64_t next_seq_ = 0;
  std::vector<Event> events_;
};

}  // namespace nexus

#endif  // NEXUS_JOURNAL_HPP_
