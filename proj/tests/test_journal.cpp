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

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <thread>
#include <vector>

#include "doctest.h"
#include "nexus/error.hpp"

namespace nexus {
namespace {

namespace fs = std::filesystem;

fs::path temp_file(const char* stem) {
  static int counter = 0;
  return fs::temp_directory_path() /
         (std::string(stem) + std::to_string(++counter) + "-" +
          std::to_string(::getpid()) + ".jsonl");
}

TEST_CASE("in-memory journal assigns consecutive sequence numbers") {
  Journal journal;
  CHECK(journal.append("alpha", {{"x", 1}}) == 0);
  CHECK(journal.append("beta", {{"y", "z"}}) == 1);
  const std::vector<Journal::Event> events = journal.events();
  REQUIRE(events.size() == 2);
  CHECK(events[0].kind == "alpha");
  CHECK(events[0].data.at("x") == 1);
  CHECK(events[1].seq == 1);
}

TEST_CASE("file journal round-trips through read_file") {
  const fs::path path = temp_file("journal-roundtrip-");
  {
    Journal journal(path);
    journal.append("insert", {{"id", 1}, {"note", "first"}});
    journal.append("solve", {{"worker", 3}});
  }
  const std::vector<Journal::Event> events = Journal::read_file(path);
  REQUIRE(events.size() == 2);
  CHECK(events[0].kind == "insert");
  CHECK(events[0].seq == 0);
  CHECK(events[0].wall_time > 0.0);
  CHECK(events[1].kind == "solve");
  CHECK(events[1].data.at("worker") == 3);
  fs::remove(path);
}

TEST_CASE("read_file rejects missing, headerless, and damaged files") {
  try {
    Journal::read_file(fs::temp_directory_path() / "does-not-exist.jsonl");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIoError);
  }

  const fs::path bad_header = temp_file("journal-badheader-");
  std::ofstream(bad_header) << "{\"schema\":\"something-else\"}\n";
  try {
    Journal::read_file(bad_header);
    FAIL("expected JournalParse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kJournalParse);
  }
  fs::remove(bad_header);

  const fs::path damaged = temp_file("journal-damaged-");
  std::ofstream(damaged) << "{\"schema\":\"nexus-journal/1\"}\n"
                         << "{\"seq\":0,\"t\":1.0,\"kind\":\"a\",\"data\":{}}\n"
                         << "not json at all\n";
  try {
    Journal::read_file(damaged);
    FAIL("expected JournalParse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kJournalParse);
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
  fs::remove(damaged);
}

TEST_CASE("semantic lines ignore wall time and run_meta") {
  Journal first;
  first.append("run_meta", {{"output_dir", "/tmp/a"}});
  first.append("turn", {{"worker", 0}, {"text", "hello"}});
  first.append("solve", {{"record", 2}});

  Journal second;
  second.append("run_meta", {{"output_dir", "/somewhere/else"}});
  second.append("turn", {{"worker", 0}, {"text", "hello"}});
  second.append("solve", {{"record", 2}});

  const auto lines_a = Journal::semantic_lines(first.events());
  const auto lines_b = Journal::semantic_lines(second.events());
  CHECK(lines_a == lines_b);
  REQUIRE(lines_a.size() == 2);  // run_meta dropped
  CHECK(lines_a[0].find("\"t\"") == std::string::npos);

  Journal third;
  third.append("turn", {{"worker", 1}, {"text", "hello"}});
  CHECK(Journal::semantic_lines(third.events())[0] != lines_a[0]);
}

TEST_CASE("concurrent appends keep sequence numbers unique and dense") {
  Journal journal;
  constexpr int kThreads = 8;
  constexpr int kPerThread = 200;
  std::vector<std::thread> threads;
  threads.reserve(kThreads);
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&journal, t] {
      for (int i = 0; i < kPerThread; ++i) {
        journal.append("tick", {{"thread", t}, {"i", i}});
      }
    });
  }
  for (std::thread& t : threads) t.join();

  const std::vector<Journal::Event> events = journal.events();
  REQUIRE(events.size() == kThreads * kPerThread);
  std::set<std::uint64_t> seqs;
  for (const Journal::Event& event : events) seqs.insert(event.seq);
  CHECK(seqs.size() == events.size());
  CHECK(*seqs.begin() == 0);
  CHECK(*seqs.rbegin() == events.size() - 1);
}

}  // namespace
}  // namespace nexus
