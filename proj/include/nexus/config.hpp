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

#ifndef NEXUS_CONFIG_HPP_
#define NEXUS_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "nexus/agents.hpp"

namespace nexus {

// Line-oriented "key = value" configuration:
//   # comment
//   name = "quoted string"        (\" \\ \n \t escapes)
//   count = 42
//   rate = 0.25
//   flag = true
//   files = ["a.json", "b.json"]
// Keys are dotted identifiers ([A-Za-z0-9_.]). Unquoted trailing comments
// are allowed. Errors carry "<origin>:<line>".
class Config {
 public:
  static Config parse_text(const std::string& text, const std::string& origin);
  static Config parse_file(const std::string& path);

  bool has(const std::string& key) const;
  const std::string& origin() const { return origin_; }
  std::vector<std::string> keys() const;  // file order

  // Typed getters; the one-argument forms throw ConfigError when the key is
  // missing, the two-argument forms return the fallback. All throw
  // ConfigError on a type mismatch. get_double accepts integer values.
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_string_list(const std::string& key) const;
  std::vector<std::string> get_string_list(
      const std::string& key, const std::vector<std::string>& fallback) const;

 private:
  struct Value {
    enum class Kind { kString, kInt, kFloat, kBool, kList };
    Kind kind = Kind::kString;
    std::string text;
    std::int64_t integer = 0;
    double real = 0.0;
    bool boolean = false;
    std::vector<std::string> list;
    int line = 0;
  };
  const Value& require(const std::string& key, Value::Kind kind,
                       const char* kind_name) const;
  const Value* find(const std::string& key, Value::Kind kind,
                    const char* kind_name) const;

  std::map<std::string, Value> values_;
  std::vector<std::string> order_;
  std::string origin_;
};

// A fully loaded run description: the problem text, backend choices, and
// every knob, with file contents inlined so a journal's copy is enough to
// reproduce the run.
struct Manifest {
  std::string path;  // where it was loaded from ("" when reconstructed)
  std::string problem_file;
  std::string problem_text;
  std::string llm_backend = "replay";      // replay | wire
  std::string llm_endpoint;
  std::string checker_backend = "toy";     // toy | command
  std::string checker_command;
  std::string prover_backend = "sim";      // sim | wire
  std::string prover_endpoint;
  std::vector<std::string> prover_script_paths;
  std::vector<std::string> prover_script_texts;
  std::vector<std::string> rater_script_paths;
  std::vector<std::string> rater_script_texts;
  std::string output_dir = "out";
  RunConfig run;
};

// Reads a manifest file; relative paths resolve against the manifest's
// directory; referenced files (problem, scripts, template overrides) are
// read eagerly. Throws ConfigError / IoError.
Manifest load_manifest(const std::string& path);

// Lossless round-trip through JSON, used for the journal's run_meta event.
nlohmann::ordered_json manifest_json(const Manifest& manifest);
Manifest manifest_from_json(const nlohmann::json& root);

// Instantiates the backends the manifest names. Replay scripts cycle over
// workers (worker i gets script i mod N) with an independent cursor each.
BackendSet make_backends(const Manifest& manifest);

// Built-in prompt templates (also shipped under assets/prompts/).
const std::string& default_sketcher_template();
const std::string& default_basic_template();
const std::string& default_rater_template();

}  // namespace nexus

#endif  // NEXUS_CONFIG_HPP_
