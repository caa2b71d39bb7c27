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

#include "nexus/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "nexus/error.hpp"
#include "nexus/external.hpp"
#include "nexus/replay.hpp"
#include "nexus/toy.hpp"

namespace nexus {

namespace {

namespace fs = std::filesystem;

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& message) {
  throw Error(ErrorCode::kConfigError,
              origin + ":" + std::to_string(line) + ": " + message);
}

bool is_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' ||
         c == '.';
}

std::string trim_view(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a])) != 0) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])) != 0) --b;
  return std::string(s.substr(a, b - a));
}

// Parses a quoted string starting at text[pos] == '"'; advances pos past
// the closing quote.
std::string parse_quoted(const std::string& origin, int line,
                         const std::string& text, std::size_t& pos) {
  std::string out;
  ++pos;  // opening quote
  while (pos < text.size()) {
    const char c = text[pos];
    if (c == '"') {
      ++pos;
      return out;
    }
    if (c == '\\') {
      ++pos;
      if (pos >= text.size()) break;
      switch (text[pos]) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default:
          fail(origin, line,
               std::string("unknown escape '\\") + text[pos] + "'");
      }
      ++pos;
      continue;
    }
    out += c;
    ++pos;
  }
  fail(origin, line, "unterminated string");
}

void expect_tail_empty(const std::string& origin, int line,
                       const std::string& text, std::size_t pos) {
  while (pos < text.size()) {
    const char c = text[pos];
    if (c == '#') return;  // trailing comment
    if (std::isspace(static_cast<unsigned char>(c)) == 0) {
      fail(origin, line, "unexpected trailing text '" + text.substr(pos) + "'");
    }
    ++pos;
  }
}

std::string read_file_or_throw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

std::vector<std::string> json_string_list(const nlohmann::json& value) {
  std::vector<std::string> out;
  for (const auto& item : value) out.push_back(item.get<std::string>());
  return out;
}

}  // namespace

Config Config::parse_text(const std::string& text, const std::string& origin) {
  Config config;
  config.origin_ = origin;
  std::istringstream lines(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(lines, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string stripped = trim_view(raw);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = raw.find('=');
    if (eq == std::string::npos) {
      fail(origin, line_no, "expected 'key = value'");
    }
    const std::string key = trim_view(std::string_view(raw).substr(0, eq));
    if (key.empty() ||
        !std::all_of(key.begin(), key.end(), is_key_char)) {
      fail(origin, line_no, "bad key '" + key + "'");
    }
    if (config.values_.count(key) != 0) {
      fail(origin, line_no, "duplicate key '" + key + "'");
    }
    std::string rest = raw.substr(eq + 1);
    std::size_t pos = 0;
    while (pos < rest.size() &&
           std::isspace(static_cast<unsigned char>(rest[pos])) != 0) {
      ++pos;
    }
    if (pos >= rest.size() || rest[pos] == '#') {
      fail(origin, line_no, "key '" + key + "' has no value");
    }

    Value value;
    value.line = line_no;
    if (rest[pos] == '"') {
      value.kind = Value::Kind::kString;
      value.text = parse_quoted(origin, line_no, rest, pos);
      expect_tail_empty(origin, line_no, rest, pos);
    } else if (rest[pos] == '[') {
      value.kind = Value::Kind::kList;
      ++pos;
      bool closed = false;
      while (pos < rest.size()) {
        while (pos < rest.size() &&
               (std::isspace(static_cast<unsigned char>(rest[pos])) != 0 ||
                rest[pos] == ',')) {
          ++pos;
        }
        if (pos < rest.size() && rest[pos] == ']') {
          ++pos;
          closed = true;
          break;
        }
        if (pos >= rest.size() || rest[pos] != '"') {
          fail(origin, line_no, "lists hold quoted strings");
        }
        value.list.push_back(parse_quoted(origin, line_no, rest, pos));
      }
      if (!closed) fail(origin, line_no, "unterminated list");
      expect_tail_empty(origin, line_no, rest, pos);
    } else {
      // bare token: bool, int, or float; strip a trailing comment first
      std::string token = rest.substr(pos);
      if (const std::size_t hash = token.find('#');
          hash != std::string::npos) {
        token = token.substr(0, hash);
      }
      token = trim_view(token);
      if (token == "true" || token == "false") {
        value.kind = Value::Kind::kBool;
        value.boolean = token == "true";
      } else {
        const char* begin = token.data();
        const char* end = begin + token.size();
        std::int64_t integer = 0;
        const auto int_result = std::from_chars(begin, end, integer);
        if (int_result.ec == std::errc{} && int_result.ptr == end) {
          value.kind = Value::Kind::kInt;
          value.integer = integer;
        } else {
          try {
            std::size_t consumed = 0;
            const double real = std::stod(token, &consumed);
            if (consumed != token.size()) throw std::invalid_argument(token);
            value.kind = Value::Kind::kFloat;
            value.real = real;
          } catch (const std::exception&) {
            fail(origin, line_no,
                 "cannot parse value '" + token + "' (strings need quotes)");
          }
        }
      }
    }
    config.order_.push_back(key);
    config.values_.emplace(key, std::move(value));
  }
  return config;
}

Config Config::parse_file(const std::string& path) {
  return parse_text(read_file_or_throw(path), path);
}

bool Config::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::vector<std::string> Config::keys() const { return order_; }

const Config::Value* Config::find(const std::string& key, Value::Kind kind,
                                  const char* kind_name) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  const Value& value = it->second;
  if (value.kind != kind &&
      !(kind == Value::Kind::kFloat && value.kind == Value::Kind::kInt)) {
    throw Error(ErrorCode::kConfigError,
                origin_ + ":" + std::to_string(value.line) + ": key '" + key +
                    "' is not a " + kind_name);
  }
  return &value;
}

const Config::Value& Config::require(const std::string& key, Value::Kind kind,
                                     const char* kind_name) const {
  const Value* value = find(key, kind, kind_name);
  if (value == nullptr) {
    throw Error(ErrorCode::kConfigError,
                origin_ + ": missing key '" + key + "'");
  }
  return *value;
}

std::string Config::get_string(const std::string& key) const {
  return require(key, Value::Kind::kString, "string").text;
}
std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  const Value* v = find(key, Value::Kind::kString, "string");
  return v == nullptr ? fallback : v->text;
}
std::int64_t Config::get_int(const std::string& key) const {
  return require(key, Value::Kind::kInt, "integer").integer;
}
std::int64_t Config::get_int(const std::string& key,
                             std::int64_t fallback) const {
  const Value* v = find(key, Value::Kind::kInt, "integer");
  return v == nullptr ? fallback : v->integer;
}
double Config::get_double(const std::string& key) const {
  const Value& v = require(key, Value::Kind::kFloat, "number");
  return v.kind == Value::Kind::kInt ? static_cast<double>(v.integer) : v.real;
}
double Config::get_double(const std::string& key, double fallback) const {
  const Value* v = find(key, Value::Kind::kFloat, "number");
  if (v == nullptr) return fallback;
  return v->kind == Value::Kind::kInt ? static_cast<double>(v->integer)
                                      : v->real;
}
bool Config::get_bool(const std::string& key) const {
  return require(key, Value::Kind::kBool, "boolean").boolean;
}
bool Config::get_bool(const std::string& key, bool fallback) const {
  const Value* v = find(key, Value::Kind::kBool, "boolean");
  return v == nullptr ? fallback : v->boolean;
}
std::vector<std::string> Config::get_string_list(const std::string& key) const {
  return require(key, Value::Kind::kList, "list").list;
}
std::vector<std::string> Config::get_string_list(
    const std::string& key, const std::vector<std::string>& fallback) const {
  const Value* v = find(key, Value::Kind::kList, "list");
  return v == nullptr ? fallback : v->list;
}

const std::string& default_sketcher_template() {
  static const std::string kTemplate =
      "You are evolving a proof sketch. Only text inside EVOLVE blocks may\n"
      "change; everything else is frozen. Use the search_replace tool to\n"
      "edit, focused_prove to consult the background prover on a single\n"
      "goal, and end_episode (with a short lesson) when done or stuck.\n"
      "\n"
      "Current sketch:\n"
      "```\n"
      "{code}\n"
      "```\n"
      "\n"
      "Plan notes: {plan}\n"
      "\n"
      "{inspirations}\n"
      "\n"
      "Directive: {directive}\n";
  return kTemplate;
}

const std::string& default_basic_template() {
  static const std::string kTemplate =
      "You are completing a proof sketch. Only text inside EVOLVE blocks\n"
      "may change; everything else is frozen. Use the search_replace tool\n"
      "to edit, focused_prove to consult the background prover when it is\n"
      "available, and end_episode (with a short lesson) when done or stuck.\n"
      "\n"
      "Current sketch:\n"
      "```\n"
      "{code}\n"
      "```\n";
  return kTemplate;
}

const std::string& default_rater_template() {
  static const std::string kTemplate =
      "Rank the following proof sketches from most to least promising.\n"
      "Reply with one line of the form \"RANKING: 2 > 1 = 3\" over the\n"
      "sketch numbers, where '=' joins sketches you cannot tell apart.\n"
      "\n"
      "{sketches}";
  return kTemplate;
}

Manifest load_manifest(const std::string& path) {
  const Config config = Config::parse_file(path);
  const std::string base_dir = fs::path(path).parent_path().string();

  Manifest m;
  m.path = fs::absolute(path).lexically_normal().string();
  m.problem_file = resolve_path(base_dir, config.get_string("problem_file"));
  m.problem_text = read_file_or_throw(m.problem_file);

  m.run.agent_kind = agent_kind_from_name(config.get_string("agent_kind"));
  m.llm_backend = config.get_string("llm_backend", "replay");
  m.llm_endpoint = config.get_string("llm_endpoint", "");
  m.checker_backend = config.get_string("checker_backend", "toy");
  m.checker_command = config.get_string("checker_command", "");
  m.prover_backend = config.get_string("prover_backend", "sim");
  m.prover_endpoint = config.get_string("prover_endpoint", "");
  m.output_dir = config.get_string("output_dir", "out");

  for (const std::string& script :
       config.get_string_list("prover_scripts", {})) {
    m.prover_script_paths.push_back(resolve_path(base_dir, script));
    m.prover_script_texts.push_back(
        read_file_or_throw(m.prover_script_paths.back()));
  }
  for (const std::string& script :
       config.get_string_list("rater_scripts", {})) {
    m.rater_script_paths.push_back(resolve_path(base_dir, script));
    m.rater_script_texts.push_back(
        read_file_or_throw(m.rater_script_paths.back()));
  }

  m.run.n_subagents = static_cast<int>(config.get_int("n_subagents", 1));
  m.run.n_raters = static_cast<int>(config.get_int("n_raters", 1));
  m.run.episode_budget =
      static_cast<std::uint64_t>(config.get_int("episode_budget", 3000));
  m.run.limits.max_prover_queries =
      static_cast<int>(config.get_int("max_prover_queries", 5));
  m.run.limits.max_edits = static_cast<int>(config.get_int("max_edits", 90));
  m.run.limits.max_turns = static_cast<int>(config.get_int("max_turns", 40));
  m.run.seed = static_cast<std::uint64_t>(config.get_int("seed", 0));
  m.run.deterministic = config.get_bool("deterministic", false);
  m.run.prover_budget.simulations =
      static_cast<int>(config.get_int("prover_simulations", 400));
  m.run.prover_budget.timeout_ms =
      static_cast<int>(config.get_int("prover_timeout_ms", 0));
  m.run.placeholder = config.get_string("placeholder", m.run.placeholder);
  m.run.disallowed_tokens =
      config.get_string_list("disallowed_tokens", m.run.disallowed_tokens);
  m.run.pucb.exploration_c =
      config.get_double("exploration_c", m.run.pucb.exploration_c);
  m.run.pucb.elite_size = static_cast<std::size_t>(
      config.get_int("elite_size",
                     static_cast<std::int64_t>(m.run.pucb.elite_size)));
  m.run.pucb.n_inspirations = static_cast<int>(
      config.get_int("n_inspirations", m.run.pucb.n_inspirations));
  m.run.gibbs.n_samples =
      static_cast<int>(config.get_int("gibbs_samples", m.run.gibbs.n_samples));
  m.run.gibbs.burn_in =
      static_cast<int>(config.get_int("gibbs_burn_in", m.run.gibbs.burn_in));
  m.run.gibbs.thinning =
      static_cast<int>(config.get_int("gibbs_thinning", m.run.gibbs.thinning));
  m.run.match_size =
      static_cast<int>(config.get_int("match_size", m.run.match_size));

  m.run.sketcher_template =
      config.has("sketcher_template_file")
          ? read_file_or_throw(resolve_path(
                base_dir, config.get_string("sketcher_template_file")))
          : default_sketcher_template();
  m.run.basic_template =
      config.has("basic_template_file")
          ? read_file_or_throw(resolve_path(
                base_dir, config.get_string("basic_template_file")))
          : default_basic_template();
  m.run.rater_template =
      config.has("rater_template_file")
          ? read_file_or_throw(resolve_path(
                base_dir, config.get_string("rater_template_file")))
          : default_rater_template();

  // Static validation, so failures surface before any backend runs.
  if (m.llm_backend == "replay") {
    if (m.prover_script_texts.empty()) {
      throw Error(ErrorCode::kConfigError,
                  config.origin() +
                      ": llm_backend = \"replay\" needs prover_scripts");
    }
    if (agent_is_evolutionary(m.run.agent_kind) && m.run.n_raters > 0 &&
        m.rater_script_texts.empty()) {
      throw Error(ErrorCode::kConfigError,
                  config.origin() + ": replay runs with raters need "
                                    "rater_scripts");
    }
  } else if (m.llm_backend == "wire") {
    if (m.llm_endpoint.empty()) {
      throw Error(ErrorCode::kConfigError,
                  config.origin() +
                      ": llm_backend = \"wire\" needs llm_endpoint");
    }
  } else {
    throw Error(ErrorCode::kConfigError,
                config.origin() + ": unknown llm_backend '" + m.llm_backend +
                    "' (expected replay or wire)");
  }
  if (m.checker_backend == "command") {
    if (m.checker_command.empty()) {
      throw Error(ErrorCode::kConfigError,
                  config.origin() + ": checker_backend = \"command\" needs "
                                    "checker_command");
    }
  } else if (m.checker_backend != "toy") {
    throw Error(ErrorCode::kConfigError,
                config.origin() + ": unknown checker_backend '" +
                    m.checker_backend + "' (expected toy or command)");
  }
  if (agent_has_prover(m.run.agent_kind)) {
    if (m.prover_backend == "wire") {
      if (m.prover_endpoint.empty()) {
        throw Error(ErrorCode::kConfigError,
                    config.origin() + ": prover_backend = \"wire\" needs "
                                      "prover_endpoint");
      }
    } else if (m.prover_backend != "sim") {
      throw Error(ErrorCode::kConfigError,
                  config.origin() + ": unknown prover_backend '" +
                      m.prover_backend + "' (expected sim or wire)");
    }
  }
  return m;
}

nlohmann::ordered_json manifest_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["manifest_path"] = m.path;
  j["problem_file"] = m.problem_file;
  j["problem_text"] = m.problem_text;
  j["agent_kind"] = agent_kind_name(m.run.agent_kind);
  j["llm_backend"] = m.llm_backend;
  j["llm_endpoint"] = m.llm_endpoint;
  j["checker_backend"] = m.checker_backend;
  j["checker_command"] = m.checker_command;
  j["prover_backend"] = m.prover_backend;
  j["prover_endpoint"] = m.prover_endpoint;
  j["prover_script_paths"] = m.prover_script_paths;
  j["prover_script_texts"] = m.prover_script_texts;
  j["rater_script_paths"] = m.rater_script_paths;
  j["rater_script_texts"] = m.rater_script_texts;
  j["output_dir"] = m.output_dir;
  j["n_subagents"] = m.run.n_subagents;
  j["n_raters"] = m.run.n_raters;
  j["episode_budget"] = m.run.episode_budget;
  j["max_prover_queries"] = m.run.limits.max_prover_queries;
  j["max_edits"] = m.run.limits.max_edits;
  j["max_turns"] = m.run.limits.max_turns;
  j["seed"] = m.run.seed;
  j["deterministic"] = m.run.deterministic;
  j["prover_simulations"] = m.run.prover_budget.simulations;
  j["prover_timeout_ms"] = m.run.prover_budget.timeout_ms;
  j["placeholder"] = m.run.placeholder;
  j["disallowed_tokens"] = m.run.disallowed_tokens;
  j["exploration_c"] = m.run.pucb.exploration_c;
  j["elite_size"] = m.run.pucb.elite_size;
  j["n_inspirations"] = m.run.pucb.n_inspirations;
  j["gibbs_samples"] = m.run.gibbs.n_samples;
  j["gibbs_burn_in"] = m.run.gibbs.burn_in;
  j["gibbs_thinning"] = m.run.gibbs.thinning;
  j["match_size"] = m.run.match_size;
  j["sketcher_template"] = m.run.sketcher_template;
  j["basic_template"] = m.run.basic_template;
  j["rater_template"] = m.run.rater_template;
  return j;
}

Manifest manifest_from_json(const nlohmann::json& j) {
  try {
    Manifest m;
    m.path = j.value("manifest_path", std::string{});
    m.problem_file = j.value("problem_file", std::string{});
    m.problem_text = j.at("problem_text").get<std::string>();
    m.run.agent_kind =
        agent_kind_from_name(j.at("agent_kind").get<std::string>());
    m.llm_backend = j.value("llm_backend", std::string{"replay"});
    m.llm_endpoint = j.value("llm_endpoint", std::string{});
    m.checker_backend = j.value("checker_backend", std::string{"toy"});
    m.checker_command = j.value("checker_command", std::string{});
    m.prover_backend = j.value("prover_backend", std::string{"sim"});
    m.prover_endpoint = j.value("prover_endpoint", std::string{});
    if (j.contains("prover_script_paths")) {
      m.prover_script_paths = json_string_list(j.at("prover_script_paths"));
    }
    if (j.contains("prover_script_texts")) {
      m.prover_script_texts = json_string_list(j.at("prover_script_texts"));
    }
    if (j.contains("rater_script_paths")) {
      m.rater_script_paths = json_string_list(j.at("rater_script_paths"));
    }
    if (j.contains("rater_script_texts")) {
      m.rater_script_texts = json_string_list(j.at("rater_script_texts"));
    }
    m.output_dir = j.value("output_dir", std::string{"out"});
    m.run.n_subagents = j.value("n_subagents", 1);
    m.run.n_raters = j.value("n_raters", 1);
    m.run.episode_budget = j.value("episode_budget", std::uint64_t{3000});
    m.run.limits.max_prover_queries = j.value("max_prover_queries", 5);
    m.run.limits.max_edits = j.value("max_edits", 90);
    m.run.limits.max_turns = j.value("max_turns", 40);
    m.run.seed = j.value("seed", std::uint64_t{0});
    m.run.deterministic = j.value("deterministic", false);
    m.run.prover_budget.simulations = j.value("prover_simulations", 400);
    m.run.prover_budget.timeout_ms = j.value("prover_timeout_ms", 0);
    m.run.placeholder = j.value("placeholder", m.run.placeholder);
    if (j.contains("disallowed_tokens")) {
      m.run.disallowed_tokens = json_string_list(j.at("disallowed_tokens"));
    }
    m.run.pucb.exploration_c =
        j.value("exploration_c", m.run.pucb.exploration_c);
    m.run.pucb.elite_size = j.value("elite_size", m.run.pucb.elite_size);
    m.run.pucb.n_inspirations =
        j.value("n_inspirations", m.run.pucb.n_inspirations);
    m.run.gibbs.n_samples = j.value("gibbs_samples", m.run.gibbs.n_samples);
    m.run.gibbs.burn_in = j.value("gibbs_burn_in", m.run.gibbs.burn_in);
    m.run.gibbs.thinning = j.value("gibbs_thinning", m.run.gibbs.thinning);
    m.run.match_size = j.value("match_size", m.run.match_size);
    m.run.sketcher_template =
        j.value("sketcher_template", default_sketcher_template());
    m.run.basic_template = j.value("basic_template", default_basic_template());
    m.run.rater_template = j.value("rater_template", default_rater_template());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError,
                std::string("bad run_meta manifest: ") + e.what());
  }
}

BackendSet make_backends(const Manifest& m) {
  BackendSet backends;
  if (m.llm_backend == "replay") {
    const auto prover_texts =
        std::make_shared<std::vector<std::string>>(m.prover_script_texts);
    const auto prover_paths =
        std::make_shared<std::vector<std::string>>(m.prover_script_paths);
    backends.make_prover_llm = [prover_texts, prover_paths](int worker) {
      const std::size_t i =
          static_cast<std::size_t>(worker) % prover_texts->size();
      const std::string origin = i < prover_paths->size()
                                     ? (*prover_paths)[i]
                                     : "<prover script " + std::to_string(i) +
                                           ">";
      return std::make_unique<ReplayLlm>((*prover_texts)[i], origin);
    };
    if (!m.rater_script_texts.empty()) {
      const auto rater_texts =
          std::make_shared<std::vector<std::string>>(m.rater_script_texts);
      const auto rater_paths =
          std::make_shared<std::vector<std::string>>(m.rater_script_paths);
      backends.make_rater_llm = [rater_texts, rater_paths](int rater) {
        const std::size_t i =
            static_cast<std::size_t>(rater) % rater_texts->size();
        const std::string origin = i < rater_paths->size()
                                       ? (*rater_paths)[i]
                                       : "<rater script " + std::to_string(i) +
                                             ">";
        return std::make_unique<ReplayLlm>((*rater_texts)[i], origin);
      };
    }
  } else {
    const std::string endpoint = m.llm_endpoint;
    backends.make_prover_llm = [endpoint](int) {
      return std::make_unique<WireLlm>(endpoint);
    };
    backends.make_rater_llm = [endpoint](int) {
      return std::make_unique<WireLlm>(endpoint);
    };
  }
  if (m.checker_backend == "command") {
    backends.checker = std::make_shared<CommandChecker>(m.checker_command);
  } else {
    backends.checker = std::make_shared<toy::ToyChecker>();
  }
  if (agent_has_prover(m.run.agent_kind)) {
    if (m.prover_backend == "wire") {
      backends.prover = std::make_shared<WireProver>(m.prover_endpoint);
    } else {
      backends.prover = std::make_shared<toy::SimProver>();
    }
  }
  return backends;
}

}  // namespace nexus
