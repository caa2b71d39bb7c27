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

#include "nexus/agents.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <mutex>
#include <set>
#include <thread>
#include <utility>

#include "nexus/digest.hpp"
#include "nexus/error.hpp"
#include "nexus/rng.hpp"
#include "nexus/validate.hpp"

namespace nexus {
namespace {

using nlohmann::ordered_json;

// Seed-derivation salt namespaces: the high byte picks the purpose, the low
// bits carry the per-use counter, so no two uses of the run seed collide.
constexpr std::uint64_t kSaltEpisode = 0x01ull << 56;
constexpr std::uint64_t kSaltPrompt = 0x02ull << 56;
constexpr std::uint64_t kSaltProverGoal = 0x03ull << 56;
constexpr std::uint64_t kSaltThompson = 0x04ull << 56;
constexpr std::uint64_t kSaltTieBreak = 0x05ull << 56;
constexpr std::uint64_t kSaltGibbs = 0x06ull << 56;

ordered_json usage_json(const TokenUsage& usage) {
  return ordered_json{{"input_tokens", usage.input_tokens},
                      {"cache_read_tokens", usage.cache_read_tokens},
                      {"output_tokens", usage.output_tokens}};
}

// First 16 hex digits of a goal key as an integer, for seed derivation.
std::uint64_t key_bits(const std::string& goal_key_hex) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < 16 && i < goal_key_hex.size(); ++i) {
    const char c = goal_key_hex[i];
    bits <<= 4;
    if (c >= '0' && c <= '9') bits |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f')
      bits |= static_cast<std::uint64_t>(c - 'a' + 10);
  }
  return bits;
}

bool is_ident(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' ||
         c == '\'';
}

std::string replace_all(std::string text, std::string_view what,
                        std::string_view with) {
  if (what.empty()) return text;
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = text.find(what, pos);
    if (hit == std::string::npos) {
      out.append(text, pos, std::string::npos);
      return out;
    }
    out.append(text, pos, hit - pos);
    out.append(with);
    pos = hit + what.size();
  }
}

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a])) != 0) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])) != 0) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = s.find(sep, pos);
    if (hit == std::string_view::npos) {
      parts.emplace_back(s.substr(pos));
      return parts;
    }
    parts.emplace_back(s.substr(pos, hit - pos));
    pos = hit + 1;
  }
}

std::string describe_outcome(const ProverOutcome& outcome) {
  std::string s = verdict_name(outcome.verdict);
  if (outcome.verdict == Verdict::kProved && !outcome.script.empty()) {
    s += " (script: " + outcome.script + ")";
  } else if (!outcome.feedback.empty()) {
    s += " (" + outcome.feedback + ")";
  }
  return s;
}

// Shared mutable state for one run.
struct RunState {
  std::atomic<bool> stop{false};
  std::atomic<std::uint64_t> next_ticket{0};
  std::atomic<std::uint64_t> episodes_done{0};
  std::uint64_t budget = 0;
  std::mutex result_mutex;
  RunResult result;
};

class Worker {
 public:
  enum class Step { kDone, kWorked, kIdle };
  virtual ~Worker() = default;
  virtual Step step() = 0;
  virtual TokenUsage usage() const = 0;
  virtual bool is_rater() const { return false; }
};

// Runs workers to completion. Deterministic mode is a single-thread
// round-robin (one step per live worker per round) so journals are
// reproducible; threaded mode gives each worker its own thread. In both,
// the stop flag is raised once every non-rater worker has finished, which
// releases raters that would otherwise idle forever.
void drive_workers(const std::vector<std::unique_ptr<Worker>>& workers,
                   std::size_t n_provers, RunState& state, bool deterministic) {
  if (deterministic) {
    std::vector<bool> done(workers.size(), false);
    while (true) {
      bool any_alive = false;
      for (std::size_t i = 0; i < workers.size(); ++i) {
        if (done[i]) continue;
        if (workers[i]->step() == Worker::Step::kDone) {
          done[i] = true;
        } else {
          any_alive = true;
        }
      }
      bool provers_done = true;
      for (std::size_t i = 0; i < n_provers; ++i) {
        if (!done[i]) {
          provers_done = false;
          break;
        }
      }
      if (provers_done) state.stop.store(true);
      if (!any_alive) break;
    }
    return;
  }
  std::atomic<std::size_t> provers_left{n_provers};
  std::vector<std::thread> threads;
  threads.reserve(workers.size());
  for (std::size_t i = 0; i < workers.size(); ++i) {
    const bool is_prover = i < n_provers;
    Worker* worker = workers[i].get();
    threads.emplace_back([worker, is_prover, &state, &provers_left] {
      while (true) {
        const Worker::Step s = worker->step();
        if (s == Worker::Step::kDone) break;
        if (s == Worker::Step::kIdle) {
          std::this_thread::sleep_for(std::chrono::milliseconds(1));
        }
      }
      if (is_prover && provers_left.fetch_sub(1) == 1) {
        state.stop.store(true);
      }
    });
  }
  for (std::thread& t : threads) t.join();
}

}  // namespace

const char* agent_kind_name(AgentKind kind) {
  switch (kind) {
    case AgentKind::kA: return "A";
    case AgentKind::kB: return "B";
    case AgentKind::kC: return "C";
    case AgentKind::kD: return "D";
  }
  return "?";
}

AgentKind agent_kind_from_name(const std::string& name) {
  if (name == "A" || name == "a") return AgentKind::kA;
  if (name == "B" || name == "b") return AgentKind::kB;
  if (name == "C" || name == "c") return AgentKind::kC;
  if (name == "D" || name == "d") return AgentKind::kD;
  throw Error(ErrorCode::kConfigError,
              "unknown agent kind '" + name + "' (expected A, B, C, or D)");
}

bool agent_has_prover(AgentKind kind) {
  return kind == AgentKind::kB || kind == AgentKind::kD;
}

bool agent_is_evolutionary(AgentKind kind) {
  return kind == AgentKind::kC || kind == AgentKind::kD;
}

ProofSketch prepend_lesson(const ProofSketch& sketch, const std::string& lesson,
                           std::string_view placeholder) {
  std::string text = lesson;
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  // Mask standalone placeholder tokens so the lesson comment never reads as
  // an open hole to the token scan.
  if (!placeholder.empty()) {
    std::string masked;
    std::size_t pos = 0;
    while (pos < text.size()) {
      const std::size_t hit = text.find(placeholder, pos);
      if (hit == std::string::npos) {
        masked.append(text, pos, std::string::npos);
        break;
      }
      const bool left_ok = hit == 0 || !is_ident(text[hit - 1]);
      const std::size_t end = hit + placeholder.size();
      const bool right_ok = end >= text.size() || !is_ident(text[end]);
      masked.append(text, pos, hit - pos);
      if (left_ok && right_ok) {
        masked.append("(hole)");
      } else {
        masked.append(placeholder);
      }
      pos = end;
    }
    text = std::move(masked);
  }
  for (std::size_t i = 0; i < sketch.regions.size(); ++i) {
    if (sketch.regions[i].kind != RegionKind::kEvolveBlock) continue;
    ProofSketch out = sketch;
    out.regions[i].text = "-- lesson: " + text + "\n" + out.regions[i].text;
    out.source_digest = sha256_hex(render(out));
    return out;
  }
  return sketch;  // no editable block to write into
}

TiedRanking parse_ranking(const std::string& text,
                          const std::vector<std::uint64_t>& presented) {
  const std::size_t anchor = text.rfind("RANKING:");
  if (anchor == std::string::npos) {
    throw Error(ErrorCode::kInvalidRequest, "rater reply has no RANKING line");
  }
  std::string line = text.substr(anchor + 8);
  if (const std::size_t nl = line.find('\n'); nl != std::string::npos) {
    line = line.substr(0, nl);
  }
  TiedRanking ranking;
  std::vector<bool> seen(presented.size(), false);
  for (const std::string& group_text : split(line, '>')) {
    std::vector<std::uint64_t> group;
    for (const std::string& token_text : split(group_text, '=')) {
      const std::string token = trim(token_text);
      if (token.empty() ||
          !std::all_of(token.begin(), token.end(), [](char c) {
            return std::isdigit(static_cast<unsigned char>(c)) != 0;
          })) {
        throw Error(ErrorCode::kInvalidRequest,
                    "RANKING entry '" + token + "' is not a position number");
      }
      const unsigned long index = std::stoul(token);
      if (index < 1 || index > presented.size()) {
        throw Error(ErrorCode::kInvalidRequest,
                    "RANKING position " + token + " is out of range 1.." +
                        std::to_string(presented.size()));
      }
      if (seen[index - 1]) {
        throw Error(ErrorCode::kInvalidRequest,
                    "RANKING repeats position " + token);
      }
      seen[index - 1] = true;
      group.push_back(presented[index - 1]);
    }
    if (group.empty()) {
      throw Error(ErrorCode::kInvalidRequest, "RANKING has an empty group");
    }
    ranking.push_back(std::move(group));
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    throw Error(ErrorCode::kInvalidRequest,
                "RANKING line must rank every presented sketch exactly once");
  }
  return ranking;
}

EpisodeOutcome run_episode(const ProofSketch& start,
                           std::vector<Message> messages,
                           const EpisodeEnv& env, const EpisodeLimits& limits,
                           std::uint64_t episode_index) {
  if (env.llm == nullptr || env.checker == nullptr) {
    throw Error(ErrorCode::kConfigError,
                "episode needs an llm and a checker backend");
  }
  EpisodeOutcome out;
  out.final_sketch = start;

  auto log = [&](std::string_view kind, const ordered_json& fields) {
    if (env.journal == nullptr) return;
    ordered_json data;
    data["worker"] = env.worker;
    data["episode"] = episode_index;
    for (const auto& [k, v] : fields.items()) data[k] = v;
    env.journal->append(kind, data);
  };

  log("episode_start", ordered_json::object());
  bool ended = false;
  bool stopped = false;
  for (int turn = 0; turn < limits.max_turns && !ended; ++turn) {
    if (env.stop != nullptr && env.stop->load()) {
      stopped = true;
      break;
    }
    GenerationRequest request{messages, 0};
    validate_request(request);
    const GenerationResponse response = env.llm->generate(request);
    out.usage += response.usage;
    out.turns = turn + 1;
    log("turn", {{"turn", turn},
                 {"component", "prover"},
                 {"text", response.text},
                 {"usage", usage_json(response.usage)}});
    messages.push_back(Message{"assistant", response.text});

    std::string feedback;
    auto add_feedback = [&feedback](const std::string& s) {
      if (!feedback.empty()) feedback += "\n";
      feedback += s;
    };

    for (const ToolCall& call : response.tool_calls) {
      if (call.kind == ToolCall::Kind::kSearchReplace) {
        if (out.edits >= limits.max_edits) {
          log("limit", {{"kind", "edits"}, {"max", limits.max_edits}});
          out.hit_edit_limit = true;
          ended = true;
          break;
        }
        ++out.edits;
        try {
          out.final_sketch =
              apply_edit(out.final_sketch, {call.search, call.replace});
          const Diagnostics diag = env.checker->check(render(out.final_sketch));
          log("tool_call", {{"turn", turn},
                            {"tool", "search_replace"},
                            {"ok", true},
                            {"search", call.search},
                            {"replace", call.replace}});
          ordered_json errors = ordered_json::array();
          for (const CheckIssue& issue : diag.errors) {
            errors.push_back(ordered_json{{"location", issue.location},
                                          {"message", issue.message}});
          }
          log("diagnostics", {{"turn", turn},
                              {"compiles", diag.compiles},
                              {"errors", errors},
                              {"open_goals", diag.open_goals}});
          std::string fb = std::string("edit applied; compiles=") +
                           (diag.compiles ? "true" : "false");
          for (const CheckIssue& issue : diag.errors) {
            fb += "\n  error at " + issue.location + ": " + issue.message;
          }
          for (const std::string& goal : diag.open_goals) {
            fb += "\n  open goal: " + goal;
          }
          add_feedback(fb);
          if (diag.compiles && diag.open_goals.empty() &&
              find_sorries(out.final_sketch, env.placeholder).empty()) {
            out.solved = true;
            ended = true;
            break;
          }
        } catch (const Error& e) {
          log("tool_call", {{"turn", turn},
                            {"tool", "search_replace"},
                            {"ok", false},
                            {"search", call.search},
                            {"error", e.what()}});
          add_feedback(std::string("edit rejected: ") + e.what());
        }
      } else if (call.kind == ToolCall::Kind::kFocusedProve) {
        if (env.prover == nullptr) {
          log("tool_call",
              {{"turn", turn},
               {"tool", "focused_prove"},
               {"ok", false},
               {"error", "focused prover unavailable in this configuration"}});
          add_feedback("focused_prove unavailable in this configuration");
          continue;  // not counted against the query limit
        }
        if (out.prover_queries >= limits.max_prover_queries) {
          log("limit", {{"kind", "prover_queries"},
                        {"max", limits.max_prover_queries}});
          out.hit_prover_limit = true;
          add_feedback("focused_prove rejected: prover query limit reached");
          continue;  // the episode itself continues
        }
        ++out.prover_queries;
        const std::string key = goal_key(call.goal);
        ProverOutcome outcome;
        bool cached = false;
        const std::uint64_t prover_seed =
            Rng::derive(env.seed, kSaltProverGoal | (key_bits(key) >> 8));
        if (env.goal_cache != nullptr) {
          const PopulationStore::GoalClaim claim =
              env.goal_cache->reserve_goal(key);
          if (claim.state == PopulationStore::GoalClaim::State::kHit) {
            outcome = claim.entry.outcome;
            cached = true;
          } else {
            log("prover_dispatch",
                {{"stage", "episode"}, {"goal_key", key}, {"goal", call.goal}});
            try {
              outcome = env.prover->focused_prove(call.goal, env.prover_budget,
                                                  prover_seed);
            } catch (...) {
              env.goal_cache->abandon_goal(key);
              throw;
            }
            env.goal_cache->goal_store(key, outcome);
            log("prover_result", {{"stage", "episode"},
                                  {"goal_key", key},
                                  {"verdict", verdict_name(outcome.verdict)}});
          }
        } else {
          log("prover_dispatch",
              {{"stage", "episode"}, {"goal_key", key}, {"goal", call.goal}});
          outcome =
              env.prover->focused_prove(call.goal, env.prover_budget,
                                        prover_seed);
          log("prover_result", {{"stage", "episode"},
                                {"goal_key", key},
                                {"verdict", verdict_name(outcome.verdict)}});
        }
        out.goal_feedback[key] = outcome;
        log("tool_call", {{"turn", turn},
                          {"tool", "focused_prove"},
                          {"ok", true},
                          {"goal", call.goal},
                          {"goal_key", key},
                          {"verdict", verdict_name(outcome.verdict)},
                          {"cached", cached}});
        add_feedback("focused_prove " + call.goal + ": " +
                     describe_outcome(outcome));
      } else {  // end_episode
        out.lesson = call.lesson;
        log("tool_call", {{"turn", turn},
                          {"tool", "end_episode"},
                          {"ok", true},
                          {"lesson", call.lesson}});
        ended = true;
        break;
      }
    }
    if (ended) break;
    messages.push_back(Message{
        "user", feedback.empty()
                    ? "(no tool calls executed; emit search_replace, "
                      "focused_prove, or end_episode)"
                    : feedback});
  }

  std::string lesson_text;
  if (!out.solved) {
    lesson_text =
        out.lesson ? *out.lesson : "episode ended without solving the goal";
    out.final_sketch =
        prepend_lesson(out.final_sketch, lesson_text, env.placeholder);
  }
  ordered_json end_fields{{"solved", out.solved},
                          {"turns", out.turns},
                          {"edits", out.edits},
                          {"prover_queries", out.prover_queries},
                          {"stopped", stopped}};
  if (!out.solved) end_fields["lesson"] = lesson_text;
  log("episode_end", end_fields);
  return out;
}

namespace {

// One independent retry loop (agent kinds A and B): episode on the current
// sketch, validate, carry the lesson forward or revert.
class BasicWorker : public Worker {
 public:
  BasicWorker(int index, const ProofSketch& problem, const RunConfig& cfg,
              const BackendSet& backends, Journal& journal, RunState& state)
      : index_(index),
        problem_(problem),
        current_(problem),
        cfg_(cfg),
        journal_(journal),
        state_(state),
        checker_(backends.checker),
        prover_(agent_has_prover(cfg.agent_kind) ? backends.prover : nullptr),
        llm_(backends.make_prover_llm(index)) {
    if (prover_ != nullptr) {
      // Private per-subagent goal cache; basic agents share nothing.
      cache_ = std::make_unique<PopulationStore>(nullptr);
    }
  }

  Step step() override {
    if (state_.stop.load()) return Step::kDone;
    const std::uint64_t ticket = state_.next_ticket.fetch_add(1);
    if (ticket >= state_.budget) return Step::kDone;

    EpisodeEnv env;
    env.llm = llm_.get();
    env.checker = checker_.get();
    env.prover = prover_.get();
    env.goal_cache = cache_.get();
    env.journal = &journal_;
    env.stop = &state_.stop;
    env.prover_budget = cfg_.prover_budget;
    env.placeholder = cfg_.placeholder;
    env.worker = index_;
    env.seed = Rng::derive(cfg_.seed, kSaltEpisode | ticket);

    std::vector<Message> messages{
        Message{"user", replace_all(cfg_.basic_template, "{code}",
                                    render(current_))}};
    const EpisodeOutcome out =
        run_episode(current_, std::move(messages), env, cfg_.limits, ticket);
    state_.episodes_done.fetch_add(1);
    usage_ += out.usage;

    const ValidationVerdict sandbox =
        sandbox_check(problem_, out.final_sketch, *checker_);
    journal_.append("sandbox", {{"worker", index_},
                                {"episode", ticket},
                                {"pass", sandbox.pass},
                                {"reasons", sandbox.reasons}});
    if (!sandbox.pass) {
      journal_.append("revert", {{"worker", index_},
                                 {"episode", ticket},
                                 {"reasons", sandbox.reasons}});
      return Step::kWorked;
    }
    if (out.solved) {
      const ValidationVerdict verdict = final_verify(
          out.final_sketch, *checker_, cfg_.placeholder,
          cfg_.disallowed_tokens);
      journal_.append("final_verify", {{"worker", index_},
                                       {"episode", ticket},
                                       {"pass", verdict.pass},
                                       {"reasons", verdict.reasons}});
      if (verdict.pass) {
        bool expected = false;
        if (state_.stop.compare_exchange_strong(expected, true)) {
          const std::lock_guard<std::mutex> lock(state_.result_mutex);
          state_.result.solved = true;
          state_.result.solution = out.final_sketch;
          state_.result.solver_worker = index_;
          journal_.append("solve", {{"worker", index_}, {"episode", ticket}});
        }
        return Step::kDone;
      }
      journal_.append("revert", {{"worker", index_},
                                 {"episode", ticket},
                                 {"reasons", verdict.reasons}});
      return Step::kWorked;
    }
    current_ = out.final_sketch;  // keep the lesson for the next attempt
    return Step::kWorked;
  }

  TokenUsage usage() const override { return usage_; }

 private:
  int index_;
  ProofSketch problem_;
  ProofSketch current_;
  const RunConfig& cfg_;
  Journal& journal_;
  RunState& state_;
  std::shared_ptr<Checker> checker_;
  std::shared_ptr<Prover> prover_;
  std::unique_ptr<Llm> llm_;
  std::unique_ptr<PopulationStore> cache_;
  TokenUsage usage_;
};

// Evolutionary episode worker (agent kinds C and D): select a parent via
// P-UCB, run an episode, sandbox the candidate, resolve open goals against
// the shared cache (dispatching the focused prover for agent D), insert the
// result, and stop the run when a candidate passes final verification.
class EvoProverWorker : public Worker {
 public:
  EvoProverWorker(int index, const ProofSketch& problem, const RunConfig& cfg,
                  const BackendSet& backends, PopulationStore& store,
                  Journal& journal, RunState& state)
      : index_(index),
        problem_(problem),
        cfg_(cfg),
        store_(store),
        journal_(journal),
        state_(state),
        checker_(backends.checker),
        prover_(agent_has_prover(cfg.agent_kind) ? backends.prover : nullptr),
        llm_(backends.make_prover_llm(index)) {}

  Step step() override {
    if (state_.stop.load()) return Step::kDone;
    const std::uint64_t ticket = state_.next_ticket.fetch_add(1);
    if (ticket >= state_.budget) return Step::kDone;

    // Parent selection. Before the first rating refresh nothing is rated,
    // so fall back to the seed record.
    std::uint64_t parent_id = 0;
    try {
      parent_id = select_parent(store_, cfg_.pucb);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoRatedSketch) throw;
      parent_id = store_.ids().front();
      store_.increment_visits(parent_id);
    }
    const SketchRecord parent = store_.get(parent_id);
    const std::vector<std::uint64_t> inspiration_ids =
        pick_inspirations(store_, parent_id, cfg_.pucb.n_inspirations);
    std::vector<SketchRecord> inspirations;
    inspirations.reserve(inspiration_ids.size());
    for (const std::uint64_t id : inspiration_ids) {
      inspirations.push_back(store_.get(id));
    }
    const PromptBundle bundle = assemble_prompt(
        parent, inspirations, cfg_.sketcher_template, cfg_.pucb,
        Rng::derive(cfg_.seed, kSaltPrompt | ticket));
    journal_.append("select", {{"worker", index_},
                               {"episode", ticket},
                               {"parent", parent_id},
                               {"inspirations", inspiration_ids},
                               {"directive", bundle.directive}});

    EpisodeEnv env;
    env.llm = llm_.get();
    env.checker = checker_.get();
    env.prover = prover_.get();
    env.goal_cache = &store_;
    env.journal = &journal_;
    env.stop = &state_.stop;
    env.prover_budget = cfg_.prover_budget;
    env.placeholder = cfg_.placeholder;
    env.worker = index_;
    env.seed = Rng::derive(cfg_.seed, kSaltEpisode | ticket);

    const EpisodeOutcome out =
        run_episode(parent.sketch, {Message{"user", bundle.rendered_prompt}},
                    env, cfg_.limits, ticket);
    state_.episodes_done.fetch_add(1);
    usage_ += out.usage;

    const ValidationVerdict sandbox =
        sandbox_check(problem_, out.final_sketch, *checker_);
    journal_.append("sandbox", {{"worker", index_},
                                {"episode", ticket},
                                {"pass", sandbox.pass},
                                {"reasons", sandbox.reasons}});
    if (!sandbox.pass) {
      journal_.append("reject", {{"worker", index_},
                                 {"episode", ticket},
                                 {"reasons", sandbox.reasons}});
      return Step::kWorked;
    }

    ProofSketch sketch = out.final_sketch;
    std::map<std::string, ProverOutcome> feedback = out.goal_feedback;
    bool final_ok = false;

    // Validator loop: alternate cache incorporation and (agent D) prover
    // dispatch until the sketch closes, a violation appears, or no goal can
    // make progress. Freshly dispatched proofs are spliced directly by
    // site — never via a second cache lookup — so a goal is consulted in
    // the cache at most once per candidate.
    while (true) {
      const Diagnostics diag = checker_->check(render(sketch));
      if (!diag.compiles) break;
      if (diag.open_goals.empty()) {
        if (find_sorries(sketch, cfg_.placeholder).empty()) {
          const ValidationVerdict verdict =
              final_verify(sketch, *checker_, cfg_.placeholder,
                           cfg_.disallowed_tokens);
          journal_.append("final_verify", {{"worker", index_},
                                           {"episode", ticket},
                                           {"pass", verdict.pass},
                                           {"reasons", verdict.reasons}});
          final_ok = verdict.pass;
        }
        break;
      }
      // If every open goal already has a non-proved outcome on record,
      // another pass cannot make progress.
      bool all_unprovable = true;
      for (const std::string& goal : diag.open_goals) {
        const auto it = feedback.find(goal_key(goal));
        if (it == feedback.end() || it->second.verdict == Verdict::kProved) {
          all_unprovable = false;
          break;
        }
      }
      if (all_unprovable) break;

      const Incorporation inc =
          incorporate_cached_goals(sketch, diag, store_, cfg_.placeholder);
      for (const auto& [key, outcome] : inc.resolved) feedback[key] = outcome;
      for (const UnresolvedGoal& goal : inc.unresolved) {
        if (goal.cached) feedback[goal.key] = *goal.cached;
      }
      sketch = inc.sketch;
      if (!inc.violations.empty()) {
        journal_.append("violation", {{"worker", index_},
                                      {"episode", ticket},
                                      {"reasons", inc.violations}});
        break;
      }
      if (inc.spliced > 0) continue;
      if (env.prover == nullptr) break;  // agent C: cache-only resolution

      // Dispatch phase: try the focused prover on goals nobody has
      // attempted yet. spliced == 0 means the sketch is unchanged, so the
      // placeholder sites still pair with the open goals by position.
      const std::vector<SorrySite> sites =
          find_sorries(sketch, cfg_.placeholder);
      if (sites.size() != inc.unresolved.size()) break;
      std::vector<std::optional<ProverOutcome>> fresh(inc.unresolved.size());
      bool dispatched = false;
      for (std::size_t i = 0; i < inc.unresolved.size(); ++i) {
        const UnresolvedGoal& goal = inc.unresolved[i];
        if (goal.cached) continue;
        const PopulationStore::GoalClaim claim = store_.reserve_goal(goal.key);
        ProverOutcome outcome;
        if (claim.state == PopulationStore::GoalClaim::State::kOwner) {
          journal_.append("prover_dispatch", {{"worker", index_},
                                              {"episode", ticket},
                                              {"stage", "validate"},
                                              {"goal_key", goal.key},
                                              {"goal", goal.text}});
          try {
            outcome = prover_->focused_prove(
                goal.text, cfg_.prover_budget,
                Rng::derive(cfg_.seed,
                            kSaltProverGoal | (key_bits(goal.key) >> 8)));
          } catch (...) {
            store_.abandon_goal(goal.key);
            throw;
          }
          store_.goal_store(goal.key, outcome);
          journal_.append("prover_result",
                          {{"worker", index_},
                           {"episode", ticket},
                           {"stage", "validate"},
                           {"goal_key", goal.key},
                           {"verdict", verdict_name(outcome.verdict)}});
        } else {
          outcome = claim.entry.outcome;
        }
        feedback[goal.key] = outcome;
        fresh[i] = outcome;
        dispatched = true;
      }
      if (!dispatched) break;
      int splices = 0;
      for (std::size_t i = inc.unresolved.size(); i-- > 0;) {
        if (fresh[i] && fresh[i]->verdict == Verdict::kProved) {
          sketch = splice_site(sketch, sites[i], cfg_.placeholder.size(),
                               fresh[i]->script);
          ++splices;
        }
      }
      if (splices == 0) break;  // nothing new closed; state is stable
    }

    SketchRecord record;
    record.sketch = sketch;
    record.parent_id = parent_id;
    record.plan_summary = out.lesson.value_or("");
    record.goal_feedback = feedback;
    const std::uint64_t record_id = store_.insert_sketch(std::move(record));

    if (final_ok) {
      bool expected = false;
      if (state_.stop.compare_exchange_strong(expected, true)) {
        const std::lock_guard<std::mutex> lock(state_.result_mutex);
        state_.result.solved = true;
        state_.result.solution = sketch;
        state_.result.solution_record = record_id;
        state_.result.solver_worker = index_;
        journal_.append("solve", {{"worker", index_},
                                  {"episode", ticket},
                                  {"record", record_id}});
      }
      return Step::kDone;
    }
    return Step::kWorked;
  }

  TokenUsage usage() const override { return usage_; }

 private:
  int index_;
  ProofSketch problem_;
  const RunConfig& cfg_;
  PopulationStore& store_;
  Journal& journal_;
  RunState& state_;
  std::shared_ptr<Checker> checker_;
  std::shared_ptr<Prover> prover_;
  std::unique_ptr<Llm> llm_;
  TokenUsage usage_;
};

// Rater worker: Thompson-sample match participants, ask the rater backend
// for a ranking, break ties, record the match, refit the posterior over the
// full match log, and publish the refreshed ratings.
class RaterWorker : public Worker {
 public:
  RaterWorker(int rater_index, const RunConfig& cfg,
              const BackendSet& backends, PopulationStore& store,
              Journal& journal, RunState& state)
      : rater_index_(rater_index),
        cfg_(cfg),
        store_(store),
        journal_(journal),
        state_(state),
        llm_(backends.make_rater_llm(rater_index)) {}

  Step step() override {
    if (state_.stop.load()) return Step::kDone;
    if (exhausted_) return Step::kDone;
    const std::vector<RatingView> views = store_.rating_views();
    if (views.size() < 2) return Step::kIdle;

    const std::uint64_t round_salt =
        (static_cast<std::uint64_t>(rater_index_) << 32) | refresh_;
    GibbsConfig select_cfg = cfg_.gibbs;
    select_cfg.seed = Rng::derive(cfg_.seed, kSaltThompson | round_salt);
    const std::vector<std::uint64_t> participants = thompson_select(
        views, static_cast<std::size_t>(cfg_.match_size), select_cfg);

    std::string sections;
    for (std::size_t i = 0; i < participants.size(); ++i) {
      const SketchRecord record = store_.get(participants[i]);
      std::string code = render(record.sketch);
      if (code.empty() || code.back() != '\n') code += "\n";
      sections += "### Sketch " + std::to_string(i + 1) + "\n```\n" + code +
                  "```\n\n";
    }
    const std::string prompt =
        replace_all(cfg_.rater_template, "{sketches}", sections);

    GenerationResponse response;
    try {
      GenerationRequest request{{Message{"user", prompt}}, 0};
      validate_request(request);
      response = llm_->generate(request);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kScriptExhausted) {
        exhausted_ = true;
        return Step::kDone;
      }
      throw;
    }
    usage_ += response.usage;
    journal_.append("turn", {{"worker", rater_index_},
                             {"component", "rater"},
                             {"refresh", refresh_},
                             {"text", response.text},
                             {"usage", usage_json(response.usage)}});

    TiedRanking tied;
    try {
      tied = parse_ranking(response.text, participants);
    } catch (const Error& e) {
      journal_.append("rater_error",
                      {{"worker", rater_index_}, {"message", e.what()}});
      ++refresh_;
      return Step::kWorked;
    }

    PlackettLuceModel tie_model;
    for (const RatingView& view : views) {
      tie_model.strengths[view.id] = view.rated ? view.strength_mean : 1.0;
    }
    MatchResult match;
    match.players = break_ties(
        tied, tie_model, Rng::derive(cfg_.seed, kSaltTieBreak | round_salt));
    match.raw_ranking = response.text;
    match.rater_id = "rater-" + std::to_string(rater_index_);
    store_.record_match(match);

    // Full-log refit: every record participates (absent ones get prior
    // draws, which is what Thompson sampling needs for unrated records).
    std::vector<std::vector<std::uint64_t>> rankings;
    std::set<std::uint64_t> in_matches;
    for (const MatchResult& m : store_.matches()) {
      rankings.push_back(m.players);
      in_matches.insert(m.players.begin(), m.players.end());
    }
    const PlackettLuceModel model = make_model(rankings, store_.ids());
    GibbsConfig fit_cfg = cfg_.gibbs;
    fit_cfg.seed = Rng::derive(cfg_.seed, kSaltGibbs | round_salt);
    const std::map<std::uint64_t, std::vector<double>> samples =
        gibbs_posterior(model, fit_cfg);
    std::map<std::uint64_t, RatingState> updates;
    for (const auto& [id, draws] : samples) {
      RatingState rating = summarize_samples(draws);
      rating.rated = in_matches.count(id) > 0;
      updates[id] = rating;
    }
    store_.publish_ratings(updates);
    ++refresh_;
    return Step::kWorked;
  }

  TokenUsage usage() const override { return usage_; }
  bool is_rater() const override { return true; }

 private:
  int rater_index_;
  const RunConfig& cfg_;
  PopulationStore& store_;
  Journal& journal_;
  RunState& state_;
  std::unique_ptr<Llm> llm_;
  TokenUsage usage_;
  std::uint64_t refresh_ = 0;
  bool exhausted_ = false;
};

void validate_run_config(const RunConfig& cfg, const BackendSet& backends,
                         bool evolutionary) {
  if (cfg.n_subagents < 1) {
    throw Error(ErrorCode::kConfigError, "n_subagents must be at least 1");
  }
  if (cfg.episode_budget == 0) {
    throw Error(ErrorCode::kConfigError, "episode_budget must be positive");
  }
  if (!backends.checker) {
    throw Error(ErrorCode::kConfigError, "run needs a checker backend");
  }
  if (!backends.make_prover_llm) {
    throw Error(ErrorCode::kConfigError, "run needs an llm factory");
  }
  if (agent_has_prover(cfg.agent_kind) && !backends.prover) {
    throw Error(ErrorCode::kConfigError,
                std::string("agent kind ") + agent_kind_name(cfg.agent_kind) +
                    " needs a prover backend");
  }
  if (evolutionary) {
    if (cfg.sketcher_template.find("{code}") == std::string::npos) {
      throw Error(ErrorCode::kConfigError,
                  "sketcher template must contain {code}");
    }
    if (cfg.n_raters > 0 &&
        cfg.rater_template.find("{sketches}") == std::string::npos) {
      throw Error(ErrorCode::kConfigError,
                  "rater template must contain {sketches}");
    }
    if (cfg.n_raters > 0 && !backends.make_rater_llm) {
      throw Error(ErrorCode::kConfigError,
                  "run needs a rater llm factory when n_raters > 0");
    }
    if (cfg.match_size < 2) {
      throw Error(ErrorCode::kConfigError, "match_size must be at least 2");
    }
  } else {
    if (cfg.basic_template.find("{code}") == std::string::npos) {
      throw Error(ErrorCode::kConfigError,
                  "basic template must contain {code}");
    }
  }
}

}  // namespace

RunResult run_basic(const ProofSketch& problem, const RunConfig& cfg,
                    const BackendSet& backends, Journal& journal) {
  validate_run_config(cfg, backends, /*evolutionary=*/false);
  RunState state;
  state.budget = cfg.episode_budget;
  std::vector<std::unique_ptr<Worker>> workers;
  workers.reserve(static_cast<std::size_t>(cfg.n_subagents));
  for (int i = 0; i < cfg.n_subagents; ++i) {
    workers.push_back(std::make_unique<BasicWorker>(i, problem, cfg, backends,
                                                    journal, state));
  }
  drive_workers(workers, workers.size(), state, cfg.deterministic);
  RunResult result = std::move(state.result);
  result.episodes = state.episodes_done.load();
  for (const std::unique_ptr<Worker>& worker : workers) {
    result.prover_usage += worker->usage();
  }
  journal.append(
      "stop", {{"reason", result.solved ? "solved" : "budget_exhausted"}});
  return result;
}

RunResult run_evolutionary(const ProofSketch& problem, const RunConfig& cfg,
                           const BackendSet& backends, PopulationStore& store,
                           Journal& journal) {
  validate_run_config(cfg, backends, /*evolutionary=*/true);
  if (cfg.n_raters < 0) {
    throw Error(ErrorCode::kConfigError, "n_raters must be non-negative");
  }
  SketchRecord seed;
  seed.sketch = problem;
  seed.plan_summary = "seed";
  store.insert_sketch(std::move(seed));

  RunState state;
  state.budget = cfg.episode_budget;
  std::vector<std::unique_ptr<Worker>> workers;
  workers.reserve(static_cast<std::size_t>(cfg.n_subagents + cfg.n_raters));
  for (int i = 0; i < cfg.n_subagents; ++i) {
    workers.push_back(std::make_unique<EvoProverWorker>(
        i, problem, cfg, backends, store, journal, state));
  }
  for (int r = 0; r < cfg.n_raters; ++r) {
    workers.push_back(std::make_unique<RaterWorker>(r, cfg, backends, store,
                                                    journal, state));
  }
  drive_workers(workers, static_cast<std::size_t>(cfg.n_subagents), state,
                cfg.deterministic);
  RunResult result = std::move(state.result);
  result.episodes = state.episodes_done.load();
  for (const std::unique_ptr<Worker>& worker : workers) {
    if (worker->is_rater()) {
      result.rater_usage += worker->usage();
    } else {
      result.prover_usage += worker->usage();
    }
  }
  journal.append(
      "stop", {{"reason", result.solved ? "solved" : "budget_exhausted"}});
  return result;
}

}  // namespace nexus
