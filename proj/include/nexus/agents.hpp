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

#ifndef NEXUS_AGENTS_HPP_
#define NEXUS_AGENTS_HPP_

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nexus/backends.hpp"
#include "nexus/journal.hpp"
#include "nexus/population.hpp"
#include "nexus/rating.hpp"
#include "nexus/selection.hpp"
#include "nexus/sketch.hpp"

namespace nexus {

// The four agent configurations:
//   A: episode loop only.
//   B: A plus the focused-prove tool.
//   C: evolutionary population, no focused prover.
//   D: everything (C plus focused prover and goal-cache dispatch).
enum class AgentKind { kA, kB, kC, kD };

const char* agent_kind_name(AgentKind kind);
AgentKind agent_kind_from_name(const std::string& name);
bool agent_has_prover(AgentKind kind);        // B and D
bool agent_is_evolutionary(AgentKind kind);   // C and D

struct EpisodeLimits {
  int max_prover_queries = 5;
  int max_edits = 90;
  int max_turns = 40;
};

struct RunConfig {
  AgentKind agent_kind = AgentKind::kA;
  int n_subagents = 1;
  int n_raters = 1;  // evolutionary agents only
  std::uint64_t episode_budget = 3000;
  EpisodeLimits limits;
  std::uint64_t seed = 0;
  bool deterministic = false;  // round-robin single-thread scheduler
  ProverBudget prover_budget;
  std::string placeholder = std::string(kDefaultPlaceholder);
  std::vector<std::string> disallowed_tokens = {"sorryAx"};
  PUCBConfig pucb;
  GibbsConfig gibbs;
  int match_size = 7;  // P, participants per rater match
  std::string sketcher_template;  // evolutionary episode prompt
  std::string basic_template;     // basic episode prompt
  std::string rater_template;     // rater prompt
};

// Backend wiring. The LLM factories are called once per worker because
// replay backends keep a per-conversation cursor; checker and prover
// implementations are stateless and shared.
struct BackendSet {
  std::function<std::unique_ptr<Llm>(int worker_index)> make_prover_llm;
  std::function<std::unique_ptr<Llm>(int rater_index)> make_rater_llm;
  std::shared_ptr<Checker> checker;
  std::shared_ptr<Prover> prover;  // null for agent kinds without the tool
};

struct EpisodeOutcome {
  ProofSketch final_sketch;
  bool solved = false;  // compiles, zero goals, zero placeholders
  std::optional<std::string> lesson;
  TokenUsage usage;
  int turns = 0;
  int edits = 0;
  int prover_queries = 0;
  bool hit_edit_limit = false;
  bool hit_prover_limit = false;
  std::map<std::string, ProverOutcome> goal_feedback;  // episode-stage
};

// Everything one episode needs. `prover` being null makes the
// focused_prove tool unavailable (agents A and C); when it is set,
// `goal_cache` must be set too (cache-first consult with exactly-once
// dispatch).
struct EpisodeEnv {
  Llm* llm = nullptr;
  Checker* checker = nullptr;
  Prover* prover = nullptr;
  PopulationStore* goal_cache = nullptr;
  Journal* journal = nullptr;
  std::atomic<bool>* stop = nullptr;
  ProverBudget prover_budget;
  std::string placeholder = std::string(kDefaultPlaceholder);
  int worker = 0;
  std::uint64_t seed = 0;
};

// Runs one multi-turn episode: generate, execute tool calls in emission
// order (edits are checked immediately and the diagnostics fed back as the
// next user turn), stop on end_episode, solve, edit limit, turn limit, or
// the cooperative stop signal. Unsolved episodes get a lesson comment
// prepended inside the first editable block.
EpisodeOutcome run_episode(const ProofSketch& start,
                           std::vector<Message> messages,
                           const EpisodeEnv& env, const EpisodeLimits& limits,
                           std::uint64_t episode_index);

struct RunResult {
  bool solved = false;
  std::uint64_t episodes = 0;
  std::optional<ProofSketch> solution;
  std::optional<std::uint64_t> solution_record;  // evolutionary runs
  int solver_worker = -1;
  TokenUsage prover_usage;
  TokenUsage rater_usage;
};

// Agent kinds A and B: independent Ralph loops sharing only the stop
// signal and the global episode budget.
RunResult run_basic(const ProofSketch& problem, const RunConfig& cfg,
                    const BackendSet& backends, Journal& journal);

// Agent kinds C and D: prover workers evolve the population via
// select-parent / episode / validate / insert; rater workers run matches
// and refresh ratings. Stops on the first final-verified proof or when the
// episode budget is exhausted.
RunResult run_evolutionary(const ProofSketch& problem, const RunConfig& cfg,
                           const BackendSet& backends, PopulationStore& store,
                           Journal& journal);

// Parses a rater reply of the form "RANKING: 2 > 1 = 3" (1-based
// presentation positions; '>' separates tie groups, '=' joins ties) into a
// tied ranking over the presented record ids. The positions must form a
// permutation of 1..N. Throws InvalidRequest on malformed input.
TiedRanking parse_ranking(const std::string& text,
                          const std::vector<std::uint64_t>& presented);

// Prepends "-- lesson: <text>" inside the first editable block; returns
// the sketch unchanged (minus the comment) when no block exists. Any
// placeholder tokens inside the lesson text are masked so the comment can
// never be mistaken for an open hole by the token scan.
ProofSketch prepend_lesson(const ProofSketch& sketch, const std::string& lesson,
                           std::string_view placeholder = kDefaultPlaceholder);

}  // namespace nexus

#endif  // NEXUS_AGENTS_HPP_
