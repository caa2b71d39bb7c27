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

#include <atomic>
#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "nexus/digest.hpp"
#include "nexus/error.hpp"
#include "nexus/journal.hpp"
#include "nexus/population.hpp"
#include "nexus/replay.hpp"
#include "nexus/sketch.hpp"
#include "nexus/toy.hpp"

namespace nexus {
namespace {

using nlohmann::ordered_json;

// --- script-building helpers -----------------------------------------------

ordered_json sr(const std::string& search, const std::string& replace) {
  return ordered_json{
      {"tool", "search_replace"}, {"search", search}, {"replace", replace}};
}

ordered_json fp(const std::string& goal) {
  return ordered_json{{"tool", "focused_prove"}, {"goal", goal}};
}

ordered_json ee(const std::string& lesson) {
  return ordered_json{{"tool", "end_episode"}, {"lesson", lesson}};
}

ordered_json resp(const std::string& text, std::vector<ordered_json> calls,
                  std::int64_t in = 10, std::int64_t cache = 0,
                  std::int64_t out = 5) {
  ordered_json entry;
  entry["text"] = text;
  entry["usage"] = ordered_json{{"input_tokens", in},
                                {"cache_read_tokens", cache},
                                {"output_tokens", out}};
  entry["tool_calls"] = ordered_json(calls);
  return entry;
}

std::string script(std::vector<ordered_json> responses, bool loop = false) {
  ordered_json doc;
  doc["loop"] = loop;
  doc["responses"] = ordered_json(responses);
  return doc.dump();
}

int count_kind(const Journal& journal, const std::string& kind) {
  int n = 0;
  for (const Journal::Event& event : journal.events()) {
    if (event.kind == kind) ++n;
  }
  return n;
}

// A document with one open helper inside its editable block; editing the
// "A0" marker never solves it, so episodes run until a limit trips.
constexpr const char kOpenDoc[] =
    "-- EVOLVE-BLOCK-START\n"
    "-- A0\n"
    "lemma goal : 1 + 2 = 3 := sorry\n"
    "-- EVOLVE-BLOCK-END\n";

EpisodeEnv make_env(Llm& llm, Checker& checker, Journal* journal = nullptr) {
  EpisodeEnv env;
  env.llm = &llm;
  env.checker = &checker;
  env.journal = journal;
  env.seed = 42;
  return env;
}

std::vector<Message> seed_messages() {
  return {Message{"user", "close every open goal"}};
}

// --- prepend_lesson ---------------------------------------------------------

TEST_CASE("prepend_lesson writes a comment into the first editable block") {
  const ProofSketch sketch = parse_sketch(kOpenDoc);
  const ProofSketch out = prepend_lesson(sketch, "try smaller steps");
  const std::string rendered = render(out);
  CHECK(rendered.find("-- EVOLVE-BLOCK-START\n-- lesson: try smaller steps\n"
                      "-- A0\n") != std::string::npos);
  CHECK(out.source_digest == sha256_hex(rendered));
}

TEST_CASE("prepend_lesson masks standalone placeholder tokens") {
  const ProofSketch sketch = parse_sketch(kOpenDoc);
  const ProofSketch out =
      prepend_lesson(sketch, "the sorry resists, keep sorrying anyway");
  const std::string rendered = render(out);
  CHECK(rendered.find("-- lesson: the (hole) resists, keep sorrying anyway") !=
        std::string::npos);
  // Exactly the original placeholder remains (the lemma body).
  CHECK(find_sorries(out).size() == 1);
}

TEST_CASE("prepend_lesson flattens newlines") {
  const ProofSketch sketch = parse_sketch(kOpenDoc);
  const ProofSketch out = prepend_lesson(sketch, "first\nsecond\r\nthird");
  CHECK(render(out).find("-- lesson: first second  third\n") !=
        std::string::npos);
}

TEST_CASE("prepend_lesson without an editable block is a no-op") {
  const ProofSketch sketch = parse_sketch("lemma a : 1 + 1 = 2 := eval\n");
  const ProofSketch out = prepend_lesson(sketch, "nowhere to write");
  CHECK(render(out) == render(sketch));
}

// --- parse_ranking ----------------------------------------------------------

TEST_CASE("parse_ranking maps positions onto presented ids") {
  const std::vector<std::uint64_t> presented{10, 20, 30};
  const TiedRanking ranking =
      parse_ranking("thoughts...\nRANKING: 2 > 1 = 3\n", presented);
  REQUIRE(ranking.size() == 2);
  CHECK(ranking[0] == std::vector<std::uint64_t>{20});
  CHECK(ranking[1] == std::vector<std::uint64_t>{10, 30});
}

TEST_CASE("parse_ranking uses the last RANKING line") {
  const std::vector<std::uint64_t> presented{10, 20};
  const TiedRanking ranking =
      parse_ranking("RANKING: 1 > 2 was my draft\nRANKING: 2 > 1", presented);
  CHECK(ranking[0] == std::vector<std::uint64_t>{20});
  CHECK(ranking[1] == std::vector<std::uint64_t>{10});
}

TEST_CASE("parse_ranking rejects malformed replies") {
  const std::vector<std::uint64_t> presented{10, 20, 30};
  auto code_of = [&](const std::string& text) {
    try {
      parse_ranking(text, presented);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kUnbalancedMarkers;  // sentinel: no throw
  };
  CHECK(code_of("no ranking here") == ErrorCode::kInvalidRequest);
  CHECK(code_of("RANKING: 1 > 1 = 2") == ErrorCode::kInvalidRequest);
  CHECK(code_of("RANKING: 1 > 2") == ErrorCode::kInvalidRequest);  // missing 3
  CHECK(code_of("RANKING: 1 > two > 3") == ErrorCode::kInvalidRequest);
  CHECK(code_of("RANKING: 0 > 1 > 2") == ErrorCode::kInvalidRequest);
  CHECK(code_of("RANKING: 1 > 2 > 4") == ErrorCode::kInvalidRequest);
}

// --- agent kind helpers -----------------------------------------------------

TEST_CASE("agent kind names and capabilities") {
  CHECK(agent_kind_from_name("a") == AgentKind::kA);
  CHECK(agent_kind_from_name("D") == AgentKind::kD);
  CHECK(std::string(agent_kind_name(AgentKind::kC)) == "C");
  CHECK_THROWS_AS(agent_kind_from_name("x"), Error);

  CHECK_FALSE(agent_has_prover(AgentKind::kA));
  CHECK(agent_has_prover(AgentKind::kB));
  CHECK_FALSE(agent_has_prover(AgentKind::kC));
  CHECK(agent_has_prover(AgentKind::kD));
  CHECK_FALSE(agent_is_evolutionary(AgentKind::kA));
  CHECK_FALSE(agent_is_evolutionary(AgentKind::kB));
  CHECK(agent_is_evolutionary(AgentKind::kC));
  CHECK(agent_is_evolutionary(AgentKind::kD));
}

// --- run_episode ------------------------------------------------------------

TEST_CASE("run_episode ends the episode at the edit limit") {
  // Four edits scripted, three allowed: the fourth attempt trips the limit
  // and the episode ends with the executed edits kept.
  ReplayLlm llm(script({resp("editing", {sr("A0", "A1"), sr("A1", "A2"),
                                         sr("A2", "A3"), sr("A3", "A4")})}));
  toy::ToyChecker checker;
  Journal journal;
  EpisodeEnv env = make_env(llm, checker, &journal);
  EpisodeLimits limits;
  limits.max_edits = 3;

  const EpisodeOutcome out =
      run_episode(parse_sketch(kOpenDoc), seed_messages(), env, limits, 0);
  CHECK(out.edits == 3);
  CHECK(out.hit_edit_limit);
  CHECK_FALSE(out.hit_prover_limit);
  CHECK(out.turns == 1);
  CHECK_FALSE(out.solved);
  CHECK(render(out.final_sketch).find("-- A3\n") != std::string::npos);
  CHECK(render(out.final_sketch).find("-- lesson: episode ended without") !=
        std::string::npos);

  REQUIRE(count_kind(journal, "limit") == 1);
  for (const Journal::Event& event : journal.events()) {
    if (event.kind == "limit") {
      CHECK(event.data.at("kind") == "edits");
      CHECK(event.data.at("max") == 3);
    }
    if (event.kind == "episode_end") {
      CHECK(event.data.at("edits") == 3);
    }
  }
}

TEST_CASE("run_episode rejects queries past the prover limit but continues") {
  ReplayLlm llm(script({resp("probing",
                             {fp("⊢ 1+1 = 2"), fp("⊢ 2+2 = 4"),
                              fp("⊢ 3+3 = 6"), sr("A0", "A1")},
                             10, 1, 2),
                        resp("wrapping up", {ee("two probes were enough")}, 5,
                             0, 3)}));
  toy::ToyChecker checker;
  toy::SimProver prover;
  Journal journal;
  EpisodeEnv env = make_env(llm, checker, &journal);
  env.prover = &prover;
  env.prover_budget.simulations = 10;
  EpisodeLimits limits;
  limits.max_prover_queries = 2;

  const EpisodeOutcome out =
      run_episode(parse_sketch(kOpenDoc), seed_messages(), env, limits, 0);
  CHECK(out.prover_queries == 2);
  CHECK(out.hit_prover_limit);
  CHECK_FALSE(out.hit_edit_limit);
  // The edit after the rejected third query still executed, and the episode
  // went on to a second turn.
  CHECK(out.edits == 1);
  CHECK(out.turns == 2);
  CHECK(out.lesson == "two probes were enough");
  CHECK(render(out.final_sketch).find("-- A1\n") != std::string::npos);

  REQUIRE(out.goal_feedback.size() == 2);
  CHECK(out.goal_feedback.at(goal_key("⊢ 1+1 = 2")).verdict ==
        Verdict::kProved);
  CHECK(out.goal_feedback.at(goal_key("⊢ 2+2 = 4")).verdict ==
        Verdict::kProved);

  CHECK(count_kind(journal, "prover_dispatch") == 2);
  REQUIRE(count_kind(journal, "limit") == 1);
  for (const Journal::Event& event : journal.events()) {
    if (event.kind == "limit") CHECK(event.data.at("kind") == "prover_queries");
    if (event.kind == "episode_end") CHECK(event.data.at("prover_queries") == 2);
  }
  // Usage accumulates across turns.
  CHECK(out.usage.input_tokens == 15);
  CHECK(out.usage.cache_read_tokens == 1);
  CHECK(out.usage.output_tokens == 5);
}

TEST_CASE("run_episode treats focused_prove as unavailable without a prover") {
  ReplayLlm llm(script({resp("try the tool", {fp("⊢ 1+1 = 2")}),
                        resp("give up", {ee("tool missing")})}));
  toy::ToyChecker checker;
  EpisodeEnv env = make_env(llm, checker);

  const EpisodeOutcome out = run_episode(parse_sketch(kOpenDoc),
                                         seed_messages(), env, {}, 0);
  CHECK(out.prover_queries == 0);
  CHECK_FALSE(out.hit_prover_limit);
  CHECK(out.goal_feedback.empty());
  CHECK(out.lesson == "tool missing");
}

TEST_CASE("run_episode consults the goal cache before dispatching") {
  ReplayLlm llm(
      script({resp("probe twice", {fp("⊢ 1+1 = 2"), fp("  ⊢  1+1 =  2\n")}),
              resp("done", {ee("cached")})}));
  toy::ToyChecker checker;
  toy::SimProver prover;
  Journal journal;
  PopulationStore cache(&journal);
  EpisodeEnv env = make_env(llm, checker, &journal);
  env.prover = &prover;
  env.prover_budget.simulations = 10;
  env.goal_cache = &cache;

  const EpisodeOutcome out = run_episode(parse_sketch(kOpenDoc),
                                         seed_messages(), env, {}, 0);
  // Both spellings normalize to one key: one dispatch, one cache hit.
  CHECK(out.prover_queries == 2);
  CHECK(count_kind(journal, "prover_dispatch") == 1);
  CHECK(count_kind(journal, "cache_hit") == 1);
  CHECK(out.goal_feedback.size() == 1);
}

TEST_CASE("run_episode stops on a solving edit without a lesson comment") {
  ReplayLlm llm(script(
      {resp("solve it", {sr("sorry", "eval"), sr("A0", "NEVER-APPLIED")})}));
  toy::ToyChecker checker;
  EpisodeEnv env = make_env(llm, checker);

  const EpisodeOutcome out = run_episode(parse_sketch(kOpenDoc),
                                         seed_messages(), env, {}, 0);
  CHECK(out.solved);
  CHECK(out.edits == 1);  // the call after the solve never ran
  const std::string rendered = render(out.final_sketch);
  CHECK(rendered.find(":= eval") != std::string::npos);
  CHECK(rendered.find("-- lesson:") == std::string::npos);
  CHECK(rendered.find("NEVER-APPLIED") == std::string::npos);
}

TEST_CASE("run_episode feeds edit failures back and keeps going") {
  ReplayLlm llm(script({resp("bad edit", {sr("missing text", "anything")}),
                        resp("stop", {ee("search text was wrong")})}));
  toy::ToyChecker checker;
  Journal journal;
  EpisodeEnv env = make_env(llm, checker, &journal);

  const ProofSketch start = parse_sketch(kOpenDoc);
  const EpisodeOutcome out =
      run_episode(start, seed_messages(), env, {}, 0);
  CHECK(out.edits == 1);  // attempts count, even when rejected
  CHECK_FALSE(out.solved);
  CHECK(out.turns == 2);
  bool saw_failed_call = false;
  for (const Journal::Event& event : journal.events()) {
    if (event.kind == "tool_call" && event.data.at("ok") == false) {
      saw_failed_call = true;
      CHECK(event.data.at("tool") == "search_replace");
    }
  }
  CHECK(saw_failed_call);
}

TEST_CASE("run_episode honours the turn limit") {
  ReplayLlm llm(script({resp("just talking, no tools", {})}, /*loop=*/true));
  toy::ToyChecker checker;
  EpisodeEnv env = make_env(llm, checker);
  EpisodeLimits limits;
  limits.max_turns = 2;

  const EpisodeOutcome out = run_episode(parse_sketch(kOpenDoc),
                                         seed_messages(), env, limits, 0);
  CHECK(out.turns == 2);
  CHECK_FALSE(out.solved);
}

TEST_CASE("run_episode returns immediately when the stop flag is up") {
  ReplayLlm llm(script({resp("unused", {})}));
  toy::ToyChecker checker;
  std::atomic<bool> stop{true};
  EpisodeEnv env = make_env(llm, checker);
  env.stop = &stop;

  const EpisodeOutcome out = run_episode(parse_sketch(kOpenDoc),
                                         seed_messages(), env, {}, 0);
  CHECK(out.turns == 0);
  CHECK_FALSE(out.solved);
  CHECK(out.usage == TokenUsage{});
}

TEST_CASE("run_episode requires an llm and a checker") {
  toy::ToyChecker checker;
  EpisodeEnv env;
  env.checker = &checker;
  CHECK_THROWS_AS(
      run_episode(parse_sketch(kOpenDoc), seed_messages(), env, {}, 0), Error);
}

// --- run_basic ---------------------------------------------------------------

TEST_CASE("run_basic reverts rejected episodes and carries lessons forward") {
  const ProofSketch problem = parse_sketch(
      "lemma target : 0 + 1 = 1 := eval\n"
      "-- EVOLVE-BLOCK-START\n"
      "-- W0\n"
      "lemma fill : 2 + 2 = 4 := sorry\n"
      "-- EVOLVE-BLOCK-END\n");

  // Episode 1 smuggles marker syntax (sandbox revert), episode 2 makes a
  // harmless edit and records a lesson, episode 3 solves on top of it.
  const std::string llm_script = script(
      {resp("restructure",
            {sr("-- W0",
                "-- W0\n-- EVOLVE-BLOCK-END\n-- EVOLVE-BLOCK-START"),
             ee("trying structural trick")}),
       resp("small step", {sr("-- W0", "-- W0 kept"), ee("keep the shape")}),
       resp("final", {sr("sorry", "eval")})});

  RunConfig cfg;
  cfg.agent_kind = AgentKind::kA;
  cfg.n_subagents = 1;
  cfg.episode_budget = 5;
  cfg.seed = 3;
  cfg.deterministic = true;
  cfg.basic_template = "Fix this proof:\n{code}";

  BackendSet backends;
  backends.checker = std::make_shared<toy::ToyChecker>();
  backends.make_prover_llm = [&llm_script](int) {
    return std::make_unique<ReplayLlm>(llm_script);
  };

  Journal journal;
  const RunResult result = run_basic(problem, cfg, backends, journal);
  CHECK(result.solved);
  CHECK(result.episodes == 3);
  CHECK(result.solver_worker == 0);
  REQUIRE(result.solution.has_value());

  const std::string solution = render(*result.solution);
  CHECK(solution.find("lemma fill : 2 + 2 = 4 := eval") != std::string::npos);
  CHECK(solution.find("-- W0 kept") != std::string::npos);
  CHECK(solution.find("-- lesson: keep the shape") != std::string::npos);

  CHECK(count_kind(journal, "revert") == 1);
  CHECK(count_kind(journal, "solve") == 1);
  for (const Journal::Event& event : journal.events()) {
    if (event.kind == "stop") CHECK(event.data.at("reason") == "solved");
  }
  CHECK(result.prover_usage.input_tokens == 30);
  CHECK(result.prover_usage.output_tokens == 15);
}

TEST_CASE("run_basic validates its configuration") {
  const ProofSketch problem = parse_sketch(kOpenDoc);
  BackendSet backends;
  backends.checker = std::make_shared<toy::ToyChecker>();
  backends.make_prover_llm = [](int) {
    return std::make_unique<ReplayLlm>(R"({"responses": []})");
  };

  RunConfig cfg;
  cfg.basic_template = "{code}";
  Journal journal;

  SUBCASE("template must mention the code") {
    cfg.basic_template = "no variable";
    CHECK_THROWS_AS(run_basic(problem, cfg, backends, journal), Error);
  }
  SUBCASE("budget must be positive") {
    cfg.episode_budget = 0;
    CHECK_THROWS_AS(run_basic(problem, cfg, backends, journal), Error);
  }
  SUBCASE("at least one subagent") {
    cfg.n_subagents = 0;
    CHECK_THROWS_AS(run_basic(problem, cfg, backends, journal), Error);
  }
  SUBCASE("prover-capable kinds need a prover backend") {
    cfg.agent_kind = AgentKind::kB;
    CHECK_THROWS_AS(run_basic(problem, cfg, backends, journal), Error);
  }
}

// --- run_evolutionary ---------------------------------------------------------

RunConfig evo_config() {
  RunConfig cfg;
  cfg.agent_kind = AgentKind::kC;
  cfg.n_subagents = 1;
  cfg.n_raters = 0;
  cfg.episode_budget = 3;
  cfg.seed = 5;
  cfg.deterministic = true;
  cfg.sketcher_template =
      "Improve:\n{code}\nPlan: {plan}\nSee also:\n{inspirations}\n"
      "Directive: {directive}";
  return cfg;
}

TEST_CASE("run_evolutionary inserts a solving record and stops") {
  const ProofSketch problem = parse_sketch(kOpenDoc);
  const std::string llm_script =
      script({resp("close it", {sr("sorry", "eval")})});

  RunConfig cfg = evo_config();
  BackendSet backends;
  backends.checker = std::make_shared<toy::ToyChecker>();
  backends.make_prover_llm = [&llm_script](int) {
    return std::make_unique<ReplayLlm>(llm_script);
  };

  Journal journal;
  PopulationStore store(&journal);
  const RunResult result =
      run_evolutionary(problem, cfg, backends, store, journal);
  CHECK(result.solved);
  CHECK(result.episodes == 1);
  REQUIRE(result.solution_record.has_value());

  const SketchRecord record = store.get(*result.solution_record);
  CHECK(record.parent_id == store.ids().front());
  CHECK(render(record.sketch).find(":= eval") != std::string::npos);
  CHECK(store.size() == 2);  // seed + solution

  bool saw_select = false;
  for (const Journal::Event& event : journal.events()) {
    if (event.kind == "select") {
      saw_select = true;
      CHECK(event.data.at("parent") == store.ids().front());
    }
    if (event.kind == "stop") CHECK(event.data.at("reason") == "solved");
  }
  CHECK(saw_select);
}

TEST_CASE("run_evolutionary exhausts its budget on non-solving episodes") {
  const ProofSketch problem = parse_sketch(kOpenDoc);
  const std::string llm_script = script(
      {resp("tweak", {sr("-- A0", "-- A0x"), ee("tweak")})}, /*loop=*/true);

  RunConfig cfg = evo_config();
  cfg.episode_budget = 2;
  BackendSet backends;
  backends.checker = std::make_shared<toy::ToyChecker>();
  backends.make_prover_llm = [&llm_script](int) {
    return std::make_unique<ReplayLlm>(llm_script);
  };

  Journal journal;
  PopulationStore store(&journal);
  const RunResult result =
      run_evolutionary(problem, cfg, backends, store, journal);
  CHECK_FALSE(result.solved);
  CHECK(result.episodes == 2);
  CHECK(store.size() == 3);  // seed + one insert per episode
  for (const std::uint64_t id : store.ids()) {
    if (id == store.ids().front()) continue;
    CHECK(store.get(id).plan_summary == "tweak");
  }
  for (const Journal::Event& event : journal.events()) {
    if (event.kind == "stop") {
      CHECK(event.data.at("reason") == "budget_exhausted");
    }
  }
}

TEST_CASE("run_evolutionary validates its configuration") {
  const ProofSketch problem = parse_sketch(kOpenDoc);
  BackendSet backends;
  backends.checker = std::make_shared<toy::ToyChecker>();
  backends.make_prover_llm = [](int) {
    return std::make_unique<ReplayLlm>(R"({"responses": []})");
  };
  backends.make_rater_llm = [](int) {
    return std::make_unique<ReplayLlm>(R"({"responses": []})");
  };
  Journal journal;
  PopulationStore store;

  SUBCASE("sketcher template must mention the code") {
    RunConfig cfg = evo_config();
    cfg.sketcher_template = "no variable";
    CHECK_THROWS_AS(run_evolutionary(problem, cfg, backends, store, journal),
                    Error);
  }
  SUBCASE("rater template must mention the sketches") {
    RunConfig cfg = evo_config();
    cfg.n_raters = 1;
    cfg.rater_template = "no variable";
    CHECK_THROWS_AS(run_evolutionary(problem, cfg, backends, store, journal),
                    Error);
  }
  SUBCASE("match size of one is rejected") {
    RunConfig cfg = evo_config();
    cfg.n_raters = 1;
    cfg.rater_template = "{sketches}";
    cfg.match_size = 1;
    CHECK_THROWS_AS(run_evolutionary(problem, cfg, backends, store, journal),
                    Error);
  }
}

}  // namespace
}  // namespace nexus
