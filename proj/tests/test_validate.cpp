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

#include "nexus/validate.hpp"

#include <optional>
#include <string>

#include "doctest.h"
#include "nexus/digest.hpp"
#include "nexus/population.hpp"
#include "nexus/sketch.hpp"
#include "nexus/toy.hpp"

namespace nexus {
namespace {

// A document with one frozen statement on each side of an editable block
// holding two open helper lemmas.
constexpr const char kTwoHoleDoc[] =
    "-- demo document\n"
    "lemma base : 2 + 2 = 4 := eval\n"
    "-- EVOLVE-BLOCK-START\n"
    "lemma helper : 2 + 3 = 5 := sorry\n"
    "lemma extra : 4 + 5 = 9 := sorry\n"
    "-- EVOLVE-BLOCK-END\n"
    "lemma tail : 1 + 1 = 2 := eval\n";

bool starts_with(const std::string& text, const std::string& prefix) {
  return text.rfind(prefix, 0) == 0;
}

TEST_CASE("sandbox_check passes editable-only edits with open goals") {
  const ProofSketch original = parse_sketch(kTwoHoleDoc);
  const ProofSketch candidate = apply_edit(
      original, SearchReplaceEdit{"2 + 3 = 5 := sorry", "2 + 3 = 5 := eval"});
  toy::ToyChecker checker;

  const ValidationVerdict verdict = sandbox_check(original, candidate, checker);
  CHECK(verdict.pass);
  CHECK(verdict.reasons.empty());
}

TEST_CASE("sandbox_check flags frozen-byte differences") {
  const ProofSketch original = parse_sketch(kTwoHoleDoc);
  std::string altered(kTwoHoleDoc);
  const std::string from = "base : 2 + 2 = 4";
  altered.replace(altered.find(from), from.size(), "base : 3 + 1 = 4");
  const ProofSketch candidate = parse_sketch(altered);
  toy::ToyChecker checker;

  const ValidationVerdict verdict = sandbox_check(original, candidate, checker);
  CHECK_FALSE(verdict.pass);
  REQUIRE_FALSE(verdict.reasons.empty());
  CHECK(starts_with(verdict.reasons.front(), "StatementAltered"));
}

TEST_CASE("sandbox_check catches marker syntax smuggled through an edit") {
  // The in-memory frozen regions are untouched, so only the re-parse of the
  // rendered text can notice that new marker lines re-carve the document.
  const ProofSketch original = parse_sketch(kTwoHoleDoc);
  const ProofSketch candidate = apply_edit(
      original,
      SearchReplaceEdit{
          "lemma helper : 2 + 3 = 5 := sorry",
          "lemma helper : 2 + 3 = 5 := eval\n"
          "-- EVOLVE-BLOCK-END\n"
          "lemma smuggled : 9 + 9 = 18 := eval\n"
          "-- EVOLVE-BLOCK-START\n"
          "lemma pad : 0 + 0 = 0 := eval"});
  CHECK(protected_digest(candidate) == protected_digest(original));

  toy::ToyChecker checker;
  const ValidationVerdict verdict = sandbox_check(original, candidate, checker);
  CHECK_FALSE(verdict.pass);
  REQUIRE(verdict.reasons.size() == 1);
  CHECK(verdict.reasons.front().find("marker structure") != std::string::npos);
}

TEST_CASE("sandbox_check reports a render that no longer parses") {
  const ProofSketch original = parse_sketch(kTwoHoleDoc);
  const ProofSketch candidate = apply_edit(
      original, SearchReplaceEdit{"lemma extra : 4 + 5 = 9 := sorry",
                                  "-- EVOLVE-BLOCK-END"});

  toy::ToyChecker checker;
  const ValidationVerdict verdict = sandbox_check(original, candidate, checker);
  CHECK_FALSE(verdict.pass);
  REQUIRE(verdict.reasons.size() == 1);
  CHECK(starts_with(verdict.reasons.front(), "StatementAltered"));
  CHECK(verdict.reasons.front().find("no longer parses") != std::string::npos);
}

TEST_CASE("sandbox_check surfaces checker failures as CompileError") {
  const ProofSketch original = parse_sketch(kTwoHoleDoc);
  const ProofSketch candidate = apply_edit(
      original, SearchReplaceEdit{"2 + 3 = 5 := sorry", "2 + 3 = 6 := eval"});

  toy::ToyChecker checker;
  const ValidationVerdict verdict = sandbox_check(original, candidate, checker);
  CHECK_FALSE(verdict.pass);
  REQUIRE(verdict.reasons.size() == 1);
  CHECK(starts_with(verdict.reasons.front(), "CompileError"));
}

TEST_CASE("incorporate_cached_goals splices proved entries only") {
  const ProofSketch sketch = parse_sketch(kTwoHoleDoc);
  const Diagnostics diagnostics = toy::toy_check(render(sketch));
  REQUIRE(diagnostics.compiles);
  REQUIRE(diagnostics.open_goals.size() == 2);

  PopulationStore store;
  const std::string helper_key = goal_key(diagnostics.open_goals[0]);
  const std::string extra_key = goal_key(diagnostics.open_goals[1]);
  store.goal_store(helper_key,
                   ProverOutcome{Verdict::kFailed, "",
                                 "budget exhausted: goal needs 9 reductions"});
  store.goal_store(extra_key, ProverOutcome{Verdict::kProved, "eval", ""});

  const Incorporation result =
      incorporate_cached_goals(sketch, diagnostics, store);
  CHECK(result.violations.empty());
  CHECK(result.spliced == 1);

  REQUIRE(result.resolved.size() == 1);
  CHECK(result.resolved.front().first == extra_key);
  CHECK(result.resolved.front().second.verdict == Verdict::kProved);

  REQUIRE(result.unresolved.size() == 1);
  CHECK(result.unresolved.front().key == helper_key);
  CHECK(result.unresolved.front().text == diagnostics.open_goals[0]);
  REQUIRE(result.unresolved.front().cached.has_value());
  CHECK(result.unresolved.front().cached->verdict == Verdict::kFailed);

  const std::string rendered = render(result.sketch);
  CHECK(rendered.find("lemma extra : 4 + 5 = 9 := eval") != std::string::npos);
  CHECK(rendered.find("lemma helper : 2 + 3 = 5 := sorry") !=
        std::string::npos);
}

TEST_CASE("incorporate_cached_goals with an empty cache leaves all open") {
  const ProofSketch sketch = parse_sketch(kTwoHoleDoc);
  const Diagnostics diagnostics = toy::toy_check(render(sketch));
  PopulationStore store;

  const Incorporation result =
      incorporate_cached_goals(sketch, diagnostics, store);
  CHECK(result.spliced == 0);
  CHECK(result.resolved.empty());
  CHECK(result.violations.empty());
  REQUIRE(result.unresolved.size() == 2);
  CHECK_FALSE(result.unresolved[0].cached.has_value());
  CHECK_FALSE(result.unresolved[1].cached.has_value());
  CHECK(render(result.sketch) == render(sketch));
}

TEST_CASE("incorporate_cached_goals reports goal/site count mismatches") {
  const ProofSketch sketch = parse_sketch(kTwoHoleDoc);
  Diagnostics diagnostics;
  diagnostics.compiles = true;
  diagnostics.open_goals = {"⊢ 2+3 = 5"};  // two placeholder sites exist
  PopulationStore store;
  store.goal_store(goal_key("⊢ 2+3 = 5"),
                   ProverOutcome{Verdict::kProved, "eval", ""});

  const Incorporation result =
      incorporate_cached_goals(sketch, diagnostics, store);
  CHECK(result.spliced == 0);
  REQUIRE(result.violations.size() == 1);
  CHECK(starts_with(result.violations.front(), "GoalSiteMismatch"));
  CHECK(result.violations.front().find("1 open goals vs 2 placeholder") !=
        std::string::npos);
  REQUIRE(result.unresolved.size() == 1);
  CHECK(result.unresolved.front().key == goal_key("⊢ 2+3 = 5"));
  CHECK(render(result.sketch) == render(sketch));
}

TEST_CASE("incorporate_cached_goals refuses to splice into frozen text") {
  const ProofSketch sketch = parse_sketch(
      "lemma f : 1 + 1 = 2 := sorry\n"
      "-- EVOLVE-BLOCK-START\n"
      "-- nothing here yet\n"
      "-- EVOLVE-BLOCK-END\n");
  const Diagnostics diagnostics = toy::toy_check(render(sketch));
  REQUIRE(diagnostics.compiles);
  REQUIRE(diagnostics.open_goals.size() == 1);

  PopulationStore store;
  const std::string key = goal_key(diagnostics.open_goals[0]);
  store.goal_store(key, ProverOutcome{Verdict::kProved, "eval", ""});

  const Incorporation result =
      incorporate_cached_goals(sketch, diagnostics, store);
  CHECK(result.spliced == 0);
  REQUIRE(result.violations.size() == 1);
  CHECK(starts_with(result.violations.front(), "SpliceOutsideEditable"));
  CHECK(result.violations.front().find(key.substr(0, 12)) !=
        std::string::npos);
  REQUIRE(result.unresolved.size() == 1);
  REQUIRE(result.unresolved.front().cached.has_value());
  CHECK(result.unresolved.front().cached->verdict == Verdict::kProved);
  CHECK(render(result.sketch) == render(sketch));
}

TEST_CASE("final_verify accepts a fully closed document") {
  const ProofSketch sketch = parse_sketch("lemma a : 2 + 2 = 4 := eval\n");
  toy::ToyChecker checker;
  const ValidationVerdict verdict = final_verify(sketch, checker);
  CHECK(verdict.pass);
  CHECK(verdict.reasons.empty());
}

TEST_CASE("final_verify reports open goals and remaining placeholders") {
  const ProofSketch sketch = parse_sketch(kTwoHoleDoc);
  toy::ToyChecker checker;
  const ValidationVerdict verdict = final_verify(sketch, checker);
  CHECK_FALSE(verdict.pass);
  REQUIRE(verdict.reasons.size() == 2);
  CHECK(starts_with(verdict.reasons[0], "OpenGoals"));
  CHECK(verdict.reasons[0].find("2 goals remain") != std::string::npos);
  CHECK(starts_with(verdict.reasons[1], "SorryRemains"));
  CHECK(verdict.reasons[1].find("2 placeholder") != std::string::npos);
}

TEST_CASE("final_verify counts placeholder tokens even inside comments") {
  // The placeholder scan is lexical and deliberately conservative: a
  // standalone token in a comment still blocks acceptance.
  const ProofSketch sketch = parse_sketch(
      "-- a sorry note left in prose\n"
      "lemma a : 2 + 2 = 4 := eval\n");
  toy::ToyChecker checker;
  const ValidationVerdict verdict = final_verify(sketch, checker);
  CHECK_FALSE(verdict.pass);
  REQUIRE(verdict.reasons.size() == 1);
  CHECK(starts_with(verdict.reasons.front(), "SorryRemains"));
}

TEST_CASE("final_verify reports compile errors without a goal count") {
  const ProofSketch sketch = parse_sketch("lemma a : 1 + 1 = 3 := eval\n");
  toy::ToyChecker checker;
  const ValidationVerdict verdict = final_verify(sketch, checker);
  CHECK_FALSE(verdict.pass);
  REQUIRE(verdict.reasons.size() == 1);
  CHECK(starts_with(verdict.reasons.front(), "CompileError"));
}

TEST_CASE("final_verify rejects disallowed tokens outside comments") {
  const ProofSketch sketch = parse_sketch("lemma a : 2 + 2 = 4 := eval\n");
  toy::ToyChecker checker;
  const ValidationVerdict verdict =
      final_verify(sketch, checker, kDefaultPlaceholder, {"eval"});
  CHECK_FALSE(verdict.pass);
  REQUIRE(verdict.reasons.size() == 1);
  CHECK(verdict.reasons.front() ==
        "DisallowedToken: 'eval' present outside comments");
}

TEST_CASE("final_verify ignores disallowed tokens inside comments") {
  const ProofSketch sketch = parse_sketch(
      "-- uses sorryAx internally, says the prose\n"
      "lemma a : 2 + 2 = 4 := eval\n");
  toy::ToyChecker checker;
  const ValidationVerdict verdict = final_verify(sketch, checker);
  CHECK(verdict.pass);
}

TEST_CASE("final_verify token scan respects identifier boundaries") {
  // "sorryAx" embedded in a longer identifier is not a standalone token.
  const ProofSketch sketch =
      parse_sketch("lemma sorryAxiom : 1 + 0 = 1 := eval\n");
  toy::ToyChecker checker;
  const ValidationVerdict verdict = final_verify(sketch, checker);
  CHECK(verdict.pass);
}

}  // namespace
}  // namespace nexus
