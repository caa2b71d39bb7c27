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

#ifndef NEXUS_VALIDATE_HPP_
#define NEXUS_VALIDATE_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nexus/backends.hpp"
#include "nexus/population.hpp"
#include "nexus/sketch.hpp"

namespace nexus {

// Result of a validation stage. Reasons are human-readable and begin with a
// stable descriptor: StatementAltered, CompileError, OpenGoals,
// SorryRemains, DisallowedToken, GoalSiteMismatch, SpliceOutsideEditable.
struct ValidationVerdict {
  bool pass = false;
  std::vector<std::string> reasons;
};

// Passes iff the candidate's frozen bytes are identical to the original's
// and the candidate compiles (open goals and placeholders allowed). The
// candidate is re-parsed from its rendered text, so an edit that smuggles
// marker syntax into an editable region (changing which bytes count as
// frozen) is caught as StatementAltered.
ValidationVerdict sandbox_check(const ProofSketch& original,
                                const ProofSketch& candidate,
                                Checker& checker);

struct UnresolvedGoal {
  std::string key;
  std::string text;
  // Cache entry found for the goal, when any: disproved or failed entries
  // are never spliced, and a proved entry may be unspliceable (frozen site).
  std::optional<ProverOutcome> cached;
};

struct Incorporation {
  ProofSketch sketch;
  std::vector<UnresolvedGoal> unresolved;  // document order
  // Goals whose cached proof was spliced in, with the cache outcome
  // (document order). Lets callers keep per-goal feedback complete.
  std::vector<std::pair<std::string, ProverOutcome>> resolved;
  std::vector<std::string> violations;
  int spliced = 0;
};

// Consults the goal cache for every open goal (keyed by the normalized goal
// text) and splices proved scripts over the corresponding placeholder
// tokens. Goals pair with placeholder sites by document order; a count
// mismatch is reported as a GoalSiteMismatch violation and nothing is
// spliced. Proved entries whose site lies in frozen text are reported as
// SpliceOutsideEditable and left unresolved.
Incorporation incorporate_cached_goals(
    const ProofSketch& sketch, const Diagnostics& diagnostics,
    PopulationStore& store,
    std::string_view placeholder = kDefaultPlaceholder);

// Final acceptance gate: compiles, zero open goals, zero placeholder
// tokens, and no disallowed token outside comments.
ValidationVerdict final_verify(
    const ProofSketch& sketch, Checker& checker,
    std::string_view placeholder = kDefaultPlaceholder,
    const std::vector<std::string>& disallowed_tokens = {"sorryAx"});

}  // namespace nexus

#endif  // NEXUS_VALIDATE_HPP_
