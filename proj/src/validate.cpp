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

#include <cctype>

#include "nexus/digest.hpp"
#include "nexus/error.hpp"
#include "nexus/toy.hpp"

namespace nexus {
namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

// Standalone-token occurrence check over plain text.
bool contains_token(std::string_view text, std::string_view token) {
  if (token.empty()) return false;
  for (std::size_t at = text.find(token); at != std::string_view::npos;
       at = text.find(token, at + 1)) {
    const bool left_clear = at == 0 || !is_ident_char(text[at - 1]);
    const std::size_t after = at + token.size();
    const bool right_clear =
        after == text.size() || !is_ident_char(text[after]);
    if (left_clear && right_clear) return true;
  }
  return false;
}

}  // namespace

ValidationVerdict sandbox_check(const ProofSketch& original,
                                const ProofSketch& candidate,
                                Checker& checker) {
  ValidationVerdict verdict;
  const std::string original_digest = protected_digest(original);
  if (protected_digest(candidate) != original_digest) {
    verdict.reasons.push_back(
        "StatementAltered: frozen bytes differ from the original");
  }

  const std::string rendered = render(candidate);
  // Re-parse the rendered text: edits cannot touch the in-memory frozen
  // regions, but they can insert marker syntax that would change which
  // bytes are frozen for every later consumer of the file.
  try {
    const ProofSketch reparsed = parse_sketch(rendered);
    if (protected_digest(reparsed) != original_digest) {
      verdict.reasons.push_back(
          "StatementAltered: edits changed the marker structure of the file");
    }
  } catch (const Error& e) {
    verdict.reasons.push_back(
        std::string("StatementAltered: rendered text no longer parses (") +
        e.what() + ")");
  }

  const Diagnostics diagnostics = checker.check(rendered);
  if (!diagnostics.compiles) {
    std::string reason = "CompileError";
    if (!diagnostics.errors.empty()) {
      reason += ": " + diagnostics.errors.front().location + " " +
                diagnostics.errors.front().message;
    }
    verdict.reasons.push_back(std::move(reason));
  }

  verdict.pass = verdict.reasons.empty();
  return verdict;
}

Incorporation incorporate_cached_goals(const ProofSketch& sketch,
                                       const Diagnostics& diagnostics,
                                       PopulationStore& store,
                                       std::string_view placeholder) {
  Incorporation result;
  result.sketch = sketch;
  if (diagnostics.open_goals.empty()) return result;

  const std::vector<SorrySite> sites = find_sorries(sketch, placeholder);
  if (sites.size() != diagnostics.open_goals.size()) {
    result.violations.push_back(
        "GoalSiteMismatch: " +
        std::to_string(diagnostics.open_goals.size()) + " open goals vs " +
        std::to_string(sites.size()) + " placeholder tokens");
    for (const std::string& goal : diagnostics.open_goals) {
      result.unresolved.push_back(
          UnresolvedGoal{goal_key(goal), goal, std::nullopt});
    }
    return result;
  }

  // Splice from the last goal backwards so earlier site offsets stay valid.
  std::vector<UnresolvedGoal> unresolved_reversed;
  std::vector<std::pair<std::string, ProverOutcome>> resolved_reversed;
  for (std::size_t i = diagnostics.open_goals.size(); i-- > 0;) {
    const std::string& goal = diagnostics.open_goals[i];
    const std::string key = goal_key(goal);
    const std::optional<GoalCacheEntry> entry = store.goal_lookup(key);
    if (!entry) {
      unresolved_reversed.push_back(UnresolvedGoal{key, goal, std::nullopt});
      continue;
    }
    if (entry->outcome.verdict == Verdict::kProved) {
      if (result.sketch.regions[sites[i].region_index].kind ==
          RegionKind::kFrozen) {
        result.violations.push_back(
            "SpliceOutsideEditable: proof for goal " + key.substr(0, 12) +
            " targets frozen text");
        unresolved_reversed.push_back(
            UnresolvedGoal{key, goal, entry->outcome});
        continue;
      }
      result.sketch = splice_site(result.sketch, sites[i],
                                  placeholder.size(), entry->outcome.script);
      resolved_reversed.emplace_back(key, entry->outcome);
      ++result.spliced;
    } else {
      unresolved_reversed.push_back(UnresolvedGoal{key, goal, entry->outcome});
    }
  }
  result.unresolved.assign(unresolved_reversed.rbegin(),
                           unresolved_reversed.rend());
  result.resolved.assign(resolved_reversed.rbegin(), resolved_reversed.rend());
  return result;
}

ValidationVerdict final_verify(const ProofSketch& sketch, Checker& checker,
                               std::string_view placeholder,
                               const std::vector<std::string>& disallowed_tokens) {
  ValidationVerdict verdict;
  const std::string rendered = render(sketch);

  const Diagnostics diagnostics = checker.check(rendered);
  if (!diagnostics.compiles) {
    std::string reason = "CompileError";
    if (!diagnostics.errors.empty()) {
      reason += ": " + diagnostics.errors.front().location + " " +
                diagnostics.errors.front().message;
    }
    verdict.reasons.push_back(std::move(reason));
  } else if (!diagnostics.open_goals.empty()) {
    verdict.reasons.push_back(
        "OpenGoals: " + std::to_string(diagnostics.open_goals.size()) +
        " goals remain");
  }

  const std::size_t sorries = find_sorries(sketch, placeholder).size();
  if (sorries > 0) {
    verdict.reasons.push_back("SorryRemains: " + std::to_string(sorries) +
                              " placeholder tokens present");
  }

  // Comment-aware lexical scan, independent of the checker's verdict.
  std::string code_only;
  try {
    code_only = toy::strip_comments(rendered);
  } catch (const toy::ParseFailure&) {
    code_only = rendered;  // unterminated comment: scan everything
  }
  for (const std::string& token : disallowed_tokens) {
    if (contains_token(code_only, token)) {
      verdict.reasons.push_back("DisallowedToken: '" + token +
                                "' present outside comments");
    }
  }

  verdict.pass = verdict.reasons.empty();
  return verdict;
}

}  // namespace nexus
