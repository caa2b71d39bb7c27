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

#ifndef NEXUS_SELECTION_HPP_
#define NEXUS_SELECTION_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nexus/population.hpp"

namespace nexus {

struct PUCBConfig {
  double exploration_c = 0.2;
  std::size_t elite_size = 64;
  int n_inspirations = 2;
  // Ordered so directive sampling is deterministic; probabilities sum to 1.
  std::vector<std::pair<std::string, double>> directive_weights =
      default_directives();

  static std::vector<std::pair<std::string, double>> default_directives();
};

struct PromptBundle {
  std::uint64_t root_id = 0;
  std::vector<std::uint64_t> inspiration_ids;
  std::string rendered_prompt;
  std::string directive;
};

// P-UCB scores: q is the candidate's elo min-max normalized within the set
// (1 for everyone when all elos are equal), plus the exploration bonus
// c * sqrt(total_visits) / (visits + 1).
std::vector<double> pucb_scores(
    const std::vector<std::pair<double, std::uint64_t>>& candidates,
    std::uint64_t total_visits, double c);

// Picks the elite (top elite_size by elo among rated records), scores them
// with P-UCB using the elite's summed visits, returns the argmax (ties go
// to the lowest id) and increments its visit count atomically.
// Throws NoRatedSketch when nothing is rated yet.
std::uint64_t select_parent(PopulationStore& store, const PUCBConfig& cfg);

// Fills the prompt template: {code} (required) with the root's rendered
// sketch, {plan} with its plan summary, {inspirations} with one section per
// inspiration (elo line, code, per-goal prover feedback), {directive} with
// one phrase sampled from directive_weights. Any other brace variable in
// the template raises MissingTemplateVariable.
PromptBundle assemble_prompt(const SketchRecord& root,
                             const std::vector<SketchRecord>& inspirations,
                             const std::string& prompt_template,
                             const PUCBConfig& cfg, std::uint64_t seed);

// The n highest-elo rated records excluding the root: the default
// inspiration choice.
std::vector<std::uint64_t> pick_inspirations(PopulationStore& store,
                                             std::uint64_t root_id, int n);

}  // namespace nexus

#endif  // NEXUS_SELECTION_HPP_
