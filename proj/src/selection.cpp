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

#include "nexus/selection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "nexus/error.hpp"
#include "nexus/rng.hpp"

namespace nexus {
namespace {

// Rated views sorted by elo descending (ties to older records), truncated
// to the elite size. One snapshot, so scores are internally consistent.
std::vector<RatingView> elite_views(PopulationStore& store,
                                    std::size_t elite_size) {
  std::vector<RatingView> views = store.rating_views();
  std::erase_if(views, [](const RatingView& v) { return !v.rated; });
  std::sort(views.begin(), views.end(),
            [](const RatingView& a, const RatingView& b) {
              if (a.elo != b.elo) return a.elo > b.elo;
              if (a.created_at != b.created_at) {
                return a.created_at < b.created_at;
              }
              return a.id < b.id;
            });
  if (views.size() > elite_size) views.resize(elite_size);
  return views;
}

std::string render_feedback(const std::map<std::string, ProverOutcome>& goals) {
  std::string out;
  for (const auto& [key, outcome] : goals) {
    out += "  - goal ";
    out += key.substr(0, 12);
    out += ": ";
    out += verdict_name(outcome.verdict);
    if (!outcome.feedback.empty()) {
      out += " (";
      out += outcome.feedback;
      out += ")";
    }
    out += "\n";
  }
  if (out.empty()) out = "  (no prover feedback)\n";
  return out;
}

void replace_all(std::string& text, const std::string& variable,
                 const std::string& value) {
  for (std::size_t at = text.find(variable); at != std::string::npos;
       at = text.find(variable, at + value.size())) {
    text.replace(at, variable.size(), value);
  }
}

}  // namespace

std::vector<std::pair<std::string, double>>
PUCBConfig::default_directives() {
  return {
      {"decompose unsolved goals", 0.25},
      {"combine ideas from prior attempts", 0.25},
      {"try a completely new approach", 0.25},
      {"", 0.25},  // no directive
  };
}

std::vector<double> pucb_scores(
    const std::vector<std::pair<double, std::uint64_t>>& candidates,
    std::uint64_t total_visits, double c) {
  if (candidates.empty()) {
    throw Error(ErrorCode::kInvalidRequest, "no candidates to score");
  }
  double lo = candidates.front().first;
  double hi = lo;
  for (const auto& [elo, visits] : candidates) {
    lo = std::min(lo, elo);
    hi = std::max(hi, elo);
  }
  const double span = hi - lo;
  const double bonus_scale = c * std::sqrt(static_cast<double>(total_visits));
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (const auto& [elo, visits] : candidates) {
    // All-equal elos normalize to q=1, leaving exploration to decide.
    const double q = span > 0.0 ? (elo - lo) / span : 1.0;
    scores.push_back(q + bonus_scale / static_cast<double>(visits + 1));
  }
  return scores;
}

std::uint64_t select_parent(PopulationStore& store, const PUCBConfig& cfg) {
  const std::vector<RatingView> elite = elite_views(store, cfg.elite_size);
  if (elite.empty()) {
    throw Error(ErrorCode::kNoRatedSketch,
                "no rated sketch available for selection");
  }
  std::uint64_t total_visits = 0;
  std::vector<std::pair<double, std::uint64_t>> candidates;
  candidates.reserve(elite.size());
  for (const RatingView& view : elite) {
    total_visits += view.visits;
    candidates.emplace_back(view.elo, view.visits);
  }
  const std::vector<double> scores =
      pucb_scores(candidates, total_visits, cfg.exploration_c);

  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best] ||
        (scores[i] == scores[best] && elite[i].id < elite[best].id)) {
      best = i;
    }
  }
  const std::uint64_t winner = elite[best].id;
  store.increment_visits(winner);
  return winner;
}

std::vector<std::uint64_t> pick_inspirations(PopulationStore& store,
                                             std::uint64_t root_id, int n) {
  std::vector<std::uint64_t> out;
  if (n <= 0) return out;
  // Ask for one extra slot in case the root itself ranks in the top n.
  for (const std::uint64_t id : store.top_by_elo(static_cast<std::size_t>(n) + 1)) {
    if (id == root_id) continue;
    out.push_back(id);
    if (out.size() == static_cast<std::size_t>(n)) break;
  }
  return out;
}

PromptBundle assemble_prompt(const SketchRecord& root,
                             const std::vector<SketchRecord>& inspirations,
                             const std::string& prompt_template,
                             const PUCBConfig& cfg, std::uint64_t seed) {
  if (prompt_template.find("{code}") == std::string::npos) {
    throw Error(ErrorCode::kMissingTemplateVariable,
                "prompt template lacks required variable {code}");
  }
  // Validate variables on the template itself: substituted code may
  // legitimately contain braces, the template may not.
  for (std::size_t at = prompt_template.find('{'); at != std::string::npos;
       at = prompt_template.find('{', at + 1)) {
    const std::size_t close = prompt_template.find('}', at + 1);
    if (close == std::string::npos) break;
    const std::string inner = prompt_template.substr(at + 1, close - at - 1);
    const bool identifier =
        !inner.empty() &&
        std::all_of(inner.begin(), inner.end(), [](unsigned char c) {
          return std::isalnum(c) || c == '_';
        });
    if (identifier && inner != "code" && inner != "plan" &&
        inner != "inspirations" && inner != "directive") {
      throw Error(ErrorCode::kMissingTemplateVariable,
                  "unknown template variable {" + inner + "}");
    }
  }
  double total_weight = 0.0;
  for (const auto& [phrase, weight] : cfg.directive_weights) {
    total_weight += weight;
  }
  if (cfg.directive_weights.empty() || std::abs(total_weight - 1.0) > 1e-6) {
    throw Error(ErrorCode::kConfigError,
                "directive weights must sum to 1");
  }

  PromptBundle bundle;
  bundle.root_id = root.id;

  Rng rng(seed);
  const double u = rng.uniform();
  double cumulative = 0.0;
  bundle.directive = cfg.directive_weights.back().first;
  for (const auto& [phrase, weight] : cfg.directive_weights) {
    cumulative += weight;
    if (u < cumulative) {
      bundle.directive = phrase;
      break;
    }
  }

  std::string inspiration_text;
  for (const SketchRecord& record : inspirations) {
    bundle.inspiration_ids.push_back(record.id);
    inspiration_text += "### Inspiration sketch " + std::to_string(record.id) +
                        " (Elo " + std::to_string(record.rating.elo) + ")\n";
    if (!record.plan_summary.empty()) {
      inspiration_text += "Plan: " + record.plan_summary + "\n";
    }
    inspiration_text += "```\n" + render(record.sketch) + "```\n";
    inspiration_text += "Prover feedback:\n";
    inspiration_text += render_feedback(record.goal_feedback);
  }
  if (inspiration_text.empty()) inspiration_text = "(none)\n";

  std::string prompt = prompt_template;
  replace_all(prompt, "{code}", render(root.sketch));
  replace_all(prompt, "{plan}", root.plan_summary);
  replace_all(prompt, "{inspirations}", inspiration_text);
  replace_all(prompt, "{directive}", bundle.directive);
  bundle.rendered_prompt = std::move(prompt);
  return bundle;
}

}  // namespace nexus
