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

#include "nexus/rating.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "nexus/error.hpp"
#include "nexus/rng.hpp"

namespace nexus {
namespace {

// Index players by structural position for the sampler.
struct IndexedModel {
  std::vector<std::uint64_t> players;               // position -> id
  std::map<std::uint64_t, std::size_t> position;    // id -> position
  std::vector<std::vector<std::size_t>> matches;    // rankings as positions
  std::vector<double> lambda;                       // current strengths
  std::vector<double> rate;                         // current r
};

IndexedModel index_model(const PlackettLuceModel& model) {
  IndexedModel indexed;
  indexed.players = model.players;
  for (std::size_t i = 0; i < indexed.players.size(); ++i) {
    const auto [it, inserted] =
        indexed.position.emplace(indexed.players[i], i);
    if (!inserted) {
      throw Error(ErrorCode::kInvalidRequest,
                  "duplicate player id " + std::to_string(indexed.players[i]) +
                      " in model");
    }
  }
  indexed.matches.reserve(model.matches.size());
  for (const auto& ranking : model.matches) {
    if (ranking.size() < 2) {
      throw Error(ErrorCode::kInvalidRequest,
                  "a ranking needs at least two players");
    }
    std::vector<std::size_t> positions;
    positions.reserve(ranking.size());
    std::set<std::uint64_t> seen;
    for (const std::uint64_t id : ranking) {
      const auto it = indexed.position.find(id);
      if (it == indexed.position.end()) {
        throw Error(ErrorCode::kUnknownIdInMatch,
                    "match references id " + std::to_string(id) +
                        " missing from the model");
      }
      if (!seen.insert(id).second) {
        throw Error(ErrorCode::kInvalidRequest,
                    "ranking repeats id " + std::to_string(id));
      }
      positions.push_back(it->second);
    }
    indexed.matches.push_back(std::move(positions));
  }
  indexed.lambda.resize(indexed.players.size());
  indexed.rate.resize(indexed.players.size());
  for (std::size_t i = 0; i < indexed.players.size(); ++i) {
    const std::uint64_t id = indexed.players[i];
    const auto s = model.strengths.find(id);
    const auto r = model.rates.find(id);
    indexed.lambda[i] = s == model.strengths.end() ? 1.0 : s->second;
    indexed.rate[i] = r == model.rates.end() ? 1.0 : r->second;
    if (indexed.lambda[i] <= 0.0 || indexed.rate[i] <= 0.0) {
      throw Error(ErrorCode::kNonPositiveStrength,
                  "strengths and rates must be positive");
    }
  }
  return indexed;
}

// One full sweep: latent exponentials for every match stage, then lambda
// for every player, then r for every player.
void gibbs_sweep(IndexedModel& model, Rng& rng) {
  const std::size_t n = model.players.size();
  std::vector<double> z_sum(n, 0.0);   // sum of z over stages containing i
  std::vector<double> wins(n, 0.0);    // non-last placements of i

  for (const auto& ranking : model.matches) {
    const std::size_t k = ranking.size();
    // Suffix sums of current strengths over the remaining pool.
    double pool = 0.0;
    for (const std::size_t position : ranking) pool += model.lambda[position];
    for (std::size_t stage = 0; stage + 1 < k; ++stage) {
      const double z = rng.exponential(pool);
      for (std::size_t j = stage; j < k; ++j) z_sum[ranking[j]] += z;
      wins[ranking[stage]] += 1.0;
      pool -= model.lambda[ranking[stage]];
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    model.lambda[i] = rng.gamma(1.0 + wins[i], model.rate[i] + z_sum[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    model.rate[i] = rng.gamma(2.0, 1.0 + model.lambda[i]);
  }
}

}  // namespace

PlackettLuceModel make_model(
    const std::vector<std::vector<std::uint64_t>>& matches,
    const std::vector<std::uint64_t>& extra_players) {
  PlackettLuceModel model;
  model.matches = matches;
  std::set<std::uint64_t> seen;
  for (const auto& ranking : matches) {
    for (const std::uint64_t id : ranking) {
      if (seen.insert(id).second) model.players.push_back(id);
    }
  }
  for (const std::uint64_t id : extra_players) {
    if (seen.insert(id).second) model.players.push_back(id);
  }
  for (const std::uint64_t id : model.players) {
    model.strengths[id] = 1.0;
    model.rates[id] = 1.0;
  }
  return model;
}

std::map<std::uint64_t, std::vector<double>> gibbs_posterior(
    const PlackettLuceModel& model, const GibbsConfig& cfg) {
  if (model.matches.empty()) {
    throw Error(ErrorCode::kEmptyMatchLog, "no matches to fit");
  }
  if (cfg.n_samples < 1 || cfg.burn_in < 0 || cfg.thinning < 1) {
    throw Error(ErrorCode::kInvalidRequest,
                "gibbs config requires n_samples >= 1, burn_in >= 0, "
                "thinning >= 1");
  }
  IndexedModel indexed = index_model(model);
  Rng rng(cfg.seed);

  std::map<std::uint64_t, std::vector<double>> samples;
  for (const std::uint64_t id : indexed.players) {
    samples[id].reserve(cfg.n_samples);
  }
  for (int sweep = 0; sweep < cfg.burn_in; ++sweep) gibbs_sweep(indexed, rng);
  for (int sweep = 0; sweep < cfg.n_samples; ++sweep) {
    gibbs_sweep(indexed, rng);
    for (std::size_t i = 0; i < indexed.players.size(); ++i) {
      samples[indexed.players[i]].push_back(indexed.lambda[i]);
    }
  }
  return samples;
}

double elo_from_mean(double strength_mean) {
  if (!(strength_mean > 0.0)) {
    throw Error(ErrorCode::kNonPositiveStrength,
                "strength mean must be positive");
  }
  return 1200.0 + 400.0 * std::log10(strength_mean);
}

RatingState summarize_samples(std::vector<double> samples) {
  RatingState state;
  if (samples.empty()) return state;
  double sum = 0.0;
  for (const double s : samples) sum += s;
  const double mean = sum / static_cast<double>(samples.size());
  double ss = 0.0;
  for (const double s : samples) ss += (s - mean) * (s - mean);
  const double var =
      samples.size() > 1 ? ss / static_cast<double>(samples.size() - 1) : 0.0;
  state.strength_mean = mean;
  state.strength_var = var;
  state.elo = elo_from_mean(mean);
  state.strength_samples = std::move(samples);
  return state;
}

std::vector<std::uint64_t> thompson_select(const std::vector<RatingView>& views,
                                           int P, const GibbsConfig& cfg) {
  if (views.size() < 2) {
    throw Error(ErrorCode::kPopulationTooSmall,
                "thompson selection needs at least two records");
  }
  if (P < 2) {
    throw Error(ErrorCode::kInvalidRequest, "match size P must be >= 2");
  }
  Rng rng(cfg.seed);

  // Thinned sample count per view (0 when the record was never refreshed).
  std::vector<std::size_t> thinned(views.size(), 0);
  for (std::size_t i = 0; i < views.size(); ++i) {
    const std::size_t n = views[i].strength_samples.size();
    if (n > 0) thinned[i] = (n - 1) / static_cast<std::size_t>(cfg.thinning) + 1;
  }

  std::vector<std::uint64_t> selected;
  std::set<std::uint64_t> chosen;
  for (int draw = 0; draw < P; ++draw) {
    // One uniform per draw: it indexes the thinned chains jointly (samples
    // from one sweep stay together) and doubles as the Lomax prior draw
    // u/(1-u) for records without samples.
    const double u = rng.uniform();
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < views.size(); ++i) {
      double value;
      if (thinned[i] > 0) {
        std::size_t k = static_cast<std::size_t>(
            u * static_cast<double>(thinned[i]));
        if (k >= thinned[i]) k = thinned[i] - 1;
        value = views[i]
                    .strength_samples[k * static_cast<std::size_t>(cfg.thinning)];
      } else {
        value = u / (1.0 - u);
      }
      if (value > best) {
        best = value;
        best_index = i;
      }
    }
    const std::uint64_t id = views[best_index].id;
    if (chosen.insert(id).second) selected.push_back(id);
  }

  // Refill with the most uncertain of the not-yet-chosen records.
  const std::size_t want = std::min<std::size_t>(P, views.size());
  if (selected.size() < want) {
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < views.size(); ++i) {
      if (chosen.count(views[i].id) == 0) rest.push_back(i);
    }
    std::stable_sort(rest.begin(), rest.end(),
                     [&](std::size_t a, std::size_t b) {
                       const double va =
                           views[a].strength_samples.empty()
                               ? std::numeric_limits<double>::infinity()
                               : views[a].strength_var;
                       const double vb =
                           views[b].strength_samples.empty()
                               ? std::numeric_limits<double>::infinity()
                               : views[b].strength_var;
                       return va > vb;
                     });
    for (const std::size_t i : rest) {
      if (selected.size() >= want) break;
      selected.push_back(views[i].id);
    }
  }
  return selected;
}

std::vector<std::uint64_t> break_ties(const TiedRanking& raw_ranking,
                                      const PlackettLuceModel& model,
                                      std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint64_t> strict;
  for (const auto& group : raw_ranking) {
    if (group.size() == 1) {
      strict.push_back(group.front());
      continue;
    }
    // Exponential race: arrival time Exp(lambda_i); sorting by arrival
    // realizes the Plackett-Luce probabilities for the group.
    std::vector<std::pair<double, std::uint64_t>> race;
    race.reserve(group.size());
    for (const std::uint64_t id : group) {
      const auto it = model.strengths.find(id);
      const double lambda = it == model.strengths.end() ? 1.0 : it->second;
      race.emplace_back(rng.exponential(lambda), id);
    }
    std::stable_sort(race.begin(), race.end(),
                     [](const auto& a, const auto& b) {
                       return a.first < b.first;
                     });
    for (const auto& [time, id] : race) strict.push_back(id);
  }
  return strict;
}

}  // namespace nexus
