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

#ifndef NEXUS_RATING_HPP_
#define NEXUS_RATING_HPP_

#include <cstdint>
#include <map>
#include <vector>

#include "nexus/population.hpp"

namespace nexus {

// Plackett-Luce over strict rankings with a hierarchical Gamma prior:
//
//   p(ranking rho | lambda) = prod_j lambda_{rho_j} / sum_{k >= j} lambda_{rho_k}
//   p(lambda_s | r_s) = Gamma(1, r_s),   p(r_s) = Gamma(1, 1)
//
// Inference uses the conditionally conjugate augmentation: one latent
// exponential per match stage, then Gamma updates for every lambda_s and
// r_s. Marginally the prior on each lambda_s is Lomax(1,1), i.e.
// p(lambda) = (1+lambda)^-2, sampled directly as u/(1-u).
struct PlackettLuceModel {
  // Update order for the sampler. Keeping players in structural order
  // (first appearance across matches, then any match-less extras) makes
  // posterior draws exactly label-invariant: relabeling ids permutes the
  // sample streams with them.
  std::vector<std::uint64_t> players;
  std::map<std::uint64_t, double> strengths;  // current lambda, default 1.0
  std::map<std::uint64_t, double> rates;      // current r, default 1.0
  std::vector<std::vector<std::uint64_t>> matches;  // best first, strict
};

// Convenience constructor: players in first-appearance order over the
// matches, then the extras (ids not present in any match) in given order;
// all strengths and rates initialized to 1.
PlackettLuceModel make_model(
    const std::vector<std::vector<std::uint64_t>>& matches,
    const std::vector<std::uint64_t>& extra_players = {});

struct GibbsConfig {
  int n_samples = 1000;  // kept samples (I)
  int burn_in = 200;     // discarded sweeps (B)
  int thinning = 25;     // stride for Thompson draws
  std::uint64_t seed = 0;
};

// Runs burn_in + n_samples full sweeps and returns, for each player,
// exactly n_samples posterior draws of lambda. Deterministic given the
// seed. Players absent from every match receive prior draws (their
// conditionals never see data), which is exactly what Thompson sampling
// wants for unrated records.
// Throws EmptyMatchLog, UnknownIdInMatch, or InvalidRequest (bad config,
// malformed ranking).
std::map<std::uint64_t, std::vector<double>> gibbs_posterior(
    const PlackettLuceModel& model, const GibbsConfig& cfg);

// 1200 + 400*log10(strength_mean). Throws NonPositiveStrength.
double elo_from_mean(double strength_mean);

// Summarizes posterior samples into a RatingState (mean, unbiased
// variance, elo of the mean). `rated` is set by the caller.
RatingState summarize_samples(std::vector<double> samples);

// Thompson selection of up to P distinct records. Each draw takes one
// thinned posterior sample per record (records without samples fall back
// to a prior Lomax draw) and picks the argmax; duplicates are removed and
// the selection refilled with the not-yet-chosen records of highest
// posterior variance (records without samples count as most uncertain).
// Deterministic given cfg.seed.
// Throws PopulationTooSmall (fewer than two records) or InvalidRequest.
std::vector<std::uint64_t> thompson_select(const std::vector<RatingView>& views,
                                           int P, const GibbsConfig& cfg);

// A possibly-tied ranking: groups ordered best first; members of one group
// are tied.
using TiedRanking = std::vector<std::vector<std::uint64_t>>;

// Resolves ties by an exponential race with the current strengths (missing
// ids race at strength 1), which realizes the Plackett-Luce choice
// probabilities. Deterministic given seed.
std::vector<std::uint64_t> break_ties(const TiedRanking& raw_ranking,
                                      const PlackettLuceModel& model,
                                      std::uint64_t seed);

}  // namespace nexus

#endif  // NEXUS_RATING_HPP_
