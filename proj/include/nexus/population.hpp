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

#ifndef NEXUS_POPULATION_HPP_
#define NEXUS_POPULATION_HPP_

#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "nexus/backends.hpp"
#include "nexus/journal.hpp"
#include "nexus/sketch.hpp"

namespace nexus {

// Posterior rating summary for one record. The defaults are chosen so the
// documented invariants hold even before the first refresh: with no samples
// the mean defaults to 1 and elo to 1200 (= 1200 + 400*log10(1)).
struct RatingState {
  std::vector<double> strength_samples;
  double strength_mean = 1.0;
  double strength_var = 0.0;
  double elo = 1200.0;
  bool rated = false;  // true once the record appeared in a fitted match
};

struct SketchRecord {
  std::uint64_t id = 0;  // 0 on insert = assign the next free id
  ProofSketch sketch;
  std::optional<std::uint64_t> parent_id;
  std::string plan_summary;
  std::map<std::string, ProverOutcome> goal_feedback;  // goal_key -> outcome
  std::uint64_t visits = 0;
  RatingState rating;
  std::uint64_t created_at = 0;  // logical tick, assigned by the store
};

struct MatchResult {
  std::vector<std::uint64_t> players;  // best first, strict, distinct, >= 2
  std::string raw_ranking;             // the rater's raw text (may have ties)
  std::string rater_id;
};

struct GoalCacheEntry {
  std::string goal_key;
  ProverOutcome outcome;
  std::uint64_t hits = 0;
};

// Read-only rating snapshot used by selection and Thompson sampling.
struct RatingView {
  std::uint64_t id = 0;
  double elo = 1200.0;
  double strength_mean = 1.0;
  double strength_var = 0.0;
  std::vector<double> strength_samples;
  std::uint64_t visits = 0;
  bool rated = false;
  std::uint64_t created_at = 0;
};

// Shared, linearizable store of sketch records, match results, and the
// content-addressed goal cache. Every public operation takes the store
// mutex, so workers see a consistent view; the goal-reservation pair
// additionally guarantees at most one in-flight prover dispatch per goal.
class PopulationStore {
 public:
  // The journal, when given, receives insert/match/goal/rating events.
  explicit PopulationStore(Journal* journal = nullptr);

  // --- sketch records ---

  // Throws DuplicateId or MissingParent. Assigns id (when 0) and
  // created_at; returns the id.
  std::uint64_t insert_sketch(SketchRecord record);

  // Copy of the record; throws UnknownRecord.
  SketchRecord get(std::uint64_t id) const;

  std::vector<std::uint64_t> ids() const;  // insertion order
  std::size_t size() const;

  // Atomic read-modify-write; returns the new count. Throws UnknownRecord.
  std::uint64_t increment_visits(std::uint64_t id);

  // --- matches and ratings ---

  // Throws UnknownPlayer (id not in store) or InvalidRequest (fewer than
  // two players, or repeated players).
  void record_match(const MatchResult& result);

  std::vector<MatchResult> matches() const;  // snapshot, append order

  // Atomically replaces the rating state of every listed record.
  // Throws UnknownRecord.
  void publish_ratings(const std::map<std::uint64_t, RatingState>& ratings);

  // Rated ids sorted by elo descending, ties broken by older created_at.
  std::vector<std::uint64_t> top_by_elo(std::size_t n) const;

  std::vector<RatingView> rating_views() const;  // insertion order

  // --- goal cache ---

  // On hit: increments the hit counter and returns the entry (a cache_hit
  // journal event is emitted). On miss: returns nullopt.
  std::optional<GoalCacheEntry> goal_lookup(const std::string& goal_key);

  // Stores or upgrades an outcome. failed may be upgraded to a verdict;
  // re-storing an equal verdict is idempotent; proved vs. disproved for one
  // key throws ConflictingOutcome.
  void goal_store(const std::string& goal_key, const ProverOutcome& outcome);

  // Exactly-once dispatch coordination. kOwner: the caller must dispatch
  // and then goal_store (or abandon_goal on failure to produce any
  // outcome). kHit: another worker already resolved (or is resolving) the
  // goal; the entry is returned with hit bookkeeping applied.
  struct GoalClaim {
    enum class State { kOwner, kHit };
    State state = State::kOwner;
    GoalCacheEntry entry;  // valid when state == kHit
  };
  GoalClaim reserve_goal(const std::string& goal_key);

  // Releases an owned in-flight reservation without storing an outcome.
  void abandon_goal(const std::string& goal_key);

  std::uint64_t match_count() const;

 private:
  void journal_event(std::string_view kind, nlohmann::ordered_json data);
  void goal_store_locked(const std::string& goal_key,
                         const ProverOutcome& outcome);

  mutable std::mutex mutex_;
  std::condition_variable goal_resolved_;
  Journal* journal_ = nullptr;

  std::vector<std::uint64_t> order_;              // insertion order
  std::map<std::uint64_t, SketchRecord> records_;
  std::vector<MatchResult> matches_;
  std::map<std::string, GoalCacheEntry> goals_;
  std::map<std::string, int> goals_in_flight_;  // key -> waiter count marker
  std::uint64_t next_id_ = 1;
  std::uint64_t tick_ = 0;
};

}  // namespace nexus

#endif  // NEXUS_POPULATION_HPP_
