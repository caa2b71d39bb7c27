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

#include "nexus/population.hpp"

#include <algorithm>
#include <set>

#include "nexus/error.hpp"

namespace nexus {

PopulationStore::PopulationStore(Journal* journal) : journal_(journal) {}

void PopulationStore::journal_event(std::string_view kind,
                                    nlohmann::ordered_json data) {
  if (journal_ != nullptr) journal_->append(kind, std::move(data));
}

std::uint64_t PopulationStore::insert_sketch(SketchRecord record) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (record.id == 0) {
    record.id = next_id_++;
  } else if (records_.count(record.id) > 0) {
    throw Error(ErrorCode::kDuplicateId,
                "record id " + std::to_string(record.id) + " already exists");
  } else {
    next_id_ = std::max(next_id_, record.id + 1);
  }
  if (record.parent_id && records_.count(*record.parent_id) == 0) {
    throw Error(ErrorCode::kMissingParent,
                "parent id " + std::to_string(*record.parent_id) +
                    " does not exist");
  }
  record.created_at = ++tick_;

  nlohmann::ordered_json data;
  data["id"] = record.id;
  if (record.parent_id) {
    data["parent"] = *record.parent_id;
  } else {
    data["parent"] = nullptr;
  }
  data["created_at"] = record.created_at;
  data["source_digest"] = record.sketch.source_digest;
  data["plan_summary"] = record.plan_summary;
  nlohmann::ordered_json goals = nlohmann::ordered_json::object();
  for (const auto& [key, outcome] : record.goal_feedback) {
    goals[key] = verdict_name(outcome.verdict);
  }
  data["goals"] = std::move(goals);

  const std::uint64_t id = record.id;
  order_.push_back(id);
  records_.emplace(id, std::move(record));
  journal_event("insert", std::move(data));
  return id;
}

SketchRecord PopulationStore::get(std::uint64_t id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = records_.find(id);
  if (it == records_.end()) {
    throw Error(ErrorCode::kUnknownRecord,
                "no record with id " + std::to_string(id));
  }
  return it->second;
}

std::vector<std::uint64_t> PopulationStore::ids() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return order_;
}

std::size_t PopulationStore::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return records_.size();
}

std::uint64_t PopulationStore::increment_visits(std::uint64_t id) {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = records_.find(id);
  if (it == records_.end()) {
    throw Error(ErrorCode::kUnknownRecord,
                "no record with id " + std::to_string(id));
  }
  return ++it->second.visits;
}

void PopulationStore::record_match(const MatchResult& result) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (result.players.size() < 2) {
    throw Error(ErrorCode::kInvalidRequest,
                "a match needs at least two players");
  }
  const std::set<std::uint64_t> distinct(result.players.begin(),
                                         result.players.end());
  if (distinct.size() != result.players.size()) {
    throw Error(ErrorCode::kInvalidRequest, "match players must be distinct");
  }
  for (const std::uint64_t id : result.players) {
    if (records_.count(id) == 0) {
      throw Error(ErrorCode::kUnknownPlayer,
                  "match references unknown record " + std::to_string(id));
    }
  }
  matches_.push_back(result);

  nlohmann::ordered_json data;
  data["players"] = result.players;
  data["raw_ranking"] = result.raw_ranking;
  data["rater"] = result.rater_id;
  journal_event("match", std::move(data));
}

std::vector<MatchResult> PopulationStore::matches() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return matches_;
}

std::uint64_t PopulationStore::match_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return matches_.size();
}

void PopulationStore::publish_ratings(
    const std::map<std::uint64_t, RatingState>& ratings) {
  std::lock_guard<std::mutex> lock(mutex_);
  for (const auto& [id, state] : ratings) {
    if (records_.count(id) == 0) {
      throw Error(ErrorCode::kUnknownRecord,
                  "rating update for unknown record " + std::to_string(id));
    }
  }
  nlohmann::ordered_json updates = nlohmann::ordered_json::array();
  for (const auto& [id, state] : ratings) {
    records_[id].rating = state;
    nlohmann::ordered_json row;
    row["id"] = id;
    row["elo"] = state.elo;
    row["mean"] = state.strength_mean;
    row["var"] = state.strength_var;
    row["rated"] = state.rated;
    updates.push_back(std::move(row));
  }
  nlohmann::ordered_json data;
  data["updates"] = std::move(updates);
  journal_event("ratings", std::move(data));
}

std::vector<std::uint64_t> PopulationStore::top_by_elo(std::size_t n) const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<const SketchRecord*> rated;
  for (const auto& [id, record] : records_) {
    if (record.rating.rated) rated.push_back(&record);
  }
  std::sort(rated.begin(), rated.end(),
            [](const SketchRecord* a, const SketchRecord* b) {
              if (a->rating.elo != b->rating.elo) {
                return a->rating.elo > b->rating.elo;
              }
              if (a->created_at != b->created_at) {
                return a->created_at < b->created_at;
              }
              return a->id < b->id;
            });
  if (rated.size() > n) rated.resize(n);
  std::vector<std::uint64_t> out;
  out.reserve(rated.size());
  for (const SketchRecord* record : rated) out.push_back(record->id);
  return out;
}

std::vector<RatingView> PopulationStore::rating_views() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<RatingView> views;
  views.reserve(order_.size());
  for (const std::uint64_t id : order_) {
    const SketchRecord& record = records_.at(id);
    RatingView view;
    view.id = id;
    view.elo = record.rating.elo;
    view.strength_mean = record.rating.strength_mean;
    view.strength_var = record.rating.strength_var;
    view.strength_samples = record.rating.strength_samples;
    view.visits = record.visits;
    view.rated = record.rating.rated;
    view.created_at = record.created_at;
    views.push_back(std::move(view));
  }
  return views;
}

std::optional<GoalCacheEntry> PopulationStore::goal_lookup(
    const std::string& goal_key) {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = goals_.find(goal_key);
  if (it == goals_.end()) return std::nullopt;
  ++it->second.hits;

  nlohmann::ordered_json data;
  data["goal_key"] = goal_key;
  data["verdict"] = verdict_name(it->second.outcome.verdict);
  data["hits"] = it->second.hits;
  journal_event("cache_hit", std::move(data));
  return it->second;
}

void PopulationStore::goal_store_locked(const std::string& goal_key,
                                        const ProverOutcome& outcome) {
  const auto it = goals_.find(goal_key);
  bool changed = false;
  if (it == goals_.end()) {
    goals_.emplace(goal_key, GoalCacheEntry{goal_key, outcome, 0});
    changed = true;
  } else {
    const Verdict existing = it->second.outcome.verdict;
    if (existing == Verdict::kFailed && outcome.verdict != Verdict::kFailed) {
      it->second.outcome = outcome;  // failure upgraded by a real verdict
      changed = true;
    } else if (existing != Verdict::kFailed &&
               outcome.verdict != Verdict::kFailed &&
               outcome.verdict != existing) {
      throw Error(ErrorCode::kConflictingOutcome,
                  "goal " + goal_key + " already has verdict " +
                      verdict_name(existing) + ", refusing " +
                      verdict_name(outcome.verdict));
    }
    // Re-stores of the same verdict, and failures after a verdict, are
    // ignored: failure is not evidence.
  }
  goals_in_flight_.erase(goal_key);
  goal_resolved_.notify_all();
  if (changed) {
    nlohmann::ordered_json data;
    data["goal_key"] = goal_key;
    data["verdict"] = verdict_name(outcome.verdict);
    journal_event("goal_store", std::move(data));
  }
}

void PopulationStore::goal_store(const std::string& goal_key,
                                 const ProverOutcome& outcome) {
  std::lock_guard<std::mutex> lock(mutex_);
  goal_store_locked(goal_key, outcome);
}

PopulationStore::GoalClaim PopulationStore::reserve_goal(
    const std::string& goal_key) {
  std::unique_lock<std::mutex> lock(mutex_);
  for (;;) {
    const auto it = goals_.find(goal_key);
    if (it != goals_.end()) {
      ++it->second.hits;
      nlohmann::ordered_json data;
      data["goal_key"] = goal_key;
      data["verdict"] = verdict_name(it->second.outcome.verdict);
      data["hits"] = it->second.hits;
      journal_event("cache_hit", std::move(data));
      return GoalClaim{GoalClaim::State::kHit, it->second};
    }
    if (goals_in_flight_.count(goal_key) == 0) {
      goals_in_flight_[goal_key] = 1;
      return GoalClaim{GoalClaim::State::kOwner, GoalCacheEntry{}};
    }
    // Another worker is resolving this goal; wait for it so the prover is
    // dispatched at most once per goal.
    goal_resolved_.wait(lock, [&] {
      return goals_.count(goal_key) > 0 ||
             goals_in_flight_.count(goal_key) == 0;
    });
  }
}

void PopulationStore::abandon_goal(const std::string& goal_key) {
  std::lock_guard<std::mutex> lock(mutex_);
  goals_in_flight_.erase(goal_key);
  goal_resolved_.notify_all();
}

}  // namespace nexus
