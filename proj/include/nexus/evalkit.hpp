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

#ifndef NEXUS_EVALKIT_HPP_
#define NEXUS_EVALKIT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nexus/backends.hpp"
#include "nexus/journal.hpp"

namespace nexus {

// Per-token prices, split by component since sketching and rating traffic
// are billed separately.
struct PriceTable {
  double prover_input = 0.0;
  double prover_cache_read = 0.0;
  double prover_output = 0.0;
  double rater_input = 0.0;
  double rater_cache_read = 0.0;
  double rater_output = 0.0;
};

// One billed generation: logical timestamp (journal sequence number),
// component ("prover" or "rater"), token counts.
struct CostEvent {
  std::uint64_t timestamp = 0;
  std::string component = "prover";
  TokenUsage usage;
};

struct AttemptLog {
  std::string attempt_id;
  std::vector<CostEvent> events;              // ascending timestamps
  std::optional<std::uint64_t> success_time;  // logical time of the solve
};

double event_cost(const CostEvent& event, const PriceTable& prices);

// Sum over every event, success or not.
double attempt_cost(const AttemptLog& attempt, const PriceTable& prices);

struct ChunkRow {
  std::size_t index = 0;
  bool success = false;
  std::optional<std::uint64_t> success_time;  // earliest among members
  // Cost of member events with timestamp <= success_time; all events when
  // the chunk never succeeds.
  double cost_truncated = 0.0;
  double cost_full = 0.0;  // every member event
};

struct ChunkEstimate {
  std::size_t chunk_size = 0;
  std::vector<ChunkRow> rows;
  double solve_rate = 0.0;
  double solve_rate_se = 0.0;       // sqrt(p*(1-p)/n_chunks)
  double mean_success_cost = 0.0;   // mean truncated cost, successful chunks
  double mean_chunk_cost = 0.0;     // mean truncated cost, all chunks
  double total_cost_full = 0.0;
};

// Partitions the attempts, in order, into consecutive chunks of exactly
// chunk_size (throws IndivisibleChunking otherwise; chunk_size must be
// positive). A chunk succeeds as soon as any member succeeds, so member
// events after the earliest success are not billed to the truncated cost.
ChunkEstimate chunk_estimate(const std::vector<AttemptLog>& attempts,
                             std::size_t chunk_size, const PriceTable& prices);

struct ParetoPoint {
  std::string label;
  double cost = 0.0;        // mean_chunk_cost
  double solve_rate = 0.0;
  bool dominated = false;   // another point is at least as cheap AND solves
                            // at least as often, better in one of the two
};

// Sorted by cost ascending (label breaks ties) with dominance flags.
std::vector<ParetoPoint> pareto_points(
    const std::vector<std::pair<std::string, ChunkEstimate>>& estimates);

std::string chunks_to_csv(const ChunkEstimate& estimate);
std::string pareto_to_csv(const std::vector<ParetoPoint>& points);

// key=value lines (one per line), stable order.
std::string estimate_summary(const ChunkEstimate& estimate,
                             const std::string& label);

// Self-contained cost/solve-rate scatter plot.
std::string scatter_svg(const std::vector<ParetoPoint>& points);

// Builds one attempt log from a run journal: every "turn" event becomes a
// cost event (sequence number as the logical timestamp), and the first
// "solve" event, if any, sets success_time.
AttemptLog attempt_from_events(const std::vector<Journal::Event>& events,
                               const std::string& attempt_id);

// Parses "prover_input = 0.003"-style key = value lines; unknown keys are
// an error. Missing keys default to zero.
PriceTable prices_from_text(const std::string& text,
                            const std::string& origin = "<prices>");

}  // namespace nexus

#endif  // NEXUS_EVALKIT_HPP_
