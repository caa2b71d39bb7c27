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

#include "nexus/evalkit.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "nexus/error.hpp"
#include "nexus/journal.hpp"

namespace nexus {
namespace {

// Unit pricing: one prover input token costs exactly 1, so an attempt with
// one single-token event per tick costs its tick count.
PriceTable unit_prices() {
  PriceTable prices;
  prices.prover_input = 1.0;
  return prices;
}

AttemptLog make_attempt(const std::string& id, int ticks,
                        std::optional<std::uint64_t> success_time) {
  AttemptLog log;
  log.attempt_id = id;
  for (int t = 1; t <= ticks; ++t) {
    CostEvent event;
    event.timestamp = static_cast<std::uint64_t>(t);
    event.usage.input_tokens = 1;
    log.events.push_back(event);
  }
  log.success_time = success_time;
  return log;
}

TEST_CASE("event_cost prices prover and rater traffic separately") {
  PriceTable prices;
  prices.prover_input = 0.001;
  prices.prover_cache_read = 0.0001;
  prices.prover_output = 0.002;
  prices.rater_input = 0.0005;
  prices.rater_output = 0.001;

  CostEvent event;
  event.usage.input_tokens = 100;
  event.usage.cache_read_tokens = 50;
  event.usage.output_tokens = 10;

  event.component = "prover";
  CHECK(event_cost(event, prices) ==
        doctest::Approx(100 * 0.001 + 50 * 0.0001 + 10 * 0.002));
  event.component = "rater";
  CHECK(event_cost(event, prices) ==
        doctest::Approx(100 * 0.0005 + 50 * 0.0 + 10 * 0.001));
}

TEST_CASE("attempt_cost sums every event") {
  const AttemptLog log = make_attempt("a", 4, std::nullopt);
  CHECK(attempt_cost(log, unit_prices()) == doctest::Approx(4.0));
}

TEST_CASE("two attempts with successes at t=5 and t=9 chunk to cost 10") {
  // The chunk succeeds at the earliest member success (t=5), so only events
  // at or before t=5 are billed: 5 ticks from each attempt.
  const std::vector<AttemptLog> attempts = {make_attempt("a", 5, 5),
                                            make_attempt("b", 9, 9)};
  const ChunkEstimate estimate = chunk_estimate(attempts, 2, unit_prices());

  CHECK(estimate.chunk_size == 2);
  REQUIRE(estimate.rows.size() == 1);
  const ChunkRow& row = estimate.rows.front();
  CHECK(row.success);
  CHECK(row.success_time == 5);
  CHECK(row.cost_truncated == doctest::Approx(10.0));
  CHECK(row.cost_full == doctest::Approx(14.0));
  CHECK(estimate.solve_rate == doctest::Approx(1.0));
  CHECK(estimate.solve_rate_se == doctest::Approx(0.0));
  CHECK(estimate.mean_chunk_cost == doctest::Approx(10.0));
  CHECK(estimate.mean_success_cost == doctest::Approx(10.0));
  CHECK(estimate.total_cost_full == doctest::Approx(14.0));
}

TEST_CASE("chunk_estimate with singleton chunks keeps attempts separate") {
  const std::vector<AttemptLog> attempts = {make_attempt("a", 5, 5),
                                            make_attempt("b", 9, 9)};
  const ChunkEstimate estimate = chunk_estimate(attempts, 1, unit_prices());
  REQUIRE(estimate.rows.size() == 2);
  CHECK(estimate.rows[0].cost_truncated == doctest::Approx(5.0));
  CHECK(estimate.rows[1].cost_truncated == doctest::Approx(9.0));
  CHECK(estimate.mean_chunk_cost == doctest::Approx(7.0));
  CHECK(estimate.solve_rate == doctest::Approx(1.0));
}

TEST_CASE("solve-rate standard error matches the closed form") {
  const PriceTable prices = unit_prices();

  SUBCASE("p = 0") {
    const std::vector<AttemptLog> attempts = {
        make_attempt("a", 2, std::nullopt), make_attempt("b", 2, std::nullopt)};
    const ChunkEstimate estimate = chunk_estimate(attempts, 1, prices);
    CHECK(estimate.solve_rate == doctest::Approx(0.0));
    CHECK(estimate.solve_rate_se == doctest::Approx(0.0));
  }
  SUBCASE("p = 1/2 over four chunks") {
    const std::vector<AttemptLog> attempts = {
        make_attempt("a", 2, 1), make_attempt("b", 2, std::nullopt),
        make_attempt("c", 2, 2), make_attempt("d", 2, std::nullopt)};
    const ChunkEstimate estimate = chunk_estimate(attempts, 1, prices);
    CHECK(estimate.solve_rate == doctest::Approx(0.5));
    CHECK(estimate.solve_rate_se ==
          doctest::Approx(std::sqrt(0.5 * 0.5 / 4.0)));
  }
  SUBCASE("p = 1") {
    const std::vector<AttemptLog> attempts = {make_attempt("a", 1, 1),
                                              make_attempt("b", 1, 1)};
    const ChunkEstimate estimate = chunk_estimate(attempts, 1, prices);
    CHECK(estimate.solve_rate == doctest::Approx(1.0));
    CHECK(estimate.solve_rate_se == doctest::Approx(0.0));
  }
}

TEST_CASE("chunk_estimate validates the chunking") {
  const std::vector<AttemptLog> attempts = {make_attempt("a", 1, std::nullopt),
                                            make_attempt("b", 1, std::nullopt),
                                            make_attempt("c", 1, std::nullopt)};
  CHECK_THROWS_AS(chunk_estimate(attempts, 0, unit_prices()), Error);
  try {
    chunk_estimate(attempts, 2, unit_prices());
    FAIL("expected indivisible chunking");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIndivisibleChunking);
  }
  CHECK_THROWS_AS(chunk_estimate({}, 2, unit_prices()), Error);
}

TEST_CASE("failed chunks bill every event") {
  const std::vector<AttemptLog> attempts = {make_attempt("a", 3, std::nullopt),
                                            make_attempt("b", 4, std::nullopt)};
  const ChunkEstimate estimate = chunk_estimate(attempts, 2, unit_prices());
  REQUIRE(estimate.rows.size() == 1);
  CHECK_FALSE(estimate.rows[0].success);
  CHECK_FALSE(estimate.rows[0].success_time.has_value());
  CHECK(estimate.rows[0].cost_truncated == estimate.rows[0].cost_full);
  CHECK(estimate.rows[0].cost_full == doctest::Approx(7.0));
  CHECK(estimate.mean_success_cost == doctest::Approx(0.0));
}

TEST_CASE("truncation drops sibling events after the first success") {
  // Attempt a solves at t=2; attempt b keeps burning tokens at t=3.
  AttemptLog a = make_attempt("a", 2, 2);
  AttemptLog b;
  b.attempt_id = "b";
  for (const std::uint64_t t : {1, 3}) {
    CostEvent event;
    event.timestamp = t;
    event.usage.input_tokens = 1;
    b.events.push_back(event);
  }
  const ChunkEstimate estimate = chunk_estimate({a, b}, 2, unit_prices());
  REQUIRE(estimate.rows.size() == 1);
  CHECK(estimate.rows[0].cost_truncated == doctest::Approx(3.0));
  CHECK(estimate.rows[0].cost_full == doctest::Approx(4.0));
}

TEST_CASE("chunks_to_csv renders one line per chunk") {
  const std::vector<AttemptLog> attempts = {make_attempt("a", 5, 5),
                                            make_attempt("b", 9, 9),
                                            make_attempt("c", 2, std::nullopt),
                                            make_attempt("d", 1, std::nullopt)};
  const ChunkEstimate estimate = chunk_estimate(attempts, 2, unit_prices());
  CHECK(chunks_to_csv(estimate) ==
        "chunk,success,success_time,cost_truncated,cost_full\n"
        "0,1,5,10.000000,14.000000\n"
        "1,0,,3.000000,3.000000\n");
}

TEST_CASE("estimate_summary lists stable key=value lines") {
  const std::vector<AttemptLog> attempts = {make_attempt("a", 5, 5),
                                            make_attempt("b", 9, 9)};
  const ChunkEstimate estimate = chunk_estimate(attempts, 2, unit_prices());
  CHECK(estimate_summary(estimate, "unit") ==
        "label=unit\n"
        "chunk_size=2\n"
        "n_chunks=1\n"
        "n_attempts=2\n"
        "solve_rate=1.000000\n"
        "solve_rate_se=0.000000\n"
        "mean_success_cost=10.000000\n"
        "mean_chunk_cost=10.000000\n"
        "total_cost_full=14.000000\n");
}

ChunkEstimate fake_estimate(double cost, double rate) {
  ChunkEstimate estimate;
  estimate.mean_chunk_cost = cost;
  estimate.solve_rate = rate;
  return estimate;
}

TEST_CASE("pareto_points sorts by cost and flags dominated points") {
  const std::vector<ParetoPoint> points = pareto_points(
      {{"pricey-weak", fake_estimate(2.0, 0.5)},
       {"cheap-strong", fake_estimate(1.0, 0.8)},
       {"pricey-best", fake_estimate(3.0, 0.9)}});
  REQUIRE(points.size() == 3);
  CHECK(points[0].label == "cheap-strong");
  CHECK_FALSE(points[0].dominated);
  CHECK(points[1].label == "pricey-weak");
  CHECK(points[1].dominated);  // cheap-strong is cheaper and stronger
  CHECK(points[2].label == "pricey-best");
  CHECK_FALSE(points[2].dominated);

  CHECK(pareto_to_csv(points) ==
        "label,cost,solve_rate,dominated\n"
        "cheap-strong,1.000000,0.800000,0\n"
        "pricey-weak,2.000000,0.500000,1\n"
        "pricey-best,3.000000,0.900000,0\n");
}

TEST_CASE("pareto_points breaks cost ties by label") {
  const std::vector<ParetoPoint> points = pareto_points(
      {{"zeta", fake_estimate(1.0, 0.5)}, {"alpha", fake_estimate(1.0, 0.5)}});
  REQUIRE(points.size() == 2);
  CHECK(points[0].label == "alpha");
  CHECK(points[1].label == "zeta");
  CHECK_FALSE(points[0].dominated);
  CHECK_FALSE(points[1].dominated);
}

TEST_CASE("scatter_svg emits a self-contained plot") {
  const std::vector<ParetoPoint> points = pareto_points(
      {{"base", fake_estimate(1.0, 0.4)}, {"tuned", fake_estimate(2.0, 0.2)}});
  const std::string svg = scatter_svg(points);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("steelblue") != std::string::npos);  // frontier point
  CHECK(svg.find("gray") != std::string::npos);       // dominated point
  CHECK(svg.find(">base</text>") != std::string::npos);
  CHECK(svg.find(">tuned</text>") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("attempt_from_events lifts turns and the first solve") {
  Journal journal;
  journal.append("run_meta", {{"os", "linux"}});
  const std::uint64_t t1 = journal.append(
      "turn", {{"component", "prover"},
               {"usage", nlohmann::ordered_json{{"input_tokens", 7},
                                                {"cache_read_tokens", 2},
                                                {"output_tokens", 3}}}});
  const std::uint64_t t2 = journal.append(
      "turn", {{"component", "rater"},
               {"usage", nlohmann::ordered_json{{"input_tokens", 5}}}});
  const std::uint64_t s1 = journal.append("solve", {{"worker", 0}});
  const std::uint64_t t3 = journal.append("turn", {{"text", "late"}});
  journal.append("solve", {{"worker", 1}});  // ignored: only the first counts

  const AttemptLog log = attempt_from_events(journal.events(), "run-1");
  CHECK(log.attempt_id == "run-1");
  REQUIRE(log.events.size() == 3);
  CHECK(log.events[0].timestamp == t1);
  CHECK(log.events[0].component == "prover");
  CHECK(log.events[0].usage.input_tokens == 7);
  CHECK(log.events[0].usage.cache_read_tokens == 2);
  CHECK(log.events[0].usage.output_tokens == 3);
  CHECK(log.events[1].timestamp == t2);
  CHECK(log.events[1].component == "rater");
  CHECK(log.events[1].usage.input_tokens == 5);
  CHECK(log.events[2].timestamp == t3);
  CHECK(log.events[2].component == "prover");  // default
  CHECK(log.events[2].usage == TokenUsage{});
  CHECK(log.success_time == s1);
}

TEST_CASE("prices_from_text parses known keys and rejects others") {
  const PriceTable prices = prices_from_text(
      "# cost model\n"
      "prover_input = 0.001\n"
      "prover_output = 0.002   # per token\n"
      "rater_input = 0.0005\n",
      "prices.cfg");
  CHECK(prices.prover_input == doctest::Approx(0.001));
  CHECK(prices.prover_output == doctest::Approx(0.002));
  CHECK(prices.rater_input == doctest::Approx(0.0005));
  CHECK(prices.prover_cache_read == doctest::Approx(0.0));
  CHECK(prices.rater_output == doctest::Approx(0.0));

  try {
    prices_from_text("prover_inputt = 0.1\n", "prices.cfg");
    FAIL("expected unknown-key error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfigError);
    CHECK(std::string(e.what()).find("prices.cfg") != std::string::npos);
    CHECK(std::string(e.what()).find("prover_inputt") != std::string::npos);
  }
}

}  // namespace
}  // namespace nexus
