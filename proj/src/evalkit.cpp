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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "nexus/config.hpp"
#include "nexus/error.hpp"
#include "nexus/replay.hpp"

namespace nexus {

namespace {

std::string fixed6(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6f", value);
  return buffer;
}

std::string fixed2(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.2f", value);
  return buffer;
}

// CSV field quoting for labels (costs and rates are plain numbers).
std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace

double event_cost(const CostEvent& event, const PriceTable& prices) {
  const bool rater = event.component == "rater";
  const double p_in = rater ? prices.rater_input : prices.prover_input;
  const double p_cache =
      rater ? prices.rater_cache_read : prices.prover_cache_read;
  const double p_out = rater ? prices.rater_output : prices.prover_output;
  return static_cast<double>(event.usage.input_tokens) * p_in +
         static_cast<double>(event.usage.cache_read_tokens) * p_cache +
         static_cast<double>(event.usage.output_tokens) * p_out;
}

double attempt_cost(const AttemptLog& attempt, const PriceTable& prices) {
  double total = 0.0;
  for (const CostEvent& event : attempt.events) {
    total += event_cost(event, prices);
  }
  return total;
}

ChunkEstimate chunk_estimate(const std::vector<AttemptLog>& attempts,
                             std::size_t chunk_size,
                             const PriceTable& prices) {
  if (chunk_size == 0) {
    throw Error(ErrorCode::kInvalidRequest, "chunk_size must be positive");
  }
  if (attempts.empty() || attempts.size() % chunk_size != 0) {
    throw Error(ErrorCode::kIndivisibleChunking,
                "cannot split " + std::to_string(attempts.size()) +
                    " attempts into chunks of " + std::to_string(chunk_size));
  }
  ChunkEstimate estimate;
  estimate.chunk_size = chunk_size;
  const std::size_t n_chunks = attempts.size() / chunk_size;
  estimate.rows.reserve(n_chunks);

  std::size_t n_success = 0;
  double sum_truncated = 0.0;
  double sum_success_truncated = 0.0;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    ChunkRow row;
    row.index = c;
    const std::size_t begin = c * chunk_size;
    for (std::size_t i = begin; i < begin + chunk_size; ++i) {
      if (!attempts[i].success_time) continue;
      if (!row.success_time || *attempts[i].success_time < *row.success_time) {
        row.success_time = attempts[i].success_time;
      }
    }
    row.success = row.success_time.has_value();
    for (std::size_t i = begin; i < begin + chunk_size; ++i) {
      for (const CostEvent& event : attempts[i].events) {
        const double cost = event_cost(event, prices);
        row.cost_full += cost;
        if (!row.success || event.timestamp <= *row.success_time) {
          row.cost_truncated += cost;
        }
      }
    }
    estimate.total_cost_full += row.cost_full;
    sum_truncated += row.cost_truncated;
    if (row.success) {
      ++n_success;
      sum_success_truncated += row.cost_truncated;
    }
    estimate.rows.push_back(row);
  }

  const double n = static_cast<double>(n_chunks);
  const double p = static_cast<double>(n_success) / n;
  estimate.solve_rate = p;
  estimate.solve_rate_se = std::sqrt(p * (1.0 - p) / n);
  estimate.mean_chunk_cost = sum_truncated / n;
  estimate.mean_success_cost =
      n_success == 0 ? 0.0
                     : sum_success_truncated / static_cast<double>(n_success);
  return estimate;
}

std::vector<ParetoPoint> pareto_points(
    const std::vector<std::pair<std::string, ChunkEstimate>>& estimates) {
  std::vector<ParetoPoint> points;
  points.reserve(estimates.size());
  for (const auto& [label, estimate] : estimates) {
    ParetoPoint point;
    point.label = label;
    point.cost = estimate.mean_chunk_cost;
    point.solve_rate = estimate.solve_rate;
    points.push_back(std::move(point));
  }
  std::sort(points.begin(), points.end(),
            [](const ParetoPoint& a, const ParetoPoint& b) {
              if (a.cost != b.cost) return a.cost < b.cost;
              return a.label < b.label;
            });
  for (ParetoPoint& point : points) {
    point.dominated = std::any_of(
        points.begin(), points.end(), [&point](const ParetoPoint& other) {
          return other.cost <= point.cost &&
                 other.solve_rate >= point.solve_rate &&
                 (other.cost < point.cost ||
                  other.solve_rate > point.solve_rate);
        });
  }
  return points;
}

std::string chunks_to_csv(const ChunkEstimate& estimate) {
  std::string csv = "chunk,success,success_time,cost_truncated,cost_full\n";
  for (const ChunkRow& row : estimate.rows) {
    csv += std::to_string(row.index);
    csv += row.success ? ",1," : ",0,";
    if (row.success_time) csv += std::to_string(*row.success_time);
    csv += "," + fixed6(row.cost_truncated) + "," + fixed6(row.cost_full) +
           "\n";
  }
  return csv;
}

std::string pareto_to_csv(const std::vector<ParetoPoint>& points) {
  std::string csv = "label,cost,solve_rate,dominated\n";
  for (const ParetoPoint& point : points) {
    csv += csv_escape(point.label) + "," + fixed6(point.cost) + "," +
           fixed6(point.solve_rate) + "," + (point.dominated ? "1" : "0") +
           "\n";
  }
  return csv;
}

std::string estimate_summary(const ChunkEstimate& estimate,
                             const std::string& label) {
  std::string out;
  out += "label=" + label + "\n";
  out += "chunk_size=" + std::to_string(estimate.chunk_size) + "\n";
  out += "n_chunks=" + std::to_string(estimate.rows.size()) + "\n";
  out += "n_attempts=" +
         std::to_string(estimate.rows.size() * estimate.chunk_size) + "\n";
  out += "solve_rate=" + fixed6(estimate.solve_rate) + "\n";
  out += "solve_rate_se=" + fixed6(estimate.solve_rate_se) + "\n";
  out += "mean_success_cost=" + fixed6(estimate.mean_success_cost) + "\n";
  out += "mean_chunk_cost=" + fixed6(estimate.mean_chunk_cost) + "\n";
  out += "total_cost_full=" + fixed6(estimate.total_cost_full) + "\n";
  return out;
}

std::string scatter_svg(const std::vector<ParetoPoint>& points) {
  constexpr double kWidth = 480.0;
  constexpr double kHeight = 320.0;
  constexpr double kMargin = 56.0;
  double min_cost = 0.0, max_cost = 1.0, max_rate = 1.0;
  if (!points.empty()) {
    min_cost = points.front().cost;
    max_cost = points.front().cost;
    for (const ParetoPoint& p : points) {
      min_cost = std::min(min_cost, p.cost);
      max_cost = std::max(max_cost, p.cost);
    }
    if (max_cost == min_cost) {
      max_cost = min_cost + 1.0;
      min_cost = std::max(0.0, min_cost - 1.0);
    }
  }
  const auto x_of = [&](double cost) {
    return kMargin + (cost - min_cost) / (max_cost - min_cost) *
                         (kWidth - 2 * kMargin);
  };
  const auto y_of = [&](double rate) {
    return kHeight - kMargin - rate / max_rate * (kHeight - 2 * kMargin);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "  <line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin
      << "\" x2=\"" << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin
      << "\" stroke=\"black\"/>\n";
  svg << "  <line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\""
      << kMargin << "\" y2=\"" << kHeight - kMargin
      << "\" stroke=\"black\"/>\n";
  svg << "  <text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">cost per chunk</text>\n";
  svg << "  <text x=\"16\" y=\"" << kHeight / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 "
         "16 "
      << kHeight / 2 << ")\">solve rate</text>\n";
  svg << "  <text x=\"" << kMargin << "\" y=\"" << kHeight - kMargin + 16
      << "\" text-anchor=\"middle\" font-size=\"10\">" << fixed2(min_cost)
      << "</text>\n";
  svg << "  <text x=\"" << kWidth - kMargin << "\" y=\""
      << kHeight - kMargin + 16 << "\" text-anchor=\"middle\" font-size=\""
      << "10\">" << fixed2(max_cost) << "</text>\n";
  svg << "  <text x=\"" << kMargin - 8 << "\" y=\"" << kHeight - kMargin + 4
      << "\" text-anchor=\"end\" font-size=\"10\">0.00</text>\n";
  svg << "  <text x=\"" << kMargin - 8 << "\" y=\"" << kMargin + 4
      << "\" text-anchor=\"end\" font-size=\"10\">1.00</text>\n";
  for (const ParetoPoint& point : points) {
    const double x = x_of(point.cost);
    const double y = y_of(point.solve_rate);
    svg << "  <circle cx=\"" << fixed2(x) << "\" cy=\"" << fixed2(y)
        << "\" r=\"4\" fill=\"" << (point.dominated ? "gray" : "steelblue")
        << "\"/>\n";
    svg << "  <text x=\"" << fixed2(x + 6) << "\" y=\"" << fixed2(y - 6)
        << "\" font-size=\"10\">" << point.label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

AttemptLog attempt_from_events(const std::vector<Journal::Event>& events,
                               const std::string& attempt_id) {
  AttemptLog attempt;
  attempt.attempt_id = attempt_id;
  for (const Journal::Event& event : events) {
    if (event.kind == "turn") {
      CostEvent cost;
      cost.timestamp = event.seq;
      cost.component = event.data.value("component", std::string{"prover"});
      if (event.data.contains("usage")) {
        cost.usage = usage_from_json(event.data.at("usage"));
      }
      attempt.events.push_back(std::move(cost));
    } else if (event.kind == "solve" && !attempt.success_time) {
      attempt.success_time = event.seq;
    }
  }
  return attempt;
}

PriceTable prices_from_text(const std::string& text,
                            const std::string& origin) {
  const Config config = Config::parse_text(text, origin);
  static const std::set<std::string> kKnown = {
      "prover_input", "prover_cache_read", "prover_output",
      "rater_input",  "rater_cache_read",  "rater_output"};
  for (const std::string& key : config.keys()) {
    if (kKnown.count(key) == 0) {
      throw Error(ErrorCode::kConfigError,
                  origin + ": unknown price key '" + key + "'");
    }
  }
  PriceTable prices;
  prices.prover_input = config.get_double("prover_input", 0.0);
  prices.prover_cache_read = config.get_double("prover_cache_read", 0.0);
  prices.prover_output = config.get_double("prover_output", 0.0);
  prices.rater_input = config.get_double("rater_input", 0.0);
  prices.rater_cache_read = config.get_double("rater_cache_read", 0.0);
  prices.rater_output = config.get_double("rater_output", 0.0);
  return prices;
}

}  // namespace nexus
