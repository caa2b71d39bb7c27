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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "nexus/agents.hpp"
#include "nexus/config.hpp"
#include "nexus/error.hpp"
#include "nexus/evalkit.hpp"
#include "nexus/journal.hpp"
#include "nexus/population.hpp"
#include "nexus/sketch.hpp"

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw nexus::Error(nexus::ErrorCode::kIoError,
                       "cannot write " + path.string());
  }
  out << content;
}

std::string usage_lines(const char* prefix, const nexus::TokenUsage& usage) {
  std::string out;
  out += std::string(prefix) + "_input_tokens=" +
         std::to_string(usage.input_tokens) + "\n";
  out += std::string(prefix) + "_cache_read_tokens=" +
         std::to_string(usage.cache_read_tokens) + "\n";
  out += std::string(prefix) + "_output_tokens=" +
         std::to_string(usage.output_tokens) + "\n";
  return out;
}

struct RunOptions {
  std::string manifest;
  std::string output_dir;  // overrides the manifest when set
  std::string journal;     // overrides <output_dir>/journal.jsonl when set
};

int cmd_run(const RunOptions& options) {
  nexus::Manifest manifest = nexus::load_manifest(options.manifest);
  if (!options.output_dir.empty()) manifest.output_dir = options.output_dir;
  fs::create_directories(manifest.output_dir);
  const fs::path journal_path = options.journal.empty()
                                    ? fs::path(manifest.output_dir) /
                                          "journal.jsonl"
                                    : fs::path(options.journal);

  nexus::Journal journal(journal_path);
  journal.append("run_meta", nexus::manifest_json(manifest));

  const nexus::ProofSketch problem =
      nexus::parse_sketch(manifest.problem_text);
  const nexus::BackendSet backends = nexus::make_backends(manifest);

  nexus::RunResult result;
  if (nexus::agent_is_evolutionary(manifest.run.agent_kind)) {
    nexus::PopulationStore store(&journal);
    result = nexus::run_evolutionary(problem, manifest.run, backends, store,
                                     journal);
  } else {
    result = nexus::run_basic(problem, manifest.run, backends, journal);
  }

  std::string summary;
  summary += std::string("solved=") + (result.solved ? "true" : "false") +
             "\n";
  summary += "episodes=" + std::to_string(result.episodes) + "\n";
  if (result.solved) {
    summary += "solver_worker=" + std::to_string(result.solver_worker) + "\n";
    if (result.solution_record) {
      summary +=
          "solution_record=" + std::to_string(*result.solution_record) + "\n";
    }
  }
  summary += usage_lines("prover", result.prover_usage);
  summary += usage_lines("rater", result.rater_usage);
  summary += "journal=" + journal_path.string() + "\n";
  if (result.solution) {
    const fs::path solution_path =
        fs::path(manifest.output_dir) / "solution.txt";
    write_file(solution_path, nexus::render(*result.solution));
    summary += "solution=" + solution_path.string() + "\n";
  }
  write_file(fs::path(manifest.output_dir) / "summary.txt", summary);
  std::cout << summary;
  return result.solved ? 0 : 2;
}

struct EvalOptions {
  std::vector<std::string> journals;
  std::vector<std::string> series;  // "label=journal1,journal2,..."
  std::string prices;
  std::size_t chunk_size = 1;
  std::string output_dir = ".";
  std::string label = "run";
};

nexus::ChunkEstimate estimate_for(const std::vector<std::string>& paths,
                                  std::size_t chunk_size,
                                  const nexus::PriceTable& prices) {
  std::vector<nexus::AttemptLog> attempts;
  attempts.reserve(paths.size());
  for (const std::string& path : paths) {
    attempts.push_back(nexus::attempt_from_events(
        nexus::Journal::read_file(path), fs::path(path).filename().string()));
  }
  return nexus::chunk_estimate(attempts, chunk_size, prices);
}

int cmd_eval(const EvalOptions& options) {
  nexus::PriceTable prices;
  if (!options.prices.empty()) {
    std::ifstream in(options.prices, std::ios::binary);
    if (!in) {
      throw nexus::Error(nexus::ErrorCode::kIoError,
                         "cannot open " + options.prices);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    prices = nexus::prices_from_text(buffer.str(), options.prices);
  }
  fs::create_directories(options.output_dir);

  if (!options.series.empty()) {
    std::vector<std::pair<std::string, nexus::ChunkEstimate>> estimates;
    for (const std::string& series : options.series) {
      const std::size_t eq = series.find('=');
      if (eq == std::string::npos) {
        throw nexus::Error(nexus::ErrorCode::kConfigError,
                           "--series expects label=journal[,journal...]: " +
                               series);
      }
      const std::string label = series.substr(0, eq);
      std::vector<std::string> paths;
      std::string rest = series.substr(eq + 1);
      std::size_t pos = 0;
      while (pos <= rest.size()) {
        const std::size_t comma = rest.find(',', pos);
        const std::string path =
            rest.substr(pos, comma == std::string::npos ? std::string::npos
                                                        : comma - pos);
        if (!path.empty()) paths.push_back(path);
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      estimates.emplace_back(
          label, estimate_for(paths, options.chunk_size, prices));
    }
    const std::vector<nexus::ParetoPoint> points =
        nexus::pareto_points(estimates);
    write_file(fs::path(options.output_dir) / "pareto.csv",
               nexus::pareto_to_csv(points));
    write_file(fs::path(options.output_dir) / "eval_scatter.svg",
               nexus::scatter_svg(points));
    for (const auto& [label, estimate] : estimates) {
      std::cout << nexus::estimate_summary(estimate, label) << "\n";
    }
    return 0;
  }

  if (options.journals.empty()) {
    throw nexus::Error(nexus::ErrorCode::kConfigError,
                       "eval needs --journal files (or --series)");
  }
  const nexus::ChunkEstimate estimate =
      estimate_for(options.journals, options.chunk_size, prices);
  write_file(fs::path(options.output_dir) / "eval_chunks.csv",
             nexus::chunks_to_csv(estimate));
  const std::string summary =
      nexus::estimate_summary(estimate, options.label);
  write_file(fs::path(options.output_dir) / "eval_summary.txt", summary);
  write_file(
      fs::path(options.output_dir) / "eval_scatter.svg",
      nexus::scatter_svg(nexus::pareto_points({{options.label, estimate}})));
  std::cout << summary;
  return 0;
}

struct ReplayOptions {
  std::string journal;
};

int cmd_replay(const ReplayOptions& options) {
  const std::vector<nexus::Journal::Event> recorded =
      nexus::Journal::read_file(options.journal);
  const nexus::Journal::Event* meta = nullptr;
  for (const nexus::Journal::Event& event : recorded) {
    if (event.kind == "run_meta") {
      meta = &event;
      break;
    }
  }
  if (meta == nullptr) {
    throw nexus::Error(nexus::ErrorCode::kNotReplayable,
                       "journal has no run_meta event");
  }
  const nexus::Manifest manifest = nexus::manifest_from_json(meta->data);
  if (manifest.llm_backend != "replay") {
    throw nexus::Error(nexus::ErrorCode::kNotReplayable,
                       "only replay-backend runs can be replayed (this run "
                       "used '" +
                           manifest.llm_backend + "')");
  }
  if (!manifest.run.deterministic) {
    throw nexus::Error(nexus::ErrorCode::kNotReplayable,
                       "only deterministic-schedule runs can be replayed");
  }

  nexus::Journal journal;  // in-memory
  journal.append("run_meta", nexus::manifest_json(manifest));
  const nexus::ProofSketch problem =
      nexus::parse_sketch(manifest.problem_text);
  const nexus::BackendSet backends = nexus::make_backends(manifest);
  if (nexus::agent_is_evolutionary(manifest.run.agent_kind)) {
    nexus::PopulationStore store(&journal);
    nexus::run_evolutionary(problem, manifest.run, backends, store, journal);
  } else {
    nexus::run_basic(problem, manifest.run, backends, journal);
  }

  const std::vector<std::string> expected =
      nexus::Journal::semantic_lines(recorded);
  const std::vector<std::string> actual =
      nexus::Journal::semantic_lines(journal.events());
  const std::size_t common = std::min(expected.size(), actual.size());
  for (std::size_t i = 0; i < common; ++i) {
    if (expected[i] != actual[i]) {
      std::cout << "REPLAY DIVERGED at semantic event " << i << "\n";
      std::cout << "recorded: " << expected[i] << "\n";
      std::cout << "replayed: " << actual[i] << "\n";
      return 1;
    }
  }
  if (expected.size() != actual.size()) {
    std::cout << "REPLAY DIVERGED at semantic event " << common
              << " (recorded " << expected.size() << " events, replayed "
              << actual.size() << ")\n";
    return 1;
  }
  std::cout << "REPLAY OK (" << expected.size() << " semantic events)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evolutionary proof-sketch search over scripted or remote "
               "backends"};
  app.require_subcommand(1);

  RunOptions run_options;
  CLI::App* run = app.add_subcommand("run", "execute a run manifest");
  run->add_option("--manifest", run_options.manifest, "run manifest file")
      ->required();
  run->add_option("--output-dir", run_options.output_dir,
                  "override the manifest's output_dir");
  run->add_option("--journal", run_options.journal,
                  "journal path (default <output_dir>/journal.jsonl)");

  EvalOptions eval_options;
  CLI::App* eval = app.add_subcommand(
      "eval", "estimate solve rate and cost from run journals");
  eval->add_option("--journal", eval_options.journals,
                   "journal file (repeatable; one attempt each)");
  eval->add_option("--series", eval_options.series,
                   "label=journal[,journal...] (repeatable; enables the "
                   "pareto table)");
  eval->add_option("--prices", eval_options.prices,
                   "price table (key = value)");
  eval->add_option("--chunk-size", eval_options.chunk_size,
                   "attempts per chunk (must divide the attempt count)");
  eval->add_option("--output-dir", eval_options.output_dir,
                   "where to write eval_chunks.csv / summaries / svg");
  eval->add_option("--label", eval_options.label,
                   "label for single-series output");

  ReplayOptions replay_options;
  CLI::App* replay = app.add_subcommand(
      "replay", "re-execute a recorded run and compare journals");
  replay->add_option("--journal", replay_options.journal,
                     "journal of the recorded run")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_options);
    if (eval->parsed()) return cmd_eval(eval_options);
    if (replay->parsed()) return cmd_replay(replay_options);
  } catch (const nexus::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
