// Copyright 2026 The zla Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ZLA_TOOLS_CLI_H_
#define ZLA_TOOLS_CLI_H_

// Experiment orchestration behind the `zla` command: multi-seed training,
// parameter sweeps, reference codes and analysis of saved artifacts.
//
// Run directory layout written by train and sweep:
//   <out>/<system>/seed_<s>/{trace.csv,language.tsv,checkpoint.json,summary.json}
//   <out>/aggregate.json

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zla/metrics.h"
#include "zla/training.h"

namespace zla::cli {

struct AnalysisOptions {
  std::int64_t permutations = 100000;
  int substitution_repeats = 1;
  std::uint64_t seed = 0;
  int jobs = 1;
  int smooth = 0;
};

struct ExperimentSpec {
  TrainConfig base;
  std::vector<System> systems = {System::kLazImpa};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5};
  std::filesystem::path out_dir;
  int jobs = 1;
  AnalysisOptions analysis;
};

// "0,1,5" lists seeds; "a:b" is the half-open range a..b-1. Both forms may
// be mixed: "0:3,10".
std::vector<std::uint64_t> ParseSeeds(const std::string& text);
// Comma list of system names, or "all".
std::vector<System> ParseSystems(const std::string& text);

// Runs `tasks` on up to `jobs` threads. The first exception is rethrown
// after every task has finished.
void RunPool(std::vector<std::function<void()>> tasks, int jobs);

// Metrics of a finished run, as stored in summary.json.
MetricsReport AnalyzeRun(const RunTrace& trace, const AnalysisOptions& options);
nlohmann::json RunSummary(const RunTrace& trace, const MetricsReport& metrics);

// Writes the four per-run artifacts into `dir`.
void WriteRunArtifacts(const std::filesystem::path& dir, const RunTrace& trace,
                       const nlohmann::json& summary);

// Means and sample standard deviations over successful seeds, grouped by
// system and game parameters. Unsuccessful seeds are listed per group.
nlohmann::json Aggregate(const std::vector<nlohmann::json>& summaries);

// Trains every (system, seed) pair of `spec` and returns the aggregate.
nlohmann::json Train(const ExperimentSpec& spec, std::ostream& log);

struct SweepAxes {
  std::vector<int> voc_sizes;
  std::vector<int> max_lens;
  std::vector<Distribution> distributions;
};

// One Train() per grid point, in <out>/v<V>_l<L>_<distribution>. Runs of
// all grid points share the worker pool.
nlohmann::json Sweep(const ExperimentSpec& spec, const SweepAxes& axes, std::ostream& log);

enum class ReferenceKind { kOptimal, kMonkey, kVeffOptimal };
ReferenceKind ParseReferenceKind(const std::string& name);

struct ReferenceRequest {
  ReferenceKind kind = ReferenceKind::kOptimal;
  int voc_size = 40;
  int max_len = 30;
  int n_inputs = 1000;
  Distribution distribution = Distribution::kPowerLaw;
  std::uint64_t seed = 0;
  // veff-optimal: a language dump or a unigram CSV (symbol,probability).
  std::filesystem::path unigram_source;
};

Language MakeReference(const ReferenceRequest& request);

struct AnalyzeRequest {
  // A language dump, a run directory or (with frequency_list) a word list.
  std::filesystem::path input;
  bool frequency_list = false;
  int top_n = 1000;
  std::optional<std::filesystem::path> checkpoint;
  bool informativeness = false;  // require the listener-based metrics
  bool all_informative = false;  // reference-code convention instead of a listener
  std::filesystem::path out_dir;
  AnalysisOptions analysis;
};

// Computes the report and writes metrics.json plus the curve CSVs.
MetricsReport Analyze(const AnalyzeRequest& request, std::ostream& log);

// Entry point. Returns the process exit code: 0 success, 1 usage or
// configuration error, 2 runtime failure.
int Main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace zla::cli

#endif  // ZLA_TOOLS_CLI_H_
