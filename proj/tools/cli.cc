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

#include "cli.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "zla/errors.h"
#include "zla/refcodes.h"
#include "zla/serialization.h"

namespace zla::cli {
namespace fs = std::filesystem;
namespace {

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::uint64_t ParseU64(const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || text[0] == '-') {
    throw ConfigError("not a non-negative integer: '" + text + "'");
  }
  return v;
}

template <typename T, typename F>
std::vector<T> ParseList(const std::string& text, F parse) {
  std::vector<T> out;
  for (const auto& item : SplitList(text)) out.push_back(parse(item));
  if (out.empty()) throw ConfigError("empty list: '" + text + "'");
  return out;
}

void EnsureDirectory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  }
}

std::string SeedDirName(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

struct PlannedRuns {
  std::vector<std::function<void()>> tasks;
  // One slot per run, filled by the task.
  std::shared_ptr<std::vector<nlohmann::json>> summaries;
};

PlannedRuns PlanRuns(const ExperimentSpec& spec, std::ostream& log, std::mutex& log_mutex) {
  if (spec.seeds.empty()) throw ConfigError("at least one seed is required");
  if (spec.systems.empty()) throw ConfigError("at least one system is required");
  if (spec.jobs < 1) throw ConfigError("--jobs must be >= 1");
  spec.base.Validate();
  EnsureDirectory(spec.out_dir);

  PlannedRuns plan;
  plan.summaries = std::make_shared<std::vector<nlohmann::json>>(spec.systems.size() *
                                                                 spec.seeds.size());
  std::size_t slot = 0;
  for (System system : spec.systems) {
    for (std::uint64_t seed : spec.seeds) {
      TrainConfig config = spec.base;
      config.system = system;
      config.seed = seed;
      const fs::path dir = spec.out_dir / std::string(ToString(system)) / SeedDirName(seed);
      EnsureDirectory(dir);
      auto summaries = plan.summaries;
      const AnalysisOptions analysis = spec.analysis;
      plan.tasks.push_back([config, dir, summaries, slot, analysis, &log, &log_mutex] {
        const RunTrace trace = zla::Train(config);
        const MetricsReport metrics = AnalyzeRun(trace, analysis);
        nlohmann::json summary = RunSummary(trace, metrics);
        WriteRunArtifacts(dir, trace, summary);
        {
          std::lock_guard<std::mutex> lock(log_mutex);
          log << ToString(config.system) << " seed " << config.seed << ": accuracy "
              << trace.final_uniform_accuracy << ", L_type " << metrics.l_type << ", L_token "
              << metrics.l_token << (trace.successful ? "" : " (unsuccessful)")
              << (trace.aborted ? " aborted: " + trace.diagnostic : "") << '\n';
        }
        (*summaries)[slot] = std::move(summary);
      });
      ++slot;
    }
  }
  return plan;
}

std::vector<double> ReadUnigramCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("symbol,probability", 0) != 0) {
    throw IoError(path.string() + ": expected a symbol,probability header");
  }
  std::vector<double> probs;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError(path.string() + ": malformed line " + line);
    try {
      probs.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw IoError(path.string() + ": malformed line " + line);
    }
  }
  if (probs.empty()) throw IoError(path.string() + ": no unigram entries");
  return probs;
}

bool IsLanguageDump(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  return std::getline(in, line) && line.rfind("# zla-language", 0) == 0;
}

template <typename Writer>
void WriteFile(const fs::path& path, Writer write) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write(out);
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

void AddInformativenessFromListener(const Language& language, const Checkpoint& checkpoint,
                                    const AnalysisOptions& options, Rng& rng,
                                    MetricsReport* report) {
  const ListenerKind kind = ListenerKindOf(checkpoint.config.system);
  const BatchPredictor predictor = ListenerPredictor(kind, checkpoint.listener);
  SubstitutionOptions sub;
  sub.repeats = options.substitution_repeats;
  sub.seed = options.seed;
  sub.jobs = options.jobs;
  const InformativenessMatrix lambda = Informativeness(language, predictor, sub);
  AddInformativeness(lambda, language, options.permutations, rng, report);
  if (kind == ListenerKind::kImpatient) {
    const MinimalLengthResult minimal = MinimalRequiredLength(language, checkpoint.listener);
    if (minimal.num_reconstructed > 0) report->minimal_length = minimal.mean_length;
    if (minimal.monotonicity_violations > 0) {
      LogWarning("minimal required length: " + std::to_string(minimal.monotonicity_violations) +
                 " inputs are predicted correctly before their stable suffix");
    }
  }
}

void AddUnigramStats(const Language& language, MetricsReport* report) {
  try {
    report->v_eff = EffectiveVocabSize(Unigrams(language));
  } catch (const ConfigError&) {
    // Only (EOS) messages: no unigram distribution.
  }
}

void PrintReport(const MetricsReport& r, std::ostream& log) {
  log << "messages        " << r.n_messages << '\n'
      << "L_type          " << r.l_type << '\n'
      << "L_token         " << r.l_token << '\n'
      << "p_ZLA (left)    " << r.p_zla_left << '\n'
      << "p_ZLA (right)   " << r.p_zla_right << '\n';
  auto opt = [&](const char* name, const auto& v) {
    log << name;
    if (v) {
      log << *v << '\n';
    } else {
      log << "/\n";
    }
  };
  opt("reconstructed   ", r.n_reconstructed);
  opt("L_eff           ", r.l_eff);
  opt("rho_inf         ", r.rho_inf);
  opt("min length      ", r.minimal_length);
  opt("V_eff           ", r.v_eff);
  opt("delta_stab      ", r.delta_stab);
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::uint64_t> ParseSeeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : SplitList(text)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      seeds.push_back(ParseU64(item));
      continue;
    }
    const std::uint64_t lo = ParseU64(item.substr(0, colon));
    const std::uint64_t hi = ParseU64(item.substr(colon + 1));
    if (hi <= lo) throw ConfigError("empty seed range '" + item + "'");
    for (std::uint64_t s = lo; s < hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw ConfigError("no seeds given");
  return seeds;
}

std::vector<System> ParseSystems(const std::string& text) {
  if (text == "all") return {AllSystems().begin(), AllSystems().end()};
  return ParseList<System>(text, [](const std::string& s) { return ParseSystem(s); });
}

void RunPool(std::vector<std::function<void()>> tasks, int jobs) {
  std::mutex mutex;
  std::size_t next = 0;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      std::size_t index;
      {
        std::lock_guard<std::mutex> lock(mutex);
        if (next >= tasks.size()) return;
        index = next++;
      }
      try {
        tasks[index]();
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const int workers = std::clamp<int>(jobs, 1, std::max<int>(1, static_cast<int>(tasks.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

MetricsReport AnalyzeRun(const RunTrace& trace, const AnalysisOptions& options) {
  Rng rng = Rng::Stream(options.seed, 0);
  MetricsReport report = LengthReport(ToMapping(trace.language), options.permutations, rng);
  Checkpoint checkpoint{trace.config, trace.speaker, trace.listener};
  AddInformativenessFromListener(trace.language, checkpoint, options, rng, &report);
  AddUnigramStats(trace.language, &report);
  if (trace.epochs.size() >= 3) {
    std::vector<double> accuracy;
    for (const auto& e : trace.epochs) accuracy.push_back(e.uniform_accuracy);
    report.delta_stab = DeltaStab(accuracy);
  }
  return report;
}

nlohmann::json RunSummary(const RunTrace& trace, const MetricsReport& metrics) {
  return {
      {"system", std::string(ToString(trace.config.system))},
      {"seed", trace.config.seed},
      {"config", ConfigToJson(trace.config)},
      {"epochs_run", trace.epochs.size()},
      {"successful", trace.successful},
      {"aborted", trace.aborted},
      {"diagnostic", trace.diagnostic},
      {"final_uniform_accuracy", trace.final_uniform_accuracy},
      {"final_weighted_accuracy", trace.final_weighted_accuracy},
      {"metrics", MetricsToJson(metrics)},
  };
}

void WriteRunArtifacts(const fs::path& dir, const RunTrace& trace, const nlohmann::json& summary) {
  EnsureDirectory(dir);
  SaveTrace((dir / "trace.csv").string(), trace.epochs);
  SaveLanguage((dir / "language.tsv").string(), trace.language,
               std::string(ToString(trace.config.system)) + "/seed_" +
                   std::to_string(trace.config.seed));
  SaveCheckpoint((dir / "checkpoint.json").string(),
                 Checkpoint{trace.config, trace.speaker, trace.listener});
  SaveJson((dir / "summary.json").string(), summary);
}

nlohmann::json Aggregate(const std::vector<nlohmann::json>& summaries) {
  struct Group {
    nlohmann::json key;
    std::vector<const nlohmann::json*> runs;
  };
  std::vector<Group> groups;
  for (const auto& s : summaries) {
    const auto& c = s.at("config");
    const nlohmann::json key = {
        {"system", s.at("system")},       {"n_inputs", c.at("n_inputs")},
        {"voc_size", c.at("voc_size")},   {"max_len", c.at("max_len")},
        {"distribution", c.at("distribution")},
    };
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.key == key; });
    if (it == groups.end()) {
      groups.push_back({key, {}});
      it = groups.end() - 1;
    }
    it->runs.push_back(&s);
  }

  nlohmann::json out = {{"groups", nlohmann::json::array()}};
  for (const auto& g : groups) {
    nlohmann::json group = g.key;
    nlohmann::json successful = nlohmann::json::array();
    nlohmann::json unsuccessful = nlohmann::json::array();
    std::map<std::string, std::vector<double>> values;
    std::vector<std::string> order;
    auto add = [&](const std::string& name, const nlohmann::json& v) {
      if (!v.is_number()) return;
      if (!values.count(name)) order.push_back(name);
      values[name].push_back(v.get<double>());
    };
    for (const nlohmann::json* run : g.runs) {
      if (!run->at("successful").get<bool>()) {
        unsuccessful.push_back({{"seed", run->at("seed")},
                                {"final_uniform_accuracy", run->at("final_uniform_accuracy")},
                                {"aborted", run->at("aborted")},
                                {"diagnostic", run->at("diagnostic")}});
        continue;
      }
      successful.push_back(run->at("seed"));
      add("final_uniform_accuracy", run->at("final_uniform_accuracy"));
      for (const auto& [name, v] : run->at("metrics").items()) add(name, v);
    }
    nlohmann::json stats = nlohmann::json::object();
    for (const auto& name : order) {
      const auto& v = values[name];
      const double n = static_cast<double>(v.size());
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= n;
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      stats[name] = {{"mean", mean}, {"sd", sd}, {"n", v.size()}};
    }
    group["runs"] = g.runs.size();
    group["successful_seeds"] = std::move(successful);
    group["unsuccessful"] = std::move(unsuccessful);
    group["metrics"] = std::move(stats);
    out["groups"].push_back(std::move(group));
  }
  return out;
}

nlohmann::json Train(const ExperimentSpec& spec, std::ostream& log) {
  std::mutex log_mutex;
  PlannedRuns plan = PlanRuns(spec, log, log_mutex);
  RunPool(std::move(plan.tasks), spec.jobs);
  nlohmann::json aggregate = Aggregate(*plan.summaries);
  SaveJson((spec.out_dir / "aggregate.json").string(), aggregate);
  return aggregate;
}

nlohmann::json Sweep(const ExperimentSpec& spec, const SweepAxes& axes, std::ostream& log) {
  std::mutex log_mutex;
  struct Point {
    ExperimentSpec spec;
    PlannedRuns plan;
  };
  std::vector<Point> points;
  std::vector<std::function<void()>> tasks;
  for (int voc : axes.voc_sizes) {
    for (int len : axes.max_lens) {
      for (Distribution dist : axes.distributions) {
        Point p;
        p.spec = spec;
        p.spec.base.voc_size = voc;
        p.spec.base.max_len = len;
        p.spec.base.distribution = dist;
        p.spec.out_dir = spec.out_dir / ("v" + std::to_string(voc) + "_l" + std::to_string(len) +
                                         "_" + std::string(ToString(dist)));
        p.plan = PlanRuns(p.spec, log, log_mutex);
        for (auto& t : p.plan.tasks) tasks.push_back(std::move(t));
        points.push_back(std::move(p));
      }
    }
  }
  if (points.empty()) throw ConfigError("sweep grid is empty");
  RunPool(std::move(tasks), spec.jobs);

  nlohmann::json out = {{"points", nlohmann::json::array()}};
  for (const auto& p : points) {
    nlohmann::json aggregate = Aggregate(*p.plan.summaries);
    SaveJson((p.spec.out_dir / "aggregate.json").string(), aggregate);
    out["points"].push_back({{"voc_size", p.spec.base.voc_size},
                             {"max_len", p.spec.base.max_len},
                             {"distribution", std::string(ToString(p.spec.base.distribution))},
                             {"aggregate", std::move(aggregate)}});
  }
  SaveJson((spec.out_dir / "sweep.json").string(), out);
  return out;
}

// ---------------------------------------------------------------------------

ReferenceKind ParseReferenceKind(const std::string& name) {
  if (name == "optimal") return ReferenceKind::kOptimal;
  if (name == "monkey") return ReferenceKind::kMonkey;
  if (name == "veff-optimal") return ReferenceKind::kVeffOptimal;
  throw ConfigError("unknown reference kind '" + name + "' (optimal, monkey, veff-optimal)");
}

Language MakeReference(const ReferenceRequest& r) {
  const InputSpace space(r.n_inputs, r.distribution);
  switch (r.kind) {
    case ReferenceKind::kOptimal:
      return OptimalCoding(r.voc_size, space, r.max_len);
    case ReferenceKind::kMonkey: {
      Rng rng(r.seed);
      return MonkeyLanguage(r.voc_size, r.max_len, space, rng);
    }
    case ReferenceKind::kVeffOptimal: {
      if (r.unigram_source.empty()) {
        throw ConfigError("veff-optimal needs a unigram source (language dump or unigram CSV)");
      }
      UnigramDistribution unigrams;
      if (IsLanguageDump(r.unigram_source)) {
        unigrams = Unigrams(LoadLanguage(r.unigram_source.string()));
      } else {
        unigrams.probs = ReadUnigramCsv(r.unigram_source);
      }
      const int voc = EffectiveOptimalVocSize(EffectiveVocabSize(unigrams));
      return OptimalCoding(voc, space, r.max_len);
    }
  }
  throw InternalError("unhandled reference kind");
}

MetricsReport Analyze(const AnalyzeRequest& request, std::ostream& log) {
  const AnalysisOptions& options = request.analysis;
  Rng rng = Rng::Stream(options.seed, 0);
  const bool write = !request.out_dir.empty();
  if (write) EnsureDirectory(request.out_dir);

  if (request.frequency_list) {
    if (request.informativeness || request.all_informative || request.checkpoint) {
      throw ConfigError(
          "informativeness metrics are unavailable for a frequency list: it has no messages "
          "and no listener");
    }
    const FrequencyList list = LoadFrequencyList(request.input.string(), request.top_n);
    for (const auto& w : list.warnings) LogWarning(w);
    MetricsReport report = LengthReport(list.mapping, options.permutations, rng);
    if (write) {
      SaveJson((request.out_dir / "metrics.json").string(), MetricsToJson(report));
      WriteFile(request.out_dir / "length_by_rank.csv",
                [&](std::ostream& out) { WriteLengthByRankCsv(out, list.mapping, options.smooth); });
    }
    PrintReport(report, log);
    return report;
  }

  fs::path language_path = request.input;
  std::optional<fs::path> checkpoint_path = request.checkpoint;
  std::optional<fs::path> trace_path;
  if (fs::is_directory(request.input)) {
    language_path = request.input / "language.tsv";
    if (!checkpoint_path && fs::exists(request.input / "checkpoint.json")) {
      checkpoint_path = request.input / "checkpoint.json";
    }
    if (fs::exists(request.input / "trace.csv")) trace_path = request.input / "trace.csv";
  }
  const Language language = LoadLanguage(language_path.string());
  const FrequencyLengthMapping mapping = ToMapping(language);
  MetricsReport report = LengthReport(mapping, options.permutations, rng);

  if (request.all_informative) {
    AddInformativeness(AllInformative(language), language, options.permutations, rng, &report);
  } else if (checkpoint_path) {
    const Checkpoint checkpoint = LoadCheckpoint(checkpoint_path->string());
    if (checkpoint.config.n_inputs != language.size() ||
        checkpoint.config.voc_size != language.alphabet.voc_size ||
        checkpoint.config.max_len != language.alphabet.max_len) {
      throw ConfigError("checkpoint " + checkpoint_path->string() +
                        " does not match the language (inputs, voc_size or max_len differ)");
    }
    AddInformativenessFromListener(language, checkpoint, options, rng, &report);
  } else if (request.informativeness) {
    throw ConfigError(
        "informativeness metrics (Lambda, L_eff, rho_inf) need the listener: pass --checkpoint "
        "or analyze a run directory that contains checkpoint.json");
  }
  AddUnigramStats(language, &report);

  std::vector<EpochRecord> epochs;
  if (trace_path) {
    epochs = LoadTrace(trace_path->string());
    if (epochs.size() >= 3) {
      std::vector<double> accuracy;
      for (const auto& e : epochs) accuracy.push_back(e.uniform_accuracy);
      report.delta_stab = DeltaStab(accuracy);
    }
  }

  if (write) {
    SaveJson((request.out_dir / "metrics.json").string(), MetricsToJson(report));
    WriteFile(request.out_dir / "length_by_rank.csv",
              [&](std::ostream& out) { WriteLengthByRankCsv(out, mapping, options.smooth); });
    if (report.n_reconstructed) {
      WriteFile(request.out_dir / "spectrum.csv",
                [&](std::ostream& out) { WriteSpectrumCsv(out, report.spectrum); });
    }
    if (trace_path) {
      WriteFile(request.out_dir / "learning_path.csv",
                [&](std::ostream& out) { WriteLearningPathCsv(out, epochs, options.smooth); });
    }
    if (report.v_eff) {
      WriteFile(request.out_dir / "unigrams.csv",
                [&](std::ostream& out) { WriteUnigramCsv(out, Unigrams(language)); });
    }
  }
  PrintReport(report, log);
  return report;
}

// ---------------------------------------------------------------------------
// Command line

namespace {

struct TrainFlags {
  std::string systems = "lazimpa";
  std::string seeds = "0:6";
  std::string distribution = "powerlaw";
};

void AddTrainConfigFlags(CLI::App* app, TrainConfig* c, TrainFlags* f) {
  app->add_option("--system", f->systems, "System list: standard, lazy+standard, "
                                          "standard+impatient, lazimpa, or all")
      ->capture_default_str();
  app->add_option("--seeds", f->seeds, "Seeds, e.g. 0,1,2 or 0:6 (half-open)")
      ->capture_default_str();
  app->add_option("--n-inputs", c->n_inputs, "Number of inputs")->capture_default_str();
  app->add_option("--voc-size", c->voc_size, "Vocabulary size, EOS included")
      ->capture_default_str();
  app->add_option("--max-len", c->max_len, "Maximum message length, EOS included")
      ->capture_default_str();
  app->add_option("--distribution", f->distribution, "powerlaw or uniform")
      ->capture_default_str();
  app->add_option("--epochs", c->epochs)->capture_default_str();
  app->add_option("--batches-per-epoch", c->batches_per_epoch)->capture_default_str();
  app->add_option("--batch-size", c->batch_size)->capture_default_str();
  app->add_option("--learning-rate", c->learning_rate)->capture_default_str();
  app->add_option("--entropy-coeff", c->entropy_coeff)->capture_default_str();
  app->add_option("--schedule-beta1", c->schedule_beta1)->capture_default_str();
  app->add_option("--schedule-beta2", c->schedule_beta2)->capture_default_str();
  app->add_option("--accuracy-ema-decay", c->accuracy_ema_decay)->capture_default_str();
  app->add_option("--success-threshold", c->success_threshold)->capture_default_str();
  app->add_option("--speaker-hidden", c->speaker_hidden)->capture_default_str();
  app->add_option("--speaker-embed", c->speaker_embed)->capture_default_str();
  app->add_option("--listener-hidden", c->listener_hidden)->capture_default_str();
  app->add_option("--listener-embed", c->listener_embed)->capture_default_str();
}

void AddAnalysisFlags(CLI::App* app, AnalysisOptions* a, bool with_jobs) {
  app->add_option("--permutations", a->permutations, "Randomization-test permutations")
      ->capture_default_str();
  app->add_option("--substitution-repeats", a->substitution_repeats,
                  "Substitutions per position in the informativeness test")
      ->capture_default_str();
  app->add_option("--analysis-seed", a->seed)->capture_default_str();
  app->add_option("--smooth", a->smooth, "Sliding-average window for curve CSVs (0: raw)")
      ->capture_default_str();
  if (with_jobs) app->add_option("--jobs", a->jobs, "Worker threads")->capture_default_str();
}

// Splices the key/value pairs of a train or sweep "--config FILE" in front of
// the remaining flags, so explicit flags (last one wins) override the file.
std::vector<std::string> ExpandConfigFile(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || (args[0] != "train" && args[0] != "sweep")) return args;
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty()) return args;
  std::vector<std::string> expanded;
  for (const CLI::ConfigItem& item : CLI::ConfigTOML().from_file(path)) {
    if (!item.parents.empty() || item.name == "++" || item.name == "--") {
      throw ConfigError("config file " + path + ": sections are not supported");
    }
    std::string value;
    for (const std::string& input : item.inputs) {
      value += (value.empty() ? "" : ",") + input;
    }
    expanded.push_back("--" + item.name + "=" + value);
  }
  args.insert(args.begin() + 1, expanded.begin(), expanded.end());
  return args;
}

}  // namespace

int Main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app("Speaker/listener communication games and code-efficiency analysis", "zla");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  ExperimentSpec spec;
  TrainFlags train_flags;
  std::string out_dir, config_path;

  auto* train = app.add_subcommand("train", "Train systems over several seeds");
  train->add_option("--config", config_path, "Key/value config file; flags override it");
  AddTrainConfigFlags(train, &spec.base, &train_flags);
  train->add_option("--out", out_dir, "Output directory")->required();
  train->add_option("--jobs", spec.jobs, "Concurrent runs")->capture_default_str();
  AddAnalysisFlags(train, &spec.analysis, false);

  auto* sweep = app.add_subcommand("sweep", "Train over a grid of game parameters");
  sweep->add_option("--config", config_path, "Key/value config file; flags override it");
  AddTrainConfigFlags(sweep, &spec.base, &train_flags);
  std::string sweep_voc = "10,20,30,40", sweep_len = "20,30", sweep_dist = "powerlaw,uniform";
  sweep->add_option("--voc-sizes", sweep_voc)->capture_default_str();
  sweep->add_option("--max-lens", sweep_len)->capture_default_str();
  sweep->add_option("--distributions", sweep_dist)->capture_default_str();
  sweep->add_option("--out", out_dir, "Output directory")->required();
  sweep->add_option("--jobs", spec.jobs, "Concurrent runs")->capture_default_str();
  AddAnalysisFlags(sweep, &spec.analysis, false);

  ReferenceRequest ref;
  std::string ref_kind = "optimal", ref_dist = "powerlaw", ref_out;
  auto* reference = app.add_subcommand("reference", "Write a reference code as a language dump");
  reference->add_option("kind", ref_kind, "optimal, monkey or veff-optimal")->required();
  reference->add_option("--voc-size", ref.voc_size)->capture_default_str();
  reference->add_option("--max-len", ref.max_len)->capture_default_str();
  reference->add_option("--n-inputs", ref.n_inputs)->capture_default_str();
  reference->add_option("--distribution", ref_dist)->capture_default_str();
  reference->add_option("--seed", ref.seed, "Monkey Typing seed")->capture_default_str();
  reference->add_option("--unigrams", ref.unigram_source,
                        "veff-optimal: language dump or unigram CSV");
  reference->add_option("--out", ref_out, "Output file (default: stdout)");

  AnalyzeRequest an;
  std::string an_input, an_checkpoint, an_out;
  auto* analyze = app.add_subcommand("analyze", "Metrics of a language dump, run or word list");
  analyze->add_option("input", an_input, "Language dump, run directory or frequency list")
      ->required();
  analyze->add_flag("--frequency-list", an.frequency_list, "Input is a rank/frequency/word list");
  analyze->add_option("--top-n", an.top_n, "Entries read from a frequency list")
      ->capture_default_str();
  analyze->add_option("--checkpoint", an_checkpoint, "Checkpoint with the listener");
  analyze->add_flag("--informativeness", an.informativeness,
                    "Require the informativeness metrics");
  analyze->add_flag("--all-informative", an.all_informative,
                    "Treat every non-EOS symbol as informative (reference codes)");
  analyze->add_option("--out", an_out, "Directory for metrics.json and curve CSVs");
  AddAnalysisFlags(analyze, &an.analysis, true);

  try {
    std::vector<std::string> args = ExpandConfigFile(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const ConfigError& e) {
    err << "zla: " << e.what() << '\n';
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train->parsed() || sweep->parsed()) {
      spec.base.distribution = ParseDistribution(train_flags.distribution);
      spec.systems = ParseSystems(train_flags.systems);
      spec.seeds = ParseSeeds(train_flags.seeds);
      spec.out_dir = out_dir;
      spec.analysis.jobs = 1;
      if (train->parsed()) {
        Train(spec, err);
      } else {
        SweepAxes axes;
        axes.voc_sizes = ParseList<int>(sweep_voc, [](const std::string& s) {
          return static_cast<int>(ParseU64(s));
        });
        axes.max_lens = ParseList<int>(sweep_len, [](const std::string& s) {
          return static_cast<int>(ParseU64(s));
        });
        axes.distributions = ParseList<Distribution>(
            sweep_dist, [](const std::string& s) { return ParseDistribution(s); });
        Sweep(spec, axes, err);
      }
      out << "wrote " << out_dir << '\n';
    } else if (reference->parsed()) {
      ref.kind = ParseReferenceKind(ref_kind);
      ref.distribution = ParseDistribution(ref_dist);
      const Language language = MakeReference(ref);
      if (ref_out.empty()) {
        WriteLanguageTsv(out, language, ref_kind);
      } else {
        SaveLanguage(ref_out, language, ref_kind);
      }
    } else if (analyze->parsed()) {
      an.input = an_input;
      if (!an_checkpoint.empty()) an.checkpoint = an_checkpoint;
      an.out_dir = an_out;
      Analyze(an, out);
    }
  } catch (const std::invalid_argument& e) {  // ConfigError
    err << "zla: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "zla: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace zla::cli
