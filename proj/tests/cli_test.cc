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

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.h"
#include "zla/errors.h"
#include "zla/serialization.h"

namespace zla::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
};

Result Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "zla");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = Main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> TinyTrain(const fs::path& out) {
  return {"train",         "--n-inputs",       "2",  "--voc-size",       "3",
          "--max-len",     "3",                "--epochs", "4",      "--batches-per-epoch",
          "3",             "--batch-size",     "16", "--speaker-hidden", "6",
          "--speaker-embed", "4",              "--listener-hidden", "6", "--listener-embed",
          "4",             "--learning-rate",  "0.01", "--entropy-coeff", "0.1", "--permutations", "200",
          "--out",         out.string()};
}

TEST(ParseTest, Seeds) {
  EXPECT_EQ(ParseSeeds("0:3"), (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_EQ(ParseSeeds("5, 7,1:3"), (std::vector<std::uint64_t>{5, 7, 1, 2}));
  EXPECT_THROW(ParseSeeds(""), ConfigError);
  EXPECT_THROW(ParseSeeds("3:3"), ConfigError);
  EXPECT_THROW(ParseSeeds("-1"), ConfigError);
  EXPECT_THROW(ParseSeeds("x"), ConfigError);
}

TEST(ParseTest, Systems) {
  EXPECT_EQ(ParseSystems("all").size(), 4u);
  EXPECT_EQ(ParseSystems("standard,lazimpa"),
            (std::vector<System>{System::kStandard, System::kLazImpa}));
  EXPECT_THROW(ParseSystems("impatient"), ConfigError);
}

TEST(MainTest, UsageErrors) {
  EXPECT_EQ(Invoke({}).code, 1);
  EXPECT_EQ(Invoke({"frobnicate"}).code, 1);
  EXPECT_EQ(Invoke({"train", "--epochs", "3"}).code, 1);  // --out missing
  EXPECT_EQ(Invoke({"--help"}).code, 0);
  testing::TempDir dir;
  auto args = TinyTrain(dir.path());
  args.push_back("--system");
  args.push_back("impatient");
  const Result r = Invoke(args);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("unknown system"), std::string::npos);
}

TEST(MainTest, TrainWritesArtifactsThatReparse) {
  testing::TempDir dir;
  auto args = TinyTrain(dir.path());
  for (const char* a : {"--seeds", "0,1", "--system", "standard,lazimpa"}) args.push_back(a);
  const Result r = Invoke(args);
  ASSERT_EQ(r.code, 0) << r.err;
  std::vector<nlohmann::json> summaries;
  for (const char* system : {"standard", "lazimpa"}) {
    for (const char* seed : {"seed_0", "seed_1"}) {
      const fs::path run = dir.path() / system / seed;
      EXPECT_EQ(LoadTrace((run / "trace.csv").string()).size(), 4u);
      const Language l = LoadLanguage((run / "language.tsv").string());
      EXPECT_EQ(l.size(), 2);
      const Checkpoint c = LoadCheckpoint((run / "checkpoint.json").string());
      EXPECT_EQ(ToString(c.config.system), system);
      const nlohmann::json s = LoadJson((run / "summary.json").string());
      EXPECT_TRUE(s.contains("successful"));
      EXPECT_TRUE(s["metrics"].contains("l_type"));
      summaries.push_back(s);
    }
  }
  const nlohmann::json aggregate = LoadJson((dir.path() / "aggregate.json").string());
  ASSERT_EQ(aggregate["groups"].size(), 2u);
  EXPECT_EQ(aggregate, Aggregate(summaries));
}

TEST(MainTest, TracesAreByteIdenticalAcrossRuns) {
  testing::TempDir a, b;
  auto args_a = TinyTrain(a.path());
  auto args_b = TinyTrain(b.path());
  for (auto* args : {&args_a, &args_b}) {
    for (const char* x : {"--seeds", "3", "--system", "lazimpa"}) args->push_back(x);
  }
  args_b.push_back("--jobs");
  args_b.push_back("2");
  ASSERT_EQ(Invoke(args_a).code, 0);
  ASSERT_EQ(Invoke(args_b).code, 0);
  const fs::path rel = fs::path("lazimpa") / "seed_3";
  EXPECT_EQ(ReadFile(a.path() / rel / "trace.csv"), ReadFile(b.path() / rel / "trace.csv"));
  EXPECT_EQ(ReadFile(a.path() / rel / "language.tsv"), ReadFile(b.path() / rel / "language.tsv"));
}

TEST(MainTest, AblationSpecHasFourGroups) {
  testing::TempDir dir;
  auto args = TinyTrain(dir.path());
  for (const char* x : {"--seeds", "0", "--system", "all", "--epochs", "1", "--jobs", "2"}) {
    args.push_back(x);
  }
  ASSERT_EQ(Invoke(args).code, 0);
  const auto aggregate = LoadJson((dir.path() / "aggregate.json").string());
  ASSERT_EQ(aggregate["groups"].size(), 4u);
  std::vector<std::string> names;
  for (const auto& g : aggregate["groups"]) names.push_back(g["system"]);
  EXPECT_EQ(names, (std::vector<std::string>{"standard", "lazy+standard", "standard+impatient",
                                             "lazimpa"}));
}

TEST(MainTest, ConfigFileWithFlagOverride) {
  testing::TempDir dir;
  const fs::path config = dir.path() / "run.toml";
  {
    std::ofstream out(config);
    out << "n-inputs = 2\nvoc-size = 3\nmax-len = 3\nepochs = 2\nbatches-per-epoch = 2\n"
           "batch-size = 8\nspeaker-hidden = 4\nspeaker-embed = 2\nlistener-hidden = 4\n"
           "listener-embed = 2\nsystem = \"standard\"\nseeds = \"0\"\npermutations = 100\n";
  }
  ASSERT_EQ(Invoke({"train", "--config", config.string(), "--out", (dir.path() / "a").string()}).code,
            0);
  EXPECT_EQ(LoadTrace((dir.path() / "a/standard/seed_0/trace.csv").string()).size(), 2u);
  ASSERT_EQ(Invoke({"train", "--config", config.string(), "--epochs", "3", "--out",
                 (dir.path() / "b").string()})
                .code,
            0);
  EXPECT_EQ(LoadTrace((dir.path() / "b/standard/seed_0/trace.csv").string()).size(), 3u);
}

TEST(MainTest, ConfigFileErrors) {
  testing::TempDir dir;
  const fs::path config = dir.path() / "bad.toml";
  {
    std::ofstream out(config);
    out << "[train]\nepochs = 2\n";
  }
  const Result sections =
      Invoke({"train", "--config", config.string(), "--out", (dir.path() / "a").string()});
  EXPECT_EQ(sections.code, 1);
  EXPECT_NE(sections.err.find("sections"), std::string::npos);
  EXPECT_EQ(Invoke({"train", "--config", (dir.path() / "missing.toml").string(), "--out",
                    (dir.path() / "b").string()})
                .code,
            1);
  EXPECT_FALSE(fs::exists(dir.path() / "a"));
}

TEST(MainTest, SweepCoversGrid) {
  testing::TempDir dir;
  auto args = TinyTrain(dir.path());
  args[0] = "sweep";
  for (const char* x : {"--seeds", "0", "--voc-sizes", "3,4", "--max-lens", "3",
                        "--distributions", "uniform", "--epochs", "1"}) {
    args.push_back(x);
  }
  const Result r = Invoke(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto sweep = LoadJson((dir.path() / "sweep.json").string());
  ASSERT_EQ(sweep["points"].size(), 2u);
  EXPECT_TRUE(fs::exists(dir.path() / "v4_l3_uniform" / "lazimpa" / "seed_0" / "trace.csv"));
}

TEST(ReferenceTest, OptimalAndMonkey) {
  const Result r = Invoke({"reference", "optimal", "--voc-size", "3", "--n-inputs", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  const Language l = ReadLanguageTsv(in);
  EXPECT_EQ(l.messages[0].Length(), 1);
  EXPECT_EQ(l.messages[1].Length(), 2);
  EXPECT_EQ(l.messages[2].Length(), 2);

  const std::vector<std::string> monkey = {"reference", "monkey", "--seed", "5", "--n-inputs",
                                           "50"};
  EXPECT_EQ(Invoke(monkey).out, Invoke(monkey).out);
  EXPECT_EQ(Invoke({"reference", "optimal", "--voc-size", "2", "--n-inputs", "40", "--max-len", "5"})
                .code,
            1);
  EXPECT_EQ(Invoke({"reference", "huffman"}).code, 1);
}

TEST(ReferenceTest, VeffOptimalFromUniformUnigrams) {
  testing::TempDir dir;
  const fs::path csv = dir.path() / "u.csv";
  {
    std::ofstream out(csv);
    out << "symbol,probability\n";
    for (int s = 1; s <= 39; ++s) out << s << ',' << 1.0 / 39 << '\n';
  }
  const Result veff = Invoke({"reference", "veff-optimal", "--unigrams", csv.string()});
  ASSERT_EQ(veff.code, 0) << veff.err;
  std::istringstream a(veff.out), b(Invoke({"reference", "optimal", "--voc-size", "40"}).out);
  EXPECT_EQ(ReadLanguageTsv(a), ReadLanguageTsv(b));
  EXPECT_EQ(Invoke({"reference", "veff-optimal"}).code, 1);
}

TEST(AnalyzeTest, OptimalDump) {
  testing::TempDir dir;
  const fs::path dump = dir.path() / "opt.tsv";
  ASSERT_EQ(Invoke({"reference", "optimal", "--out", dump.string()}).code, 0);
  const fs::path out = dir.path() / "analysis";
  const Result r = Invoke({"analyze", dump.string(), "--all-informative", "--permutations", "2000",
                        "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = LoadJson((out / "metrics.json").string());
  EXPECT_NEAR(m["l_type"].get<double>(), 2.96, 0.005);
  EXPECT_NEAR(m["l_token"].get<double>(), 2.29, 0.005);
  EXPECT_LT(m["p_zla_left"].get<double>(), 1e-3);
  EXPECT_NEAR(m["l_eff"].get<double>(), 1.96, 0.005);
  EXPECT_EQ(m["rho_inf"].get<double>(), 1.0);
  EXPECT_TRUE(fs::exists(out / "length_by_rank.csv"));
  EXPECT_TRUE(fs::exists(out / "spectrum.csv"));
  EXPECT_TRUE(fs::exists(out / "unigrams.csv"));
}

TEST(AnalyzeTest, LambdaWithoutCheckpointIsAnError) {
  testing::TempDir dir;
  const fs::path dump = dir.path() / "opt.tsv";
  ASSERT_EQ(Invoke({"reference", "optimal", "--voc-size", "5", "--n-inputs", "20", "--out",
                 dump.string()})
                .code,
            0);
  const Result r = Invoke({"analyze", dump.string(), "--informativeness"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("checkpoint"), std::string::npos);
  const Result plain = Invoke({"analyze", dump.string(), "--permutations", "100"});
  EXPECT_EQ(plain.code, 0);
  EXPECT_EQ(Invoke({"analyze", (dir.path() / "missing.tsv").string()}).code, 2);
}

TEST(AnalyzeTest, FrequencyListMarksLambdaAbsent) {
  testing::TempDir dir;
  const fs::path list = dir.path() / "words.txt";
  {
    std::ofstream out(list);
    const char* words[] = {"a", "of", "the", "and", "house", "beautiful", "to", "in"};
    for (int i = 0; i < 8; ++i) out << i + 1 << ' ' << 1000 / (i + 1) << ' ' << words[i] << '\n';
  }
  const fs::path out = dir.path() / "an";
  const Result r = Invoke({"analyze", list.string(), "--frequency-list", "--permutations", "500",
                        "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = LoadJson((out / "metrics.json").string());
  EXPECT_EQ(m["n_messages"], 8);
  EXPECT_EQ(m["l_eff"], "/");
  EXPECT_EQ(m["rho_inf"], "/");
  EXPECT_EQ(Invoke({"analyze", list.string(), "--frequency-list", "--informativeness"}).code, 1);
}

TEST(AnalyzeTest, RunDirectory) {
  testing::TempDir dir;
  auto args = TinyTrain(dir.path());
  for (const char* x : {"--seeds", "0", "--system", "standard+impatient"}) args.push_back(x);
  ASSERT_EQ(Invoke(args).code, 0);
  const fs::path run = dir.path() / "standard+impatient" / "seed_0";
  const fs::path out = dir.path() / "an";
  const Result r = Invoke({"analyze", run.string(), "--permutations", "100", "--out", out.string(),
                        "--smooth", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out / "learning_path.csv"));
  const auto m = LoadJson((out / "metrics.json").string());
  EXPECT_TRUE(m["n_reconstructed"].is_number());
  EXPECT_TRUE(m["delta_stab"].is_number());
  // Same artifacts, same analysis seed: same report.
  const Result again = Invoke({"analyze", run.string(), "--permutations", "100"});
  EXPECT_EQ(again.out, Invoke({"analyze", run.string(), "--permutations", "100"}).out);
}

TEST(AggregateTest, MeansOverSuccessfulSeedsOnly) {
  auto summary = [](std::uint64_t seed, bool ok, double l_type) {
    TrainConfig c;
    c.seed = seed;
    MetricsReport m;
    m.l_type = l_type;
    return nlohmann::json{{"system", "lazimpa"},       {"seed", seed},
                          {"config", ConfigToJson(c)}, {"successful", ok},
                          {"aborted", false},          {"diagnostic", ""},
                          {"final_uniform_accuracy", ok ? 1.0 : 0.5},
                          {"metrics", MetricsToJson(m)}};
  };
  const auto a = Aggregate({summary(0, true, 2.0), summary(1, false, 9.0), summary(2, true, 4.0)});
  ASSERT_EQ(a["groups"].size(), 1u);
  const auto& g = a["groups"][0];
  EXPECT_EQ(g["runs"], 3);
  EXPECT_EQ(g["successful_seeds"], (nlohmann::json{0, 2}));
  EXPECT_EQ(g["unsuccessful"][0]["seed"], 1);
  EXPECT_DOUBLE_EQ(g["metrics"]["l_type"]["mean"].get<double>(), 3.0);
  EXPECT_DOUBLE_EQ(g["metrics"]["l_type"]["sd"].get<double>(), std::sqrt(2.0));
  EXPECT_FALSE(g["metrics"].contains("l_eff"));
}

}  // namespace
}  // namespace zla::cli
