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

#include "zla/game.h"

#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "zla/errors.h"
#include "zla/random.h"

namespace zla {
namespace {

TEST(RngTest, UniformIntStaysInRange) {
  Rng rng(7);
  std::vector<int> counts(3, 0);
  for (int i = 0; i < 30000; ++i) {
    const auto v = rng.UniformInt(3);
    ASSERT_LT(v, 3u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(RngTest, StreamsAreReproducibleAndDistinct) {
  Rng a = Rng::Stream(5, 0), b = Rng::Stream(5, 0), c = Rng::Stream(5, 1), d = Rng::Stream(6, 0);
  const auto x = a.NextRaw();
  EXPECT_EQ(x, b.NextRaw());
  EXPECT_NE(x, c.NextRaw());
  EXPECT_NE(x, d.NextRaw());
}

TEST(RngTest, UniformInUnitInterval) {
  Rng rng(8);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.Uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(InputSpaceTest, PowerLawProbabilities) {
  const InputSpace space(1000, Distribution::kPowerLaw);
  double sum = 0.0;
  for (double p : space.probabilities()) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_NEAR(space.Probability(0) / space.Probability(1), 2.0, 1e-12);
  EXPECT_NEAR(space.Probability(0) / space.Probability(999), 1000.0, 1e-9);
  double harmonic = 0.0;
  for (int k = 1; k <= 1000; ++k) harmonic += 1.0 / k;
  EXPECT_NEAR(space.Probability(0), 1.0 / harmonic, 1e-15);
}

TEST(InputSpaceTest, UniformProbabilities) {
  const InputSpace space(4, Distribution::kUniform);
  for (int k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(space.Probability(k), 0.25);
}

TEST(InputSpaceTest, OutOfRangeThrows) {
  const InputSpace space(4, Distribution::kUniform);
  EXPECT_THROW(space.Probability(4), ConfigError);
  EXPECT_THROW(space.Probability(-1), ConfigError);
  EXPECT_THROW(InputSpace(0, Distribution::kUniform), ConfigError);
}

TEST(InputSpaceTest, SamplingFollowsDistribution) {
  const InputSpace space(5, Distribution::kPowerLaw);
  Rng rng(9);
  std::vector<int> counts(5, 0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++counts[space.Sample(rng)];
  for (int k = 0; k < 5; ++k) {
    const double p = space.Probability(k);
    EXPECT_NEAR(counts[k] / static_cast<double>(n), p, 4 * std::sqrt(p * (1 - p) / n));
  }
}

TEST(DistributionTest, ParseRoundTrip) {
  EXPECT_EQ(ParseDistribution("powerlaw"), Distribution::kPowerLaw);
  EXPECT_EQ(ParseDistribution(ToString(Distribution::kUniform)), Distribution::kUniform);
  EXPECT_THROW(ParseDistribution("zipf"), ConfigError);
}

TEST(MessageTest, Validation) {
  const Alphabet a{4, 3};
  EXPECT_NO_THROW(ValidateMessage(Message{{0}}, a));
  EXPECT_NO_THROW(ValidateMessage(Message{{3, 1, 0}}, a));
  EXPECT_THROW(ValidateMessage(Message{{}}, a), ConfigError);
  EXPECT_THROW(ValidateMessage(Message{{1, 2}}, a), ConfigError);
  EXPECT_THROW(ValidateMessage(Message{{1, 0, 0}}, a), ConfigError);
  EXPECT_THROW(ValidateMessage(Message{{1, 1, 1, 0}}, a), ConfigError);
  EXPECT_THROW(ValidateMessage(Message{{4, 0}}, a), ConfigError);
  EXPECT_EQ(MessageLength(Message{{2, 2, 0}}), 3);
  EXPECT_EQ(FormatMessage(Message{{3, 1, 0}}), "3 1 0");
}

TEST(AlphabetTest, Validation) {
  EXPECT_THROW((Alphabet{1, 5}.Validate()), ConfigError);
  EXPECT_THROW((Alphabet{3, 0}.Validate()), ConfigError);
}

TEST(LanguageTest, Validation) {
  Language lang;
  lang.alphabet = {3, 3};
  lang.messages = {Message{{0}}, Message{{1, 0}}};
  lang.probabilities = {0.5, 0.5};
  EXPECT_NO_THROW(lang.Validate());
  lang.probabilities = {1.0};
  EXPECT_THROW(lang.Validate(), ConfigError);
}

}  // namespace
}  // namespace zla
