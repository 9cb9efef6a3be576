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

#include "zla/agents.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"
#include "test_util.h"
#include "zla/errors.h"

namespace zla {
namespace {

constexpr SpeakerShape kSpeaker{5, 4, 3, 3};
constexpr ListenerShape kListener{5, 4, 3, 3};

std::vector<int> Inputs() { return {0, 1, 2, 3, 4, 0, 2, 4}; }

TEST(SpeakerTest, ParameterShapes) {
  Rng rng(1);
  SpeakerParams p = SpeakerParams::Init({10, 6, 7, 5}, rng);
  EXPECT_EQ(p.input_to_hidden.weight.rows(), 7);
  EXPECT_EQ(p.input_to_hidden.weight.cols(), 10);
  EXPECT_EQ(p.embedding.rows(), 6);
  EXPECT_EQ(p.embedding.cols(), 5);
  EXPECT_EQ(p.head.weight.rows(), 6);
  EXPECT_EQ(p.cell.hidden_dim(), 7);
  EXPECT_EQ(p.shape().n_inputs, 10);
  EXPECT_EQ(p.Tensors().size(), 9u);
}

TEST(SpeakerTest, SampledMessagesAreValid) {
  Rng rng(2);
  const SpeakerParams p = SpeakerParams::Init(kSpeaker, rng);
  const Alphabet a{4, 4};
  const auto inputs = Inputs();
  const SpeakerRollout r = RolloutSpeaker(p, a, inputs, DecodeMode::kSample, &rng);
  ASSERT_EQ(r.messages.size(), inputs.size());
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    EXPECT_NO_THROW(ValidateMessage(r.messages[b], a));
    EXPECT_EQ(r.num_choices[b], std::min(r.messages[b].Length(), a.max_len - 1));
    EXPECT_LE(r.log_prob[b], 0.0);
  }
}

TEST(SpeakerTest, EosIsForcedAtMaxLen) {
  Rng rng(3);
  SpeakerParams p = SpeakerParams::Init(kSpeaker, rng);
  p.head.bias(0, kEos) = -60.0;  // EOS is (almost) never chosen
  const Alphabet a{4, 4};
  const auto inputs = Inputs();
  const SpeakerRollout r = RolloutSpeaker(p, a, inputs, DecodeMode::kSample, &rng);
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    EXPECT_EQ(r.messages[b].Length(), 4);
    EXPECT_EQ(r.messages[b].symbols.back(), kEos);
    EXPECT_EQ(r.num_choices[b], 3);
  }
  EXPECT_EQ(r.steps.size(), 3u);
}

TEST(SpeakerTest, ImmediateEos) {
  Rng rng(4);
  SpeakerParams p = SpeakerParams::Init(kSpeaker, rng);
  p.head.bias(0, kEos) = 60.0;
  const Alphabet a{4, 4};
  const auto inputs = Inputs();
  const SpeakerRollout r = RolloutSpeaker(p, a, inputs, DecodeMode::kGreedy, nullptr);
  for (const auto& m : r.messages) EXPECT_EQ(m, Message{{kEos}});
  for (int c : r.num_choices) EXPECT_EQ(c, 1);
}

TEST(SpeakerTest, ReplayReproducesRollout) {
  Rng rng(5);
  const SpeakerParams p = SpeakerParams::Init(kSpeaker, rng);
  const Alphabet a{4, 4};
  const auto inputs = Inputs();
  const SpeakerRollout r = RolloutSpeaker(p, a, inputs, DecodeMode::kSample, &rng);
  const SpeakerRollout replay = ReplaySpeaker(p, a, inputs, r.messages);
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    EXPECT_NEAR(replay.log_prob[b], r.log_prob[b], 1e-13);
    EXPECT_NEAR(replay.mean_entropy[b], r.mean_entropy[b], 1e-13);
    EXPECT_EQ(replay.num_choices[b], r.num_choices[b]);
  }
}

TEST(SpeakerTest, MessageProbabilitiesSumToOne) {
  Rng rng(6);
  const SpeakerParams p = SpeakerParams::Init(kSpeaker, rng);
  const Alphabet a{4, 3};
  const auto all = oracle::AllMessages(4, 3);
  for (int input = 0; input < 5; ++input) {
    std::vector<Message> messages;
    for (const auto& m : all) messages.push_back(Message{m});
    const std::vector<int> inputs(messages.size(), input);
    const SpeakerRollout replay = ReplaySpeaker(p, a, inputs, messages);
    double total = 0.0;
    for (double lp : replay.log_prob) total += std::exp(lp);
    EXPECT_NEAR(total, 1.0, 1e-12) << "input " << input;
  }
}

TEST(SpeakerTest, SamplingMatchesMessageProbabilities) {
  Rng rng(7);
  const SpeakerParams p = SpeakerParams::Init({2, 3, 4, 3}, rng);
  const Alphabet a{3, 2};  // one real choice, then forced EOS
  const std::vector<Message> messages = {Message{{0}}, Message{{1, 0}}, Message{{2, 0}}};
  const std::vector<int> inputs(3, 1);
  const SpeakerRollout replay = ReplaySpeaker(p, a, inputs, messages);
  const int n = 60000;
  const std::vector<int> batch(n, 1);
  const SpeakerRollout r = RolloutSpeaker(p, a, batch, DecodeMode::kSample, &rng);
  std::vector<int> counts(3, 0);
  for (const auto& m : r.messages) ++counts[m.symbols[0]];
  for (int s = 0; s < 3; ++s) {
    const double prob = std::exp(replay.log_prob[s]);
    EXPECT_NEAR(counts[s] / static_cast<double>(n), prob, 4 * std::sqrt(prob * (1 - prob) / n));
  }
}

TEST(SpeakerTest, GreedyIsDeterministicAndBatchIndependent) {
  Rng rng(8);
  const SpeakerParams p = SpeakerParams::Init({6, 5, 8, 4}, rng);
  const Alphabet a{5, 6};
  const std::vector<int> inputs = {0, 1, 2, 3, 4, 5};
  const SpeakerRollout all = RolloutSpeaker(p, a, inputs, DecodeMode::kGreedy, nullptr);
  for (int k = 0; k < 6; ++k) {
    const std::vector<int> one = {k};
    const SpeakerRollout single = RolloutSpeaker(p, a, one, DecodeMode::kGreedy, nullptr);
    EXPECT_EQ(single.messages[0], all.messages[k]);
    EXPECT_NEAR(single.log_prob[0], all.log_prob[k], 1e-13);
  }
}

TEST(SpeakerTest, SamplingWithoutRngThrows) {
  Rng rng(9);
  const SpeakerParams p = SpeakerParams::Init(kSpeaker, rng);
  const std::vector<int> inputs = {0};
  EXPECT_ANY_THROW(RolloutSpeaker(p, Alphabet{4, 4}, inputs, DecodeMode::kSample, nullptr));
  const std::vector<int> bad = {7};
  EXPECT_THROW(RolloutSpeaker(p, Alphabet{4, 4}, bad, DecodeMode::kGreedy, nullptr), ConfigError);
}

// f = sum_b c_b log P(m_b) along fixed messages.
TEST(SpeakerTest, BackwardMatchesFiniteDifferences) {
  Rng rng(10);
  SpeakerParams p = SpeakerParams::Init(kSpeaker, rng);
  const Alphabet a{4, 4};
  const auto inputs = Inputs();
  const SpeakerRollout r = RolloutSpeaker(p, a, inputs, DecodeMode::kSample, &rng);
  std::vector<double> coeff;
  for (std::size_t b = 0; b < inputs.size(); ++b) coeff.push_back(0.3 + 0.2 * b);

  std::vector<Matrix> grad_logits;
  for (const auto& step : r.steps) {
    Matrix g = -step.log_probs.array().exp().matrix();
    for (std::size_t i = 0; i < step.rows.size(); ++i) {
      g.row(i) *= coeff[step.rows[i]];
      g(i, step.symbols[i]) += coeff[step.rows[i]];
    }
    grad_logits.push_back(g);
  }
  SpeakerParams grads = SpeakerParams::Zeros(kSpeaker);
  SpeakerBackward(p, r, grad_logits, &grads);
  auto f = [&] {
    const SpeakerRollout replay = ReplaySpeaker(p, a, inputs, r.messages);
    double s = 0.0;
    for (std::size_t b = 0; b < inputs.size(); ++b) s += coeff[b] * replay.log_prob[b];
    return s;
  };
  const auto check = testing::CheckGradients(p.Tensors(), std::as_const(grads).Tensors(), f);
  EXPECT_LT(check.max_rel_error, 1e-5) << check.worst;
}

std::vector<Message> SomeMessages() {
  return {Message{{1, 2, 3, 0}}, Message{{0}}, Message{{3, 0}}, Message{{2, 2, 0}},
          Message{{1, 1, 1, 0}}, Message{{3, 1, 0}}};
}

class ListenerKindTest : public ::testing::TestWithParam<ListenerKind> {};

TEST_P(ListenerKindTest, BackwardMatchesFiniteDifferences) {
  Rng rng(11);
  ListenerParams p = ListenerParams::Init(kListener, rng);
  const auto messages = SomeMessages();
  const std::vector<int> targets = {0, 1, 2, 3, 4, 2};
  const ListenerPass pass = ListenerForward(p, GetParam(), messages);

  std::vector<Matrix> grad_logits;
  for (const auto& step : pass.steps) {
    grad_logits.push_back(Matrix::Zero(step.out_end - step.out_begin, step.log_probs.cols()));
  }
  auto weight = [](int b, int j) { return 0.5 + 0.1 * b - 0.07 * j; };
  for (int b = 0; b < pass.batch_size(); ++b) {
    for (int j = 0; j < pass.NumPredictions(b); ++j) {
      const int t = pass.PredictionPosition(b, j);
      auto row = grad_logits[t].row(pass.sorted[b] - pass.steps[t].out_begin);
      row = -weight(b, j) * pass.LogProbs(b, j).array().exp().matrix();
      row(targets[b]) += weight(b, j);
    }
  }
  ListenerParams grads = ListenerParams::Zeros(kListener);
  ListenerBackward(p, pass, grad_logits, &grads);
  auto f = [&] {
    const ListenerPass q = ListenerForward(p, GetParam(), messages);
    double s = 0.0;
    for (int b = 0; b < q.batch_size(); ++b) {
      for (int j = 0; j < q.NumPredictions(b); ++j) s += weight(b, j) * q.LogProbs(b, j)(targets[b]);
    }
    return s;
  };
  const auto check = testing::CheckGradients(p.Tensors(), std::as_const(grads).Tensors(), f);
  EXPECT_LT(check.max_rel_error, 1e-5) << check.worst;
}

TEST_P(ListenerKindTest, BatchCompositionDoesNotMatter) {
  Rng rng(12);
  const ListenerParams p = ListenerParams::Init(kListener, rng);
  const auto messages = SomeMessages();
  const ListenerPass all = ListenerForward(p, GetParam(), messages);
  for (std::size_t b = 0; b < messages.size(); ++b) {
    const ListenerPass one = ListenerForward(p, GetParam(), std::span(&messages[b], 1));
    ASSERT_EQ(one.NumPredictions(0), all.NumPredictions(b));
    for (int j = 0; j < one.NumPredictions(0); ++j) {
      EXPECT_LT((one.LogProbs(0, j) - all.LogProbs(b, j)).cwiseAbs().maxCoeff(), 1e-13);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Kinds, ListenerKindTest,
                         ::testing::Values(ListenerKind::kStandard, ListenerKind::kImpatient),
                         [](const auto& info) {
                           return info.param == ListenerKind::kStandard ? "Standard"
                                                                        : "Impatient";
                         });

TEST(ListenerTest, ImpatientPredictsAfterEverySymbol) {
  Rng rng(13);
  const ListenerParams p = ListenerParams::Init(kListener, rng);
  const auto messages = SomeMessages();
  const ListenerPass pass = ListenerForward(p, ListenerKind::kImpatient, messages);
  for (std::size_t b = 0; b < messages.size(); ++b) {
    ASSERT_EQ(pass.NumPredictions(b), messages[b].Length());
    for (int j = 0; j < pass.NumPredictions(b); ++j) {
      EXPECT_EQ(pass.PredictionPosition(b, j), j);
      EXPECT_NEAR(pass.LogProbs(b, j).array().exp().sum(), 1.0, 1e-12);
    }
    EXPECT_EQ(pass.Distributions(b).size(), messages[b].symbols.size());
  }
}

TEST(ListenerTest, ImpatientPrefixPredictionsAreCausal) {
  Rng rng(14);
  const ListenerParams p = ListenerParams::Init(kListener, rng);
  const std::vector<Message> a = {Message{{1, 2, 3, 0}}};
  const std::vector<Message> b = {Message{{1, 2, 1, 2, 0}}};
  const ListenerPass pa = ListenerForward(p, ListenerKind::kImpatient, a);
  const ListenerPass pb = ListenerForward(p, ListenerKind::kImpatient, b);
  for (int j = 0; j < 2; ++j) {
    EXPECT_EQ(pa.LogProbs(0, j), pb.LogProbs(0, j)) << "position " << j;
  }
  EXPECT_NE(pa.LogProbs(0, 2), pb.LogProbs(0, 2));
}

TEST(ListenerTest, StandardAndImpatientAgreeAtEos) {
  Rng rng(15);
  const ListenerParams p = ListenerParams::Init(kListener, rng);
  const auto messages = SomeMessages();
  const ListenerPass standard = ListenerForward(p, ListenerKind::kStandard, messages);
  const ListenerPass impatient = ListenerForward(p, ListenerKind::kImpatient, messages);
  for (std::size_t b = 0; b < messages.size(); ++b) {
    EXPECT_EQ(standard.NumPredictions(b), 1);
    EXPECT_EQ(standard.PredictionPosition(b, 0), messages[b].Length() - 1);
    const int last = impatient.NumPredictions(b) - 1;
    EXPECT_LT((standard.LogProbs(b, 0) - impatient.LogProbs(b, last)).cwiseAbs().maxCoeff(),
              1e-13);
    EXPECT_EQ(standard.Predict(b), impatient.Predict(b));
    EXPECT_EQ(ListenerTestPrediction(ListenerKind::kStandard, p, messages[b]),
              ListenerTestPrediction(ListenerKind::kImpatient, p, messages[b]));
  }
}

TEST(ListenerTest, ArgMaxTiesResolveLow) {
  Eigen::RowVectorXd v(4);
  v << 0.1, 0.7, 0.7, 0.2;
  EXPECT_EQ(ArgMax(v), 1);
}

}  // namespace
}  // namespace zla
