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

#ifndef ZLA_AGENTS_H_
#define ZLA_AGENTS_H_

// Speaker and listener networks.
//
// Both agents are single-layer LSTMs. The speaker maps its input to the
// initial hidden state, then emits symbols autoregressively; the listener
// reads a message symbol by symbol, EOS included, and predicts the input
// from its hidden state through a shared linear head. The standard listener
// reads the head only after EOS; the impatient listener reads it after every
// symbol.
//
// Batches are processed with packed active rows: only samples still
// generating (speaker) or still reading (listener) take part in a step.

#include <span>
#include <string_view>
#include <vector>

#include "zla/game.h"
#include "zla/numcore.h"
#include "zla/random.h"

namespace zla {

struct SpeakerShape {
  int n_inputs = 1000;
  int voc_size = 40;
  int hidden = 100;
  int embed = 100;
};

struct ListenerShape {
  int n_inputs = 1000;
  int voc_size = 40;
  int hidden = 600;
  int embed = 100;
};

struct SpeakerParams {
  Linear input_to_hidden;  // one-hot input -> initial hidden state
  Matrix sos;              // (1 x embed) learned start-of-sequence input
  Matrix embedding;        // (voc_size x embed)
  LstmCellParams cell;
  Linear head;             // hidden -> voc_size logits

  static SpeakerParams Zeros(const SpeakerShape& shape);
  static SpeakerParams Init(const SpeakerShape& shape, Rng& rng);

  SpeakerShape shape() const;
  std::vector<NamedTensor> Tensors();
  std::vector<ConstNamedTensor> Tensors() const;
};

struct ListenerParams {
  Matrix embedding;  // (voc_size x embed)
  LstmCellParams cell;
  Linear head;       // hidden -> n_inputs logits

  static ListenerParams Zeros(const ListenerShape& shape);
  static ListenerParams Init(const ListenerShape& shape, Rng& rng);

  ListenerShape shape() const;
  std::vector<NamedTensor> Tensors();
  std::vector<ConstNamedTensor> Tensors() const;
};

// ---------------------------------------------------------------------------
// Speaker

enum class DecodeMode { kSample, kGreedy };

// One generation step over the rows that are still choosing symbols.
struct SpeakerStep {
  std::vector<int> rows;      // batch rows making a choice at this step
  std::vector<int> prev_pos;  // index of each row within the previous step
  LstmCache cache;
  Matrix hidden;              // (rows x hidden) cell output
  Matrix log_probs;           // (rows x voc_size)
  std::vector<double> entropy;
  std::vector<int> symbols;   // chosen symbol per row
};

struct SpeakerRollout {
  std::vector<int> inputs;
  std::vector<Message> messages;
  std::vector<SpeakerStep> steps;
  // Per batch row. The forced terminal EOS at max_len is not a choice and
  // adds nothing to these.
  std::vector<double> log_prob;      // sum of chosen-symbol log-probabilities
  std::vector<double> mean_entropy;  // mean per-choice entropy, 0 without choices
  std::vector<int> num_choices;
};

// Generates one message per input. Sampling needs `rng`; greedy ignores it.
SpeakerRollout RolloutSpeaker(const SpeakerParams& params, const Alphabet& alphabet,
                              std::span<const int> inputs, DecodeMode mode, Rng* rng);

// Teacher-forced pass that scores the given messages under the speaker.
SpeakerRollout ReplaySpeaker(const SpeakerParams& params, const Alphabet& alphabet,
                             std::span<const int> inputs, std::span<const Message> messages);

// Backpropagates per-step logit gradients (shaped like steps[t].log_probs)
// into `grads`.
void SpeakerBackward(const SpeakerParams& params, const SpeakerRollout& rollout,
                     std::span<const Matrix> grad_logits, SpeakerParams* grads);

// ---------------------------------------------------------------------------
// Listener

enum class ListenerKind { kStandard, kImpatient };

struct ListenerStep {
  int active = 0;     // sorted rows [0, active) read a symbol at this step
  int out_begin = 0;  // sorted rows [out_begin, out_end) emit a prediction
  int out_end = 0;
  LstmCache cache;
  Matrix hidden;      // (active x hidden)
  Matrix log_probs;   // (out_end - out_begin) x n_inputs
};

struct ListenerPass {
  ListenerKind kind = ListenerKind::kStandard;
  std::vector<int> order;    // sorted row -> batch row, by decreasing length
  std::vector<int> sorted;   // batch row -> sorted row
  std::vector<int> lengths;  // per batch row
  std::vector<int> symbols;  // flattened (sorted row, position) -> symbol
  int max_length = 0;
  std::vector<ListenerStep> steps;

  int batch_size() const { return static_cast<int>(order.size()); }
  // Number of predictions made for a batch row: 1 (standard) or l(m).
  int NumPredictions(int row) const;
  // Reading position of the j-th prediction for `row`.
  int PredictionPosition(int row, int j) const;
  // Log-distribution of the j-th prediction for `row`.
  Eigen::Ref<const Eigen::RowVectorXd> LogProbs(int row, int j) const;
  // All prediction distributions (probabilities) for `row`.
  std::vector<Vector> Distributions(int row) const;
  // Argmax of the distribution read at EOS.
  int Predict(int row) const;
};

ListenerPass ListenerForward(const ListenerParams& params, ListenerKind kind,
                             std::span<const Message> messages);

// grad_logits[t] is shaped like steps[t].log_probs.
void ListenerBackward(const ListenerParams& params, const ListenerPass& pass,
                      std::span<const Matrix> grad_logits, ListenerParams* grads);

// Test-time reconstruction of a single message.
int ListenerTestPrediction(ListenerKind kind, const ListenerParams& params, const Message& m);

// Index of the largest entry; ties resolve to the lowest index.
int ArgMax(Eigen::Ref<const Eigen::RowVectorXd> row);

std::string_view ToString(ListenerKind kind);

}  // namespace zla

#endif  // ZLA_AGENTS_H_
