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

#ifndef ZLA_TRAINING_H_
#define ZLA_TRAINING_H_

// Losses, the adaptive length-penalty schedule and the hybrid estimator:
// the listener is trained by back-propagation of the task loss, the speaker
// by REINFORCE on the total loss with a running-mean baseline plus an
// analytic entropy bonus.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zla/agents.h"
#include "zla/game.h"
#include "zla/numcore.h"

namespace zla {

enum class System {
  kStandard,           // standard speaker + standard listener
  kLazyStandard,       // lazy speaker + standard listener
  kStandardImpatient,  // standard speaker + impatient listener
  kLazImpa,            // lazy speaker + impatient listener
};

std::string_view ToString(System system);
// Accepts "standard", "lazy+standard", "standard+impatient", "lazimpa".
System ParseSystem(std::string_view name);
const std::array<System, 4>& AllSystems();
ListenerKind ListenerKindOf(System system);
bool UsesLaziness(System system);

struct TrainConfig {
  System system = System::kLazImpa;
  int n_inputs = 1000;
  int voc_size = 40;
  int max_len = 30;
  Distribution distribution = Distribution::kPowerLaw;
  int epochs = 1500;
  int batches_per_epoch = 100;
  int batch_size = 512;
  double learning_rate = 1e-3;
  double entropy_coeff = 2.0;
  double schedule_beta1 = 45.0;
  double schedule_beta2 = 10.0;
  double accuracy_ema_decay = 0.95;
  double success_threshold = 0.97;
  int speaker_hidden = 100;
  int speaker_embed = 100;
  int listener_hidden = 600;
  int listener_embed = 100;
  std::uint64_t seed = 0;

  void Validate() const;
  Alphabet alphabet() const { return Alphabet{voc_size, max_len}; }
  SpeakerShape speaker_shape() const;
  ListenerShape listener_shape() const;
};

// ---------------------------------------------------------------------------
// Losses

// -log distribution[target]. Probabilities are clipped below at 1e-300.
double LossStandard(int target, const Vector& distribution);

// Mean of LossStandard over the per-prefix distributions.
double LossImpatience(int target, std::span<const Vector> distributions);

// accuracy^beta1 / beta2. Accuracy outside [0, 1] is clamped with a warning.
double AlphaSchedule(double accuracy, double beta1 = 45.0, double beta2 = 10.0);

// AlphaSchedule(accuracy) * l(m).
double LossLaziness(const Message& m, double accuracy, double beta1 = 45.0,
                    double beta2 = 10.0);

// ---------------------------------------------------------------------------
// Estimator

struct SurrogateCoefficients {
  double entropy_coeff = 2.0;
  double alpha = 0.0;     // length penalty per symbol, 0 for non-lazy speakers
  double baseline = 0.0;
};

struct SampleTerms {
  double task_loss = 0.0;    // standard or impatience loss
  double length_loss = 0.0;  // alpha * l(m)
  double total_loss = 0.0;   // task + length, the REINFORCE cost
  double log_prob = 0.0;     // log P_S(m)
  double entropy = 0.0;      // mean per-choice speaker entropy
  int prediction = -1;       // argmax at EOS
};

struct BatchSurrogate {
  std::vector<SampleTerms> samples;
  double mean_task_loss = 0.0;
  double mean_length_loss = 0.0;
  double mean_total_loss = 0.0;
  double mean_entropy = 0.0;
  double accuracy = 0.0;
  // Batch mean of task + length + (total - baseline) * log P_S - coeff * entropy.
  double surrogate = 0.0;
};

// Evaluates the batch-mean surrogate and accumulates its gradient. The task
// term reaches only the listener; the REINFORCE and entropy terms reach only
// the speaker. Either gradient pointer may be null to skip that side.
BatchSurrogate AccumulateSurrogateGradient(System system, const SurrogateCoefficients& coeffs,
                                           const SpeakerRollout& rollout,
                                           const ListenerPass& listener_pass,
                                           const SpeakerParams& speaker,
                                           const ListenerParams& listener,
                                           SpeakerParams* speaker_grads,
                                           ListenerParams* listener_grads);

// Count-weighted running mean of batch losses.
class RunningMean {
 public:
  double Update(double value);
  double value() const { return mean_; }
  std::int64_t count() const { return count_; }

 private:
  double mean_ = 0.0;
  std::int64_t count_ = 0;
};

// Exponential moving average of per-batch frequency-weighted accuracy. The
// first observation initializes the average.
class AccuracyTracker {
 public:
  explicit AccuracyTracker(double decay = 0.95);
  void Update(double batch_accuracy);
  double estimate() const { return value_.value_or(0.0); }

 private:
  double decay_;
  std::optional<double> value_;
};

// ---------------------------------------------------------------------------
// Evaluation and training loop

struct Evaluation {
  Language language;
  std::vector<int> predictions;
  double uniform_accuracy = 0.0;
  double weighted_accuracy = 0.0;
  double mean_length = 0.0;
};

// Greedy decoding of every input followed by the listener's test prediction.
Evaluation EvaluateGreedy(ListenerKind kind, const SpeakerParams& speaker,
                          const ListenerParams& listener, const InputSpace& space,
                          const Alphabet& alphabet);

struct EpochRecord {
  int epoch = 0;                   // 1-based
  double uniform_accuracy = 0.0;   // greedy, all inputs weighted equally
  double weighted_accuracy_ema = 0.0;
  double mean_length = 0.0;        // L_type of the greedy language
  double mean_loss = 0.0;          // task + length - coeff * entropy, batch average
  double mean_task_loss = 0.0;
  double mean_length_loss = 0.0;
  double mean_entropy = 0.0;
  double alpha = 0.0;              // schedule value at the last batch
};

struct RunTrace {
  TrainConfig config;
  std::vector<EpochRecord> epochs;
  Language language;
  std::vector<int> predictions;
  double final_uniform_accuracy = 0.0;
  double final_weighted_accuracy = 0.0;
  bool successful = false;
  bool aborted = false;
  std::string diagnostic;
  SpeakerParams speaker;
  ListenerParams listener;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Runs config.epochs epochs. A non-finite loss or gradient stops the run and
// returns the trace so far with `aborted` set.
RunTrace Train(const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace zla

#endif  // ZLA_TRAINING_H_
