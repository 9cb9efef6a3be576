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

#include "zla/training.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "zla/errors.h"
#include "zla/random.h"

namespace zla {
namespace {

constexpr std::array<System, 4> kAllSystems = {System::kStandard, System::kLazyStandard,
                                               System::kStandardImpatient, System::kLazImpa};

void ZeroAll(std::span<const NamedTensor> tensors) {
  for (const auto& t : tensors) t.value->setZero();
}

}  // namespace

std::string_view ToString(System system) {
  switch (system) {
    case System::kStandard:
      return "standard";
    case System::kLazyStandard:
      return "lazy+standard";
    case System::kStandardImpatient:
      return "standard+impatient";
    case System::kLazImpa:
      return "lazimpa";
  }
  return "unknown";
}

System ParseSystem(std::string_view name) {
  for (System s : kAllSystems) {
    if (ToString(s) == name) return s;
  }
  throw ConfigError("unknown system '" + std::string(name) +
                    "' (expected standard, lazy+standard, standard+impatient or lazimpa)");
}

const std::array<System, 4>& AllSystems() { return kAllSystems; }

ListenerKind ListenerKindOf(System system) {
  return system == System::kStandardImpatient || system == System::kLazImpa
             ? ListenerKind::kImpatient
             : ListenerKind::kStandard;
}

bool UsesLaziness(System system) {
  return system == System::kLazyStandard || system == System::kLazImpa;
}

void TrainConfig::Validate() const {
  Alphabet{voc_size, max_len}.Validate();
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(n_inputs, "n_inputs");
  positive(batches_per_epoch, "batches_per_epoch");
  positive(batch_size, "batch_size");
  positive(speaker_hidden, "speaker_hidden");
  positive(speaker_embed, "speaker_embed");
  positive(listener_hidden, "listener_hidden");
  positive(listener_embed, "listener_embed");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(entropy_coeff >= 0.0)) throw ConfigError("entropy_coeff must be >= 0");
  if (!(schedule_beta2 > 0.0)) throw ConfigError("schedule_beta2 must be positive");
  if (!(accuracy_ema_decay >= 0.0 && accuracy_ema_decay < 1.0)) {
    throw ConfigError("accuracy_ema_decay must lie in [0, 1)");
  }
  if (!(success_threshold > 0.0 && success_threshold < 1.0)) {
    throw ConfigError("success_threshold must lie in (0, 1)");
  }
}

SpeakerShape TrainConfig::speaker_shape() const {
  return SpeakerShape{n_inputs, voc_size, speaker_hidden, speaker_embed};
}

ListenerShape TrainConfig::listener_shape() const {
  return ListenerShape{n_inputs, voc_size, listener_hidden, listener_embed};
}

// ---------------------------------------------------------------------------

double LossStandard(int target, const Vector& distribution) {
  if (target < 0 || target >= distribution.size()) {
    throw ConfigError("LossStandard: target outside distribution");
  }
  return -std::log(std::max(distribution(target), 1e-300));
}

double LossImpatience(int target, std::span<const Vector> distributions) {
  if (distributions.empty()) throw ConfigError("LossImpatience: no distributions");
  double sum = 0.0;
  for (const auto& d : distributions) sum += LossStandard(target, d);
  return sum / static_cast<double>(distributions.size());
}

double AlphaSchedule(double accuracy, double beta1, double beta2) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) {
    std::ostringstream msg;
    msg << "accuracy " << accuracy << " outside [0, 1], clamped";
    LogWarning(msg.str());
    accuracy = std::isnan(accuracy) ? 0.0 : std::clamp(accuracy, 0.0, 1.0);
  }
  return std::pow(accuracy, beta1) / beta2;
}

double LossLaziness(const Message& m, double accuracy, double beta1, double beta2) {
  return AlphaSchedule(accuracy, beta1, beta2) * m.Length();
}

// ---------------------------------------------------------------------------

BatchSurrogate AccumulateSurrogateGradient(System system, const SurrogateCoefficients& coeffs,
                                           const SpeakerRollout& rollout,
                                           const ListenerPass& pass,
                                           const SpeakerParams& speaker,
                                           const ListenerParams& listener,
                                           SpeakerParams* speaker_grads,
                                           ListenerParams* listener_grads) {
  const int batch = static_cast<int>(rollout.messages.size());
  if (pass.batch_size() != batch) {
    throw InternalError("surrogate: rollout and listener pass differ in batch size");
  }
  if (ListenerKindOf(system) != pass.kind) {
    throw InternalError("surrogate: listener pass kind does not match the system");
  }
  BatchSurrogate out;
  out.samples.resize(batch);
  if (batch == 0) return out;
  const double inv_batch = 1.0 / batch;
  const double alpha = UsesLaziness(system) ? coeffs.alpha : 0.0;

  // Term (A): task loss into the listener.
  std::vector<Matrix> listener_grad_logits(pass.steps.size());
  for (std::size_t t = 0; t < pass.steps.size(); ++t) {
    const auto& step = pass.steps[t];
    listener_grad_logits[t] = Matrix::Zero(step.out_end - step.out_begin, step.log_probs.cols());
  }
  int correct = 0;
  for (int b = 0; b < batch; ++b) {
    SampleTerms& s = out.samples[b];
    const int target = rollout.inputs[b];
    const int n_pred = pass.NumPredictions(b);
    const double weight = inv_batch / n_pred;
    double task = 0.0;
    for (int j = 0; j < n_pred; ++j) {
      const auto log_probs = pass.LogProbs(b, j);
      task -= log_probs(target);
      if (listener_grads != nullptr) {
        const int t = pass.PredictionPosition(b, j);
        const auto& step = pass.steps[t];
        auto g = listener_grad_logits[t].row(pass.sorted[b] - step.out_begin);
        g = weight * log_probs.array().exp().matrix();
        g(target) -= weight;
      }
    }
    s.task_loss = task / n_pred;
    s.length_loss = alpha * rollout.messages[b].Length();
    s.total_loss = s.task_loss + s.length_loss;
    s.log_prob = rollout.log_prob[b];
    s.entropy = rollout.mean_entropy[b];
    s.prediction = pass.Predict(b);
    if (s.prediction == target) ++correct;

    out.mean_task_loss += s.task_loss * inv_batch;
    out.mean_length_loss += s.length_loss * inv_batch;
    out.mean_total_loss += s.total_loss * inv_batch;
    out.mean_entropy += s.entropy * inv_batch;
    out.surrogate += inv_batch * (s.total_loss + (s.total_loss - coeffs.baseline) * s.log_prob -
                                  coeffs.entropy_coeff * s.entropy);
  }
  out.accuracy = static_cast<double>(correct) * inv_batch;
  if (listener_grads != nullptr) ListenerBackward(listener, pass, listener_grad_logits, listener_grads);

  // Term (B) and the entropy bonus into the speaker.
  if (speaker_grads != nullptr) {
    std::vector<Matrix> speaker_grad_logits(rollout.steps.size());
    for (std::size_t t = 0; t < rollout.steps.size(); ++t) {
      const SpeakerStep& step = rollout.steps[t];
      const int n = static_cast<int>(step.rows.size());
      Matrix g(n, step.log_probs.cols());
      for (int i = 0; i < n; ++i) {
        const int b = step.rows[i];
        const auto lp = step.log_probs.row(i).array();
        const auto p = lp.exp();
        const double advantage = (out.samples[b].total_loss - coeffs.baseline) * inv_batch;
        // d/dz [advantage * log p_s] = advantage * (onehot(s) - p)
        g.row(i) = (-advantage * p).matrix();
        g(i, step.symbols[i]) += advantage;
        // d/dz [-coeff * H / n_choices] = coeff / n_choices * p * (log p + H)
        const double ent_weight =
            coeffs.entropy_coeff * inv_batch / rollout.num_choices[b];
        g.row(i) += (ent_weight * p * (lp + step.entropy[i])).matrix();
      }
      speaker_grad_logits[t] = std::move(g);
    }
    SpeakerBackward(speaker, rollout, speaker_grad_logits, speaker_grads);
  }
  return out;
}

double RunningMean::Update(double value) {
  ++count_;
  mean_ += (value - mean_) / static_cast<double>(count_);
  return mean_;
}

AccuracyTracker::AccuracyTracker(double decay) : decay_(decay) {
  if (!(decay >= 0.0 && decay < 1.0)) throw ConfigError("EMA decay must lie in [0, 1)");
}

void AccuracyTracker::Update(double batch_accuracy) {
  value_ = value_ ? decay_ * *value_ + (1.0 - decay_) * batch_accuracy : batch_accuracy;
}

// ---------------------------------------------------------------------------

Evaluation EvaluateGreedy(ListenerKind kind, const SpeakerParams& speaker,
                          const ListenerParams& listener, const InputSpace& space,
                          const Alphabet& alphabet) {
  std::vector<int> inputs(space.size());
  for (int k = 0; k < space.size(); ++k) inputs[k] = k;
  SpeakerRollout rollout = RolloutSpeaker(speaker, alphabet, inputs, DecodeMode::kGreedy, nullptr);
  const ListenerPass pass = ListenerForward(listener, kind, rollout.messages);

  Evaluation eval;
  eval.language.alphabet = alphabet;
  eval.language.probabilities = space.probabilities();
  eval.predictions.resize(space.size());
  double length_sum = 0.0;
  int correct = 0;
  for (int k = 0; k < space.size(); ++k) {
    eval.predictions[k] = pass.Predict(k);
    if (eval.predictions[k] == k) {
      ++correct;
      eval.weighted_accuracy += space.Probability(k);
    }
    length_sum += rollout.messages[k].Length();
  }
  eval.language.messages = std::move(rollout.messages);
  eval.uniform_accuracy = static_cast<double>(correct) / space.size();
  eval.mean_length = length_sum / space.size();
  return eval;
}

RunTrace Train(const TrainConfig& config, const EpochCallback& on_epoch) {
  config.Validate();
  const InputSpace space(config.n_inputs, config.distribution);
  const Alphabet alphabet = config.alphabet();
  const ListenerKind kind = ListenerKindOf(config.system);

  RunTrace trace;
  trace.config = config;
  Rng init_rng = Rng::Stream(config.seed, 0);
  trace.speaker = SpeakerParams::Init(config.speaker_shape(), init_rng);
  trace.listener = ListenerParams::Init(config.listener_shape(), init_rng);
  Rng data_rng = Rng::Stream(config.seed, 1);

  SpeakerParams speaker_grads = SpeakerParams::Zeros(config.speaker_shape());
  ListenerParams listener_grads = ListenerParams::Zeros(config.listener_shape());
  std::vector<NamedTensor> params = trace.speaker.Tensors();
  for (const auto& t : trace.listener.Tensors()) params.push_back(t);
  std::vector<NamedTensor> grads = speaker_grads.Tensors();
  for (const auto& t : listener_grads.Tensors()) grads.push_back(t);
  std::vector<ConstNamedTensor> const_grads;
  for (const auto& g : grads) const_grads.push_back({g.name, g.value});

  Adam adam(AdamConfig{config.learning_rate});
  RunningMean baseline;
  AccuracyTracker tracker(config.accuracy_ema_decay);
  std::vector<int> inputs(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs && !trace.aborted; ++epoch) {
    EpochRecord record;
    record.epoch = epoch;
    double loss_sum = 0.0;
    int batches = 0;
    for (int batch = 0; batch < config.batches_per_epoch; ++batch) {
      for (auto& i : inputs) i = space.Sample(data_rng);
      const SpeakerRollout rollout =
          RolloutSpeaker(trace.speaker, alphabet, inputs, DecodeMode::kSample, &data_rng);
      const ListenerPass pass = ListenerForward(trace.listener, kind, rollout.messages);

      SurrogateCoefficients coeffs;
      coeffs.entropy_coeff = config.entropy_coeff;
      coeffs.alpha = UsesLaziness(config.system)
                         ? AlphaSchedule(tracker.estimate(), config.schedule_beta1,
                                         config.schedule_beta2)
                         : 0.0;
      coeffs.baseline = baseline.value();

      ZeroAll(grads);
      const BatchSurrogate result = AccumulateSurrogateGradient(
          config.system, coeffs, rollout, pass, trace.speaker, trace.listener, &speaker_grads,
          &listener_grads);
      const double batch_loss =
          result.mean_task_loss + result.mean_length_loss - config.entropy_coeff * result.mean_entropy;
      if (!std::isfinite(batch_loss)) {
        trace.aborted = true;
        trace.diagnostic = "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch + 1);
        break;
      }
      try {
        adam.Step(params, const_grads);
      } catch (const NumericError& e) {
        trace.aborted = true;
        trace.diagnostic = std::string(e.what()) + " (epoch " + std::to_string(epoch) + ")";
        break;
      }
      baseline.Update(result.mean_total_loss);
      tracker.Update(result.accuracy);

      ++batches;
      loss_sum += batch_loss;
      record.mean_task_loss += result.mean_task_loss;
      record.mean_length_loss += result.mean_length_loss;
      record.mean_entropy += result.mean_entropy;
      record.alpha = coeffs.alpha;
    }
    if (trace.aborted) break;

    record.mean_loss = loss_sum / batches;
    record.mean_task_loss /= batches;
    record.mean_length_loss /= batches;
    record.mean_entropy /= batches;
    record.weighted_accuracy_ema = tracker.estimate();
    const Evaluation eval = EvaluateGreedy(kind, trace.speaker, trace.listener, space, alphabet);
    record.uniform_accuracy = eval.uniform_accuracy;
    record.mean_length = eval.mean_length;
    trace.epochs.push_back(record);
    if (on_epoch) on_epoch(record);
  }

  Evaluation final_eval = EvaluateGreedy(kind, trace.speaker, trace.listener, space, alphabet);
  trace.language = std::move(final_eval.language);
  trace.predictions = std::move(final_eval.predictions);
  trace.final_uniform_accuracy = final_eval.uniform_accuracy;
  trace.final_weighted_accuracy = final_eval.weighted_accuracy;
  trace.successful = !trace.aborted && trace.final_uniform_accuracy > config.success_threshold;
  return trace;
}

}  // namespace zla
