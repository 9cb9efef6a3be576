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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zla/errors.h"

namespace zla {
namespace {

// An embedding is a lookup from a one-hot input, so its fan-in is 1.
constexpr double kEmbeddingInitBound = 1.0;

void CheckInputs(std::span<const int> inputs, int n_inputs) {
  for (int i : inputs) {
    if (i < 0 || i >= n_inputs) {
      throw ConfigError("input index " + std::to_string(i) + " outside [0, " +
                        std::to_string(n_inputs) + ")");
    }
  }
}

void CheckMessageSymbols(const Message& m, int voc_size) {
  if (m.symbols.empty() || m.symbols.back() != kEos) {
    throw ConfigError("message must end with EOS");
  }
  for (std::size_t k = 0; k < m.symbols.size(); ++k) {
    const int s = m.symbols[k];
    if (s < 0 || s >= voc_size) throw ConfigError("symbol outside vocabulary");
    if (s == kEos && k + 1 != m.symbols.size()) throw ConfigError("EOS before message end");
  }
}

double RowEntropy(Eigen::Ref<const Eigen::RowVectorXd> log_probs) {
  double h = 0.0;
  for (Eigen::Index k = 0; k < log_probs.size(); ++k) {
    const double p = std::exp(log_probs(k));
    if (p > 0.0) h -= p * log_probs(k);
  }
  return h;
}

int SampleRow(Eigen::Ref<const Eigen::RowVectorXd> log_probs, Rng& rng) {
  const double u = rng.Uniform();
  double acc = 0.0;
  int last_positive = 0;
  for (Eigen::Index k = 0; k < log_probs.size(); ++k) {
    const double p = std::exp(log_probs(k));
    if (p > 0.0) last_positive = static_cast<int>(k);
    acc += p;
    if (u < acc) return static_cast<int>(k);
  }
  return last_positive;
}

// Shared autoregressive loop; `choose(t, batch_row, log_probs_row)` picks the
// symbol for a row at step t.
template <typename Choose>
SpeakerRollout RunSpeaker(const SpeakerParams& params, const Alphabet& alphabet,
                          std::span<const int> inputs, Choose&& choose) {
  alphabet.Validate();
  params.cell.Validate();
  const SpeakerShape shape = params.shape();
  if (shape.voc_size != alphabet.voc_size) {
    throw ConfigError("speaker vocabulary (" + std::to_string(shape.voc_size) +
                      ") does not match alphabet (" + std::to_string(alphabet.voc_size) + ")");
  }
  CheckInputs(inputs, shape.n_inputs);

  const int batch = static_cast<int>(inputs.size());
  SpeakerRollout out;
  out.inputs.assign(inputs.begin(), inputs.end());
  out.messages.resize(batch);
  out.log_prob.assign(batch, 0.0);
  out.mean_entropy.assign(batch, 0.0);
  out.num_choices.assign(batch, 0);
  if (batch == 0) return out;

  Matrix h(batch, shape.hidden);
  for (int b = 0; b < batch; ++b) {
    h.row(b) = params.input_to_hidden.weight.col(inputs[b]).transpose() +
               params.input_to_hidden.bias.row(0);
  }
  Matrix c = Matrix::Zero(batch, shape.hidden);
  Matrix x = params.sos.replicate(batch, 1);

  std::vector<int> rows(batch);
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<int> prev_pos;

  // The last position is reserved for the forced EOS.
  const int max_choices = alphabet.max_len - 1;
  for (int t = 0; t < max_choices && !rows.empty(); ++t) {
    SpeakerStep step;
    step.rows = rows;
    step.prev_pos = prev_pos;
    LstmStep cell = LstmCellForward(params.cell, x, h, c);
    step.log_probs = LogSoftmaxRows(LinearForward(params.head, cell.h));
    step.hidden = cell.h;

    const int n = static_cast<int>(rows.size());
    step.entropy.resize(n);
    step.symbols.resize(n);
    std::vector<int> next_rows;
    std::vector<int> next_pos;
    for (int i = 0; i < n; ++i) {
      const int b = rows[i];
      const int s = choose(t, b, step.log_probs.row(i));
      step.symbols[i] = s;
      step.entropy[i] = RowEntropy(step.log_probs.row(i));
      out.messages[b].symbols.push_back(s);
      out.log_prob[b] += step.log_probs(i, s);
      out.mean_entropy[b] += step.entropy[i];
      ++out.num_choices[b];
      if (s != kEos) {
        next_rows.push_back(b);
        next_pos.push_back(i);
      }
    }

    const int m = static_cast<int>(next_rows.size());
    Matrix next_h(m, shape.hidden), next_c(m, shape.hidden), next_x(m, shape.embed);
    for (int j = 0; j < m; ++j) {
      next_h.row(j) = cell.h.row(next_pos[j]);
      next_c.row(j) = cell.c.row(next_pos[j]);
      next_x.row(j) = params.embedding.row(step.symbols[next_pos[j]]);
    }
    step.cache = std::move(cell.cache);
    out.steps.push_back(std::move(step));
    rows = std::move(next_rows);
    prev_pos = std::move(next_pos);
    h = std::move(next_h);
    c = std::move(next_c);
    x = std::move(next_x);
  }

  for (int b : rows) out.messages[b].symbols.push_back(kEos);
  for (int b = 0; b < batch; ++b) {
    if (out.num_choices[b] > 0) out.mean_entropy[b] /= out.num_choices[b];
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

SpeakerParams SpeakerParams::Zeros(const SpeakerShape& s) {
  return SpeakerParams{Linear::Zeros(s.n_inputs, s.hidden), Matrix::Zero(1, s.embed),
                       Matrix::Zero(s.voc_size, s.embed),
                       LstmCellParams::Zeros(s.embed, s.hidden),
                       Linear::Zeros(s.hidden, s.voc_size)};
}

SpeakerParams SpeakerParams::Init(const SpeakerShape& s, Rng& rng) {
  if (s.n_inputs < 1 || s.voc_size < 2 || s.hidden < 1 || s.embed < 1) {
    throw ConfigError("invalid speaker shape");
  }
  SpeakerParams p;
  p.input_to_hidden = Linear::Init(s.n_inputs, s.hidden, rng);
  p.sos = Matrix::Zero(1, s.embed);
  FillUniform(p.sos, kEmbeddingInitBound, rng);
  p.embedding = Matrix::Zero(s.voc_size, s.embed);
  FillUniform(p.embedding, kEmbeddingInitBound, rng);
  p.cell = LstmCellParams::Init(s.embed, s.hidden, rng);
  p.head = Linear::Init(s.hidden, s.voc_size, rng);
  return p;
}

SpeakerShape SpeakerParams::shape() const {
  return SpeakerShape{input_to_hidden.in_dim(), static_cast<int>(embedding.rows()),
                      cell.hidden_dim(), static_cast<int>(embedding.cols())};
}

std::vector<NamedTensor> SpeakerParams::Tensors() {
  return {{"input_to_hidden.weight", &input_to_hidden.weight},
          {"input_to_hidden.bias", &input_to_hidden.bias},
          {"sos", &sos},
          {"embedding", &embedding},
          {"cell.w_input", &cell.w_input},
          {"cell.w_hidden", &cell.w_hidden},
          {"cell.bias", &cell.bias},
          {"head.weight", &head.weight},
          {"head.bias", &head.bias}};
}

std::vector<ConstNamedTensor> SpeakerParams::Tensors() const {
  std::vector<ConstNamedTensor> out;
  for (const auto& t : const_cast<SpeakerParams*>(this)->Tensors()) out.push_back({t.name, t.value});
  return out;
}

ListenerParams ListenerParams::Zeros(const ListenerShape& s) {
  return ListenerParams{Matrix::Zero(s.voc_size, s.embed),
                        LstmCellParams::Zeros(s.embed, s.hidden),
                        Linear::Zeros(s.hidden, s.n_inputs)};
}

ListenerParams ListenerParams::Init(const ListenerShape& s, Rng& rng) {
  if (s.n_inputs < 1 || s.voc_size < 2 || s.hidden < 1 || s.embed < 1) {
    throw ConfigError("invalid listener shape");
  }
  ListenerParams p;
  p.embedding = Matrix::Zero(s.voc_size, s.embed);
  FillUniform(p.embedding, kEmbeddingInitBound, rng);
  p.cell = LstmCellParams::Init(s.embed, s.hidden, rng);
  p.head = Linear::Init(s.hidden, s.n_inputs, rng);
  return p;
}

ListenerShape ListenerParams::shape() const {
  return ListenerShape{head.out_dim(), static_cast<int>(embedding.rows()), cell.hidden_dim(),
                       static_cast<int>(embedding.cols())};
}

std::vector<NamedTensor> ListenerParams::Tensors() {
  return {{"embedding", &embedding},     {"cell.w_input", &cell.w_input},
          {"cell.w_hidden", &cell.w_hidden}, {"cell.bias", &cell.bias},
          {"head.weight", &head.weight}, {"head.bias", &head.bias}};
}

std::vector<ConstNamedTensor> ListenerParams::Tensors() const {
  std::vector<ConstNamedTensor> out;
  for (const auto& t : const_cast<ListenerParams*>(this)->Tensors()) out.push_back({t.name, t.value});
  return out;
}

// ---------------------------------------------------------------------------

int ArgMax(Eigen::Ref<const Eigen::RowVectorXd> row) {
  int best = 0;
  for (Eigen::Index k = 1; k < row.size(); ++k) {
    if (row(k) > row(best)) best = static_cast<int>(k);
  }
  return best;
}

SpeakerRollout RolloutSpeaker(const SpeakerParams& params, const Alphabet& alphabet,
                              std::span<const int> inputs, DecodeMode mode, Rng* rng) {
  if (mode == DecodeMode::kGreedy) {
    return RunSpeaker(params, alphabet, inputs,
                      [](int, int, Eigen::Ref<const Eigen::RowVectorXd> lp) { return ArgMax(lp); });
  }
  if (rng == nullptr) throw ConfigError("sampling rollout needs an rng");
  return RunSpeaker(params, alphabet, inputs,
                    [rng](int, int, Eigen::Ref<const Eigen::RowVectorXd> lp) {
                      return SampleRow(lp, *rng);
                    });
}

SpeakerRollout ReplaySpeaker(const SpeakerParams& params, const Alphabet& alphabet,
                             std::span<const int> inputs, std::span<const Message> messages) {
  if (messages.size() != inputs.size()) {
    throw ConfigError("ReplaySpeaker: inputs and messages differ in count");
  }
  for (const auto& m : messages) ValidateMessage(m, alphabet);
  return RunSpeaker(params, alphabet, inputs,
                    [messages](int t, int b, Eigen::Ref<const Eigen::RowVectorXd>) {
                      return messages[b].symbols[t];
                    });
}

void SpeakerBackward(const SpeakerParams& params, const SpeakerRollout& rollout,
                     std::span<const Matrix> grad_logits, SpeakerParams* grads) {
  const int num_steps = static_cast<int>(rollout.steps.size());
  if (static_cast<int>(grad_logits.size()) != num_steps) {
    throw InternalError("SpeakerBackward: expected " + std::to_string(num_steps) +
                        " logit gradients, got " + std::to_string(grad_logits.size()));
  }
  const int hidden = params.cell.hidden_dim();
  Matrix carry_h, carry_c;
  for (int t = num_steps - 1; t >= 0; --t) {
    const SpeakerStep& step = rollout.steps[t];
    const int n = static_cast<int>(step.rows.size());
    if (grad_logits[t].rows() != n || grad_logits[t].cols() != step.log_probs.cols()) {
      throw InternalError("SpeakerBackward: logit gradient shape mismatch at step " +
                          std::to_string(t));
    }
    Matrix dh = LinearBackward(params.head, step.hidden, grad_logits[t], &grads->head);
    Matrix dc = Matrix::Zero(n, hidden);
    if (carry_h.size() > 0) {
      dh += carry_h;
      dc += carry_c;
    }
    LstmGrads back = LstmCellBackward(params.cell, step.cache, dh, dc, &grads->cell);

    if (t == 0) {
      grads->sos += back.x.colwise().sum();
      for (int i = 0; i < n; ++i) {
        const int input = rollout.inputs[step.rows[i]];
        grads->input_to_hidden.weight.col(input) += back.h_prev.row(i).transpose();
        grads->input_to_hidden.bias += back.h_prev.row(i);
      }
    } else {
      const SpeakerStep& prev = rollout.steps[t - 1];
      const int n_prev = static_cast<int>(prev.rows.size());
      carry_h = Matrix::Zero(n_prev, hidden);
      carry_c = Matrix::Zero(n_prev, hidden);
      for (int i = 0; i < n; ++i) {
        const int p = step.prev_pos[i];
        grads->embedding.row(prev.symbols[p]) += back.x.row(i);
        carry_h.row(p) = back.h_prev.row(i);
        carry_c.row(p) = back.c_prev.row(i);
      }
    }
  }
}

// ---------------------------------------------------------------------------

int ListenerPass::NumPredictions(int row) const {
  return kind == ListenerKind::kImpatient ? lengths[row] : 1;
}

int ListenerPass::PredictionPosition(int row, int j) const {
  return kind == ListenerKind::kImpatient ? j : lengths[row] - 1;
}

Eigen::Ref<const Eigen::RowVectorXd> ListenerPass::LogProbs(int row, int j) const {
  const int t = PredictionPosition(row, j);
  const ListenerStep& step = steps[t];
  const int r = sorted[row];
  if (r < step.out_begin || r >= step.out_end) {
    throw InternalError("ListenerPass: no prediction for row at this position");
  }
  return step.log_probs.row(r - step.out_begin);
}

std::vector<Vector> ListenerPass::Distributions(int row) const {
  std::vector<Vector> out;
  for (int j = 0; j < NumPredictions(row); ++j) {
    out.push_back(LogProbs(row, j).array().exp().matrix().transpose());
  }
  return out;
}

int ListenerPass::Predict(int row) const {
  return ArgMax(LogProbs(row, NumPredictions(row) - 1));
}

ListenerPass ListenerForward(const ListenerParams& params, ListenerKind kind,
                             std::span<const Message> messages) {
  params.cell.Validate();
  const ListenerShape shape = params.shape();
  const int batch = static_cast<int>(messages.size());
  ListenerPass pass;
  pass.kind = kind;
  pass.lengths.resize(batch);
  for (int b = 0; b < batch; ++b) {
    CheckMessageSymbols(messages[b], shape.voc_size);
    pass.lengths[b] = messages[b].Length();
    pass.max_length = std::max(pass.max_length, pass.lengths[b]);
  }
  pass.order.resize(batch);
  std::iota(pass.order.begin(), pass.order.end(), 0);
  std::stable_sort(pass.order.begin(), pass.order.end(),
                   [&](int a, int b) { return pass.lengths[a] > pass.lengths[b]; });
  pass.sorted.resize(batch);
  for (int r = 0; r < batch; ++r) pass.sorted[pass.order[r]] = r;

  const int T = pass.max_length;
  pass.symbols.assign(static_cast<std::size_t>(batch) * T, kEos);
  for (int r = 0; r < batch; ++r) {
    const auto& s = messages[pass.order[r]].symbols;
    std::copy(s.begin(), s.end(), pass.symbols.begin() + static_cast<std::ptrdiff_t>(r) * T);
  }
  std::vector<int> active(T + 1, 0);
  for (int t = 0; t <= T; ++t) {
    while (active[t] < batch && pass.lengths[pass.order[active[t]]] > t) ++active[t];
  }

  Matrix h = Matrix::Zero(batch, shape.hidden);
  Matrix c = Matrix::Zero(batch, shape.hidden);
  pass.steps.reserve(T);
  for (int t = 0; t < T; ++t) {
    ListenerStep step;
    const int n = active[t];
    step.active = n;
    Matrix x(n, shape.embed);
    for (int r = 0; r < n; ++r) {
      x.row(r) = params.embedding.row(pass.symbols[static_cast<std::size_t>(r) * T + t]);
    }
    LstmStep cell = LstmCellForward(params.cell, x, h.topRows(n), c.topRows(n));
    step.out_begin = kind == ListenerKind::kImpatient ? 0 : active[t + 1];
    step.out_end = n;
    const int count = step.out_end - step.out_begin;
    if (count > 0) {
      step.log_probs = LogSoftmaxRows(
          LinearForward(params.head, cell.h.middleRows(step.out_begin, count)));
    }
    step.hidden = cell.h;
    h = std::move(cell.h);
    c = std::move(cell.c);
    step.cache = std::move(cell.cache);
    pass.steps.push_back(std::move(step));
  }
  return pass;
}

void ListenerBackward(const ListenerParams& params, const ListenerPass& pass,
                      std::span<const Matrix> grad_logits, ListenerParams* grads) {
  const int T = static_cast<int>(pass.steps.size());
  if (static_cast<int>(grad_logits.size()) != T) {
    throw InternalError("ListenerBackward: expected " + std::to_string(T) +
                        " logit gradients, got " + std::to_string(grad_logits.size()));
  }
  const int hidden = params.cell.hidden_dim();
  Matrix carry_h, carry_c;
  for (int t = T - 1; t >= 0; --t) {
    const ListenerStep& step = pass.steps[t];
    const int n = step.active;
    Matrix dh = Matrix::Zero(n, hidden);
    Matrix dc = Matrix::Zero(n, hidden);
    if (carry_h.size() > 0) {
      dh.topRows(carry_h.rows()) += carry_h;
      dc.topRows(carry_c.rows()) += carry_c;
    }
    const int count = step.out_end - step.out_begin;
    if (count > 0) {
      if (grad_logits[t].rows() != count || grad_logits[t].cols() != step.log_probs.cols()) {
        throw InternalError("ListenerBackward: logit gradient shape mismatch at step " +
                            std::to_string(t));
      }
      dh.middleRows(step.out_begin, count) +=
          LinearBackward(params.head, step.hidden.middleRows(step.out_begin, count),
                         grad_logits[t], &grads->head);
    }
    LstmGrads back = LstmCellBackward(params.cell, step.cache, dh, dc, &grads->cell);
    for (int r = 0; r < n; ++r) {
      grads->embedding.row(pass.symbols[static_cast<std::size_t>(r) * pass.max_length + t]) +=
          back.x.row(r);
    }
    carry_h = std::move(back.h_prev);
    carry_c = std::move(back.c_prev);
  }
}

int ListenerTestPrediction(ListenerKind kind, const ListenerParams& params, const Message& m) {
  const ListenerPass pass = ListenerForward(params, kind, std::span<const Message>(&m, 1));
  return pass.Predict(0);
}

std::string_view ToString(ListenerKind kind) {
  return kind == ListenerKind::kImpatient ? "impatient" : "standard";
}

}  // namespace zla
