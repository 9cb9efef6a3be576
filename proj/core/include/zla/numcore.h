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

#ifndef ZLA_NUMCORE_H_
#define ZLA_NUMCORE_H_

// Dense float64 kernel: linear maps, a single LSTM cell, softmax /
// cross-entropy and Adam, each with an explicit analytic backward pass.
//
// Batched operands are row-major with one sample per row. A single sample
// is simply a batch of one.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "zla/random.h"

namespace zla {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// A parameter tensor with a stable name, used for optimizer bookkeeping and
// checkpoints. Biases are stored as 1 x n matrices.
struct NamedTensor {
  std::string_view name;
  Matrix* value;
};
struct ConstNamedTensor {
  std::string_view name;
  const Matrix* value;
};

// Fills `m` with i.i.d. draws from U[-bound, bound].
void FillUniform(Matrix& m, double bound, Rng& rng);

bool AllFinite(const Matrix& m);

// ---------------------------------------------------------------------------
// Linear map y = x W^T + b, W is (out x in).

struct Linear {
  Matrix weight;
  Matrix bias;

  static Linear Zeros(int in_dim, int out_dim);
  // U[-1/sqrt(in), 1/sqrt(in)] for weight and bias.
  static Linear Init(int in_dim, int out_dim, Rng& rng);

  int in_dim() const { return static_cast<int>(weight.cols()); }
  int out_dim() const { return static_cast<int>(weight.rows()); }
};

Matrix LinearForward(const Linear& layer, const Matrix& x);

// Accumulates parameter gradients into `grads` and returns dL/dx.
Matrix LinearBackward(const Linear& layer, const Matrix& x, const Matrix& grad_y,
                      Linear* grads);

// ---------------------------------------------------------------------------
// LSTM cell. Gate blocks are stacked along the rows of the weight matrices in
// the order input, forget, candidate, output, each of height hidden_dim.

struct LstmCellParams {
  Matrix w_input;   // (4h x d_in)
  Matrix w_hidden;  // (4h x h)
  Matrix bias;      // (1 x 4h)

  static LstmCellParams Zeros(int input_dim, int hidden_dim);
  static LstmCellParams Init(int input_dim, int hidden_dim, Rng& rng);

  int input_dim() const { return static_cast<int>(w_input.cols()); }
  int hidden_dim() const { return static_cast<int>(w_hidden.cols()); }

  // Throws ConfigError if the gate blocks are inconsistent.
  void Validate() const;
};

struct LstmCache {
  Matrix x, h_prev, c_prev;
  Matrix input_gate, forget_gate, candidate, output_gate;
  Matrix tanh_c;
};

struct LstmStep {
  Matrix h;
  Matrix c;
  LstmCache cache;
};

struct LstmGrads {
  Matrix x;
  Matrix h_prev;
  Matrix c_prev;
};

LstmStep LstmCellForward(const LstmCellParams& params, const Matrix& x,
                         const Matrix& h_prev, const Matrix& c_prev);

// grad_h and grad_c are the upstream gradients of the step outputs. Parameter
// gradients are accumulated into `grads`.
LstmGrads LstmCellBackward(const LstmCellParams& params, const LstmCache& cache,
                           const Matrix& grad_h, const Matrix& grad_c,
                           LstmCellParams* grads);

// ---------------------------------------------------------------------------
// Softmax family. Row-wise for matrices, max-subtracted.

Matrix LogSoftmaxRows(const Matrix& logits);
Vector Softmax(const Vector& logits);

struct SoftmaxXent {
  double loss;
  Vector probs;
  Vector grad_logits;
};

// loss = -log softmax(logits)[target], grad = probs - onehot(target).
SoftmaxXent SoftmaxCrossEntropy(const Vector& logits, int target);

// ---------------------------------------------------------------------------
// Adam with bias correction.

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Moments are allocated on the first call and must keep matching shapes.
  // A non-finite gradient throws NumericError before any parameter moves.
  void Step(std::span<const NamedTensor> params, std::span<const ConstNamedTensor> grads);

  std::int64_t step_count() const { return step_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

 private:
  AdamConfig config_;
  std::int64_t step_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace zla

#endif  // ZLA_NUMCORE_H_
