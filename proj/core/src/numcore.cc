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

#include "zla/numcore.h"

#include <cmath>
#include <sstream>

#include "zla/errors.h"

namespace zla {
namespace {

std::string ShapeString(const Matrix& m) {
  std::ostringstream out;
  out << m.rows() << "x" << m.cols();
  return out.str();
}

void CheckShape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream out;
    out << what << ": expected " << rows << "x" << cols << ", got " << ShapeString(m);
    throw ConfigError(out.str());
  }
}

Matrix Sigmoid(const Matrix& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

}  // namespace

void FillUniform(Matrix& m, double bound, Rng& rng) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.Uniform(-bound, bound);
}

bool AllFinite(const Matrix& m) { return m.allFinite(); }

// ---------------------------------------------------------------------------

Linear Linear::Zeros(int in_dim, int out_dim) {
  return Linear{Matrix::Zero(out_dim, in_dim), Matrix::Zero(1, out_dim)};
}

Linear Linear::Init(int in_dim, int out_dim, Rng& rng) {
  Linear layer = Zeros(in_dim, out_dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  FillUniform(layer.weight, bound, rng);
  FillUniform(layer.bias, bound, rng);
  return layer;
}

Matrix LinearForward(const Linear& layer, const Matrix& x) {
  if (x.cols() != layer.weight.cols()) {
    throw ConfigError("LinearForward: input has " + std::to_string(x.cols()) +
                      " columns, layer expects " + std::to_string(layer.weight.cols()));
  }
  Matrix y = x * layer.weight.transpose();
  y.rowwise() += layer.bias.row(0);
  return y;
}

Matrix LinearBackward(const Linear& layer, const Matrix& x, const Matrix& grad_y,
                      Linear* grads) {
  CheckShape(grad_y, x.rows(), layer.weight.rows(), "LinearBackward grad_y");
  grads->weight.noalias() += grad_y.transpose() * x;
  grads->bias += grad_y.colwise().sum();
  return grad_y * layer.weight;
}

// ---------------------------------------------------------------------------

LstmCellParams LstmCellParams::Zeros(int input_dim, int hidden_dim) {
  if (input_dim <= 0 || hidden_dim <= 0) {
    throw ConfigError("LSTM dimensions must be positive");
  }
  return LstmCellParams{Matrix::Zero(4 * hidden_dim, input_dim),
                        Matrix::Zero(4 * hidden_dim, hidden_dim),
                        Matrix::Zero(1, 4 * hidden_dim)};
}

LstmCellParams LstmCellParams::Init(int input_dim, int hidden_dim, Rng& rng) {
  LstmCellParams p = Zeros(input_dim, hidden_dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  FillUniform(p.w_input, bound, rng);
  FillUniform(p.w_hidden, bound, rng);
  FillUniform(p.bias, bound, rng);
  return p;
}

void LstmCellParams::Validate() const {
  const Eigen::Index h = w_hidden.cols();
  if (h <= 0 || w_input.cols() <= 0) throw ConfigError("LSTM: empty parameters");
  CheckShape(w_hidden, 4 * h, h, "LSTM w_hidden");
  CheckShape(w_input, 4 * h, w_input.cols(), "LSTM w_input");
  CheckShape(bias, 1, 4 * h, "LSTM bias");
}

LstmStep LstmCellForward(const LstmCellParams& params, const Matrix& x,
                         const Matrix& h_prev, const Matrix& c_prev) {
  params.Validate();
  const Eigen::Index h = params.hidden_dim();
  const Eigen::Index batch = x.rows();
  CheckShape(x, batch, params.input_dim(), "LSTM input");
  CheckShape(h_prev, batch, h, "LSTM h_prev");
  CheckShape(c_prev, batch, h, "LSTM c_prev");

  Matrix z = x * params.w_input.transpose();
  z.noalias() += h_prev * params.w_hidden.transpose();
  z.rowwise() += params.bias.row(0);

  LstmStep step;
  LstmCache& cache = step.cache;
  cache.x = x;
  cache.h_prev = h_prev;
  cache.c_prev = c_prev;
  cache.input_gate = Sigmoid(z.middleCols(0, h));
  cache.forget_gate = Sigmoid(z.middleCols(h, h));
  cache.candidate = z.middleCols(2 * h, h).array().tanh().matrix();
  cache.output_gate = Sigmoid(z.middleCols(3 * h, h));

  step.c = (cache.forget_gate.array() * c_prev.array() +
            cache.input_gate.array() * cache.candidate.array())
               .matrix();
  cache.tanh_c = step.c.array().tanh().matrix();
  step.h = (cache.output_gate.array() * cache.tanh_c.array()).matrix();
  return step;
}

LstmGrads LstmCellBackward(const LstmCellParams& params, const LstmCache& cache,
                           const Matrix& grad_h, const Matrix& grad_c,
                           LstmCellParams* grads) {
  const Eigen::Index h = params.hidden_dim();
  const Eigen::Index batch = cache.x.rows();
  if (cache.x.cols() != params.input_dim() || cache.h_prev.cols() != h ||
      cache.input_gate.rows() != batch || cache.tanh_c.cols() != h) {
    throw InternalError("LstmCellBackward: cache does not match parameters");
  }
  if (grad_h.rows() != batch || grad_h.cols() != h || grad_c.rows() != batch ||
      grad_c.cols() != h) {
    throw InternalError("LstmCellBackward: upstream gradient shape mismatch");
  }

  const auto i = cache.input_gate.array();
  const auto f = cache.forget_gate.array();
  const auto g = cache.candidate.array();
  const auto o = cache.output_gate.array();
  const auto tc = cache.tanh_c.array();

  const Eigen::ArrayXXd dc = grad_c.array() + grad_h.array() * o * (1.0 - tc.square());

  Matrix dz(batch, 4 * h);
  dz.middleCols(0, h) = (dc * g * i * (1.0 - i)).matrix();
  dz.middleCols(h, h) = (dc * cache.c_prev.array() * f * (1.0 - f)).matrix();
  dz.middleCols(2 * h, h) = (dc * i * (1.0 - g.square())).matrix();
  dz.middleCols(3 * h, h) = (grad_h.array() * tc * o * (1.0 - o)).matrix();

  grads->w_input.noalias() += dz.transpose() * cache.x;
  grads->w_hidden.noalias() += dz.transpose() * cache.h_prev;
  grads->bias += dz.colwise().sum();

  LstmGrads out;
  out.x = dz * params.w_input;
  out.h_prev = dz * params.w_hidden;
  out.c_prev = (dc * f).matrix();
  return out;
}

// ---------------------------------------------------------------------------

Matrix LogSoftmaxRows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

Vector Softmax(const Vector& logits) {
  if (logits.size() == 0) throw ConfigError("Softmax: empty logits");
  const double mx = logits.maxCoeff();
  Vector e = (logits.array() - mx).exp().matrix();
  return e / e.sum();
}

SoftmaxXent SoftmaxCrossEntropy(const Vector& logits, int target) {
  if (logits.size() == 0) throw ConfigError("SoftmaxCrossEntropy: empty logits");
  if (target < 0 || target >= logits.size()) {
    throw ConfigError("SoftmaxCrossEntropy: target " + std::to_string(target) +
                      " outside [0, " + std::to_string(logits.size()) + ")");
  }
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  SoftmaxXent out;
  out.loss = lse - logits(target);
  out.probs = (logits.array() - lse).exp().matrix();
  out.grad_logits = out.probs;
  out.grad_logits(target) -= 1.0;
  return out;
}

// ---------------------------------------------------------------------------

void Adam::Step(std::span<const NamedTensor> params, std::span<const ConstNamedTensor> grads) {
  if (params.size() != grads.size()) {
    throw ConfigError("Adam: " + std::to_string(params.size()) + " parameters but " +
                      std::to_string(grads.size()) + " gradients");
  }
  if (m_.empty()) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& p : params) {
      m_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
      v_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
    }
  } else if (m_.size() != params.size()) {
    throw ConfigError("Adam: parameter count changed between steps");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Matrix& p = *params[k].value;
    const Matrix& g = *grads[k].value;
    if (p.rows() != g.rows() || p.cols() != g.cols() || p.rows() != m_[k].rows() ||
        p.cols() != m_[k].cols()) {
      throw ConfigError("Adam: shape mismatch for tensor '" + std::string(params[k].name) + "'");
    }
    if (!g.allFinite()) {
      throw NumericError("Adam: non-finite gradient in tensor '" + std::string(params[k].name) +
                         "' at step " + std::to_string(step_ + 1));
    }
  }

  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto g = grads[k].value->array();
    auto m = m_[k].array();
    auto v = v_[k].array();
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.square();
    params[k].value->array() -=
        config_.learning_rate * (m / correction1) / ((v / correction2).sqrt() + config_.epsilon);
  }
}

}  // namespace zla
