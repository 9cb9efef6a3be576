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

#ifndef ZLA_TESTS_ORACLES_H_
#define ZLA_TESTS_ORACLES_H_

// Independent reference computations for the tests. Nothing here uses Eigen
// or the library's kernels; loops are written out plainly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

namespace zla::oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major, m[r][c]

inline double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LstmOut {
  Vec h, c;
};

// One LSTM step for a single sample. w_in is (4h x d), w_h is (4h x h),
// gates stacked as input, forget, candidate, output.
inline LstmOut LstmStep(const Mat& w_in, const Mat& w_h, const Vec& bias, const Vec& x,
                        const Vec& h_prev, const Vec& c_prev) {
  const std::size_t h = h_prev.size();
  Vec z(4 * h);
  for (std::size_t r = 0; r < 4 * h; ++r) {
    double s = bias[r];
    for (std::size_t k = 0; k < x.size(); ++k) s += w_in[r][k] * x[k];
    for (std::size_t k = 0; k < h; ++k) s += w_h[r][k] * h_prev[k];
    z[r] = s;
  }
  LstmOut out{Vec(h), Vec(h)};
  for (std::size_t j = 0; j < h; ++j) {
    const double i = Sigmoid(z[j]);
    const double f = Sigmoid(z[h + j]);
    const double g = std::tanh(z[2 * h + j]);
    const double o = Sigmoid(z[3 * h + j]);
    out.c[j] = f * c_prev[j] + i * g;
    out.h[j] = o * std::tanh(out.c[j]);
  }
  return out;
}

// Adam on a flat parameter vector, bias-corrected, for a fixed gradient
// sequence.
inline Vec AdamTrace(Vec theta, const std::vector<Vec>& grads, double lr, double b1, double b2,
                     double eps) {
  Vec m(theta.size(), 0.0), v(theta.size(), 0.0);
  for (std::size_t t = 1; t <= grads.size(); ++t) {
    const Vec& g = grads[t - 1];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = b1 * m[i] + (1 - b1) * g[i];
      v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(b1, static_cast<double>(t)));
      const double vh = v[i] / (1 - std::pow(b2, static_cast<double>(t)));
      theta[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
  return theta;
}

struct ExactP {
  double left = 0.0, right = 0.0;
};

// Exact permutation p-values over all n! pairings (identity included).
inline ExactP ExhaustivePValues(const Vec& freqs, const std::vector<int>& lengths) {
  const std::size_t n = lengths.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double observed = 0.0;
  for (std::size_t i = 0; i < n; ++i) observed += freqs[i] * lengths[i];
  const double tol = 1e-10 * std::max(1.0, std::abs(observed));
  std::int64_t total = 0, left = 0, right = 0;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += freqs[perm[i]] * lengths[i];
    ++total;
    if (s <= observed + tol) ++left;
    if (s >= observed - tol) ++right;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {static_cast<double>(left) / total, static_cast<double>(right) / total};
}

// Eq. 11 written directly: centered window of `window` points, shrunk
// symmetrically where it would leave the series.
inline double DeltaStabBrute(const Vec& f, int window) {
  const int n = static_cast<int>(f.size());
  const int half = window / 2;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    int w = half;
    while (i - w < 0 || i + w >= n) --w;
    double mean = 0.0;
    for (int j = -w; j <= w; ++j) mean += f[i + j];
    mean /= (2 * w + 1);
    sum += (f[i] - mean) * (f[i] - mean);
  }
  return sum / n;
}

// Truncated-geometric mean length of a monkey message with a forced EOS at
// max_len: P(L > k) = ((V-1)/V)^k for k < max_len.
inline double MonkeyMeanClosedForm(int voc_size, int max_len) {
  const double q = (voc_size - 1.0) / voc_size;
  double mean = 0.0;
  for (int k = 0; k < max_len; ++k) mean += std::pow(q, k);
  return mean;
}

// All messages over `voc_size` symbols (0 = EOS) of length <= max_len, EOS
// last, in no particular order.
inline std::vector<std::vector<int>> AllMessages(int voc_size, int max_len) {
  std::vector<std::vector<int>> out;
  std::function<void(std::vector<int>&)> grow = [&](std::vector<int>& prefix) {
    prefix.push_back(0);
    out.push_back(prefix);
    prefix.pop_back();
    if (static_cast<int>(prefix.size()) + 1 >= max_len) return;
    for (int s = 1; s < voc_size; ++s) {
      prefix.push_back(s);
      grow(prefix);
      prefix.pop_back();
    }
  };
  std::vector<int> prefix;
  grow(prefix);
  return out;
}

// Smallest L_token over every assignment of distinct messages to inputs,
// by exhaustive search over ordered selections.
inline double BruteForceMinLToken(const Vec& probs, int voc_size, int max_len) {
  const auto messages = AllMessages(voc_size, max_len);
  std::vector<int> lengths;
  for (const auto& m : messages) lengths.push_back(static_cast<int>(m.size()));
  const std::size_t n = probs.size();
  double best = 1e300;
  std::vector<bool> used(messages.size(), false);
  std::function<void(std::size_t, double)> rec = [&](std::size_t k, double acc) {
    if (acc >= best) return;
    if (k == n) {
      best = acc;
      return;
    }
    for (std::size_t i = 0; i < messages.size(); ++i) {
      if (used[i]) continue;
      used[i] = true;
      rec(k + 1, acc + probs[k] * lengths[i]);
      used[i] = false;
    }
  };
  rec(0, 0.0);
  return best;
}

}  // namespace zla::oracle

#endif  // ZLA_TESTS_ORACLES_H_
