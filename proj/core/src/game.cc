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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "zla/errors.h"

namespace zla {

std::string_view ToString(Distribution d) {
  return d == Distribution::kPowerLaw ? "powerlaw" : "uniform";
}

Distribution ParseDistribution(std::string_view name) {
  if (name == "powerlaw") return Distribution::kPowerLaw;
  if (name == "uniform") return Distribution::kUniform;
  throw ConfigError("unknown distribution '" + std::string(name) + "'");
}

InputSpace::InputSpace(int n_inputs, Distribution distribution)
    : distribution_(distribution) {
  if (n_inputs < 1) throw ConfigError("n_inputs must be >= 1");
  probs_.resize(n_inputs);
  if (distribution == Distribution::kUniform) {
    std::fill(probs_.begin(), probs_.end(), 1.0 / n_inputs);
  } else {
    // Sum smallest terms first.
    double harmonic = 0.0;
    for (int k = n_inputs; k >= 1; --k) harmonic += 1.0 / k;
    for (int k = 1; k <= n_inputs; ++k) probs_[k - 1] = (1.0 / k) / harmonic;
  }
  cdf_.resize(n_inputs);
  double acc = 0.0;
  for (int k = 0; k < n_inputs; ++k) {
    acc += probs_[k];
    cdf_[k] = acc;
  }
  cdf_.back() = 1.0;
}

double InputSpace::Probability(int index) const {
  if (index < 0 || index >= size()) {
    throw ConfigError("input index " + std::to_string(index) + " outside [0, " +
                      std::to_string(size()) + ")");
  }
  return probs_[index];
}

int InputSpace::Sample(Rng& rng) const {
  const double u = rng.Uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf_.begin(), size() - 1));
}

void Alphabet::Validate() const {
  if (voc_size < 2) throw ConfigError("voc_size must be >= 2 (EOS plus one symbol)");
  if (max_len < 1) throw ConfigError("max_len must be >= 1");
}

int MessageLength(const Message& m) { return m.Length(); }

void ValidateMessage(const Message& m, const Alphabet& alphabet) {
  if (m.symbols.empty()) throw ConfigError("empty message (missing EOS)");
  if (m.Length() > alphabet.max_len) {
    throw ConfigError("message length " + std::to_string(m.Length()) + " exceeds max_len " +
                      std::to_string(alphabet.max_len));
  }
  for (int k = 0; k < m.Length(); ++k) {
    const int s = m.symbols[k];
    if (s < 0 || s >= alphabet.voc_size) {
      throw ConfigError("symbol " + std::to_string(s) + " outside vocabulary");
    }
    const bool last = k + 1 == m.Length();
    if ((s == kEos) != last) throw ConfigError("EOS must appear exactly once, at the end");
  }
}

std::string FormatMessage(const Message& m) {
  std::ostringstream out;
  for (std::size_t k = 0; k < m.symbols.size(); ++k) {
    if (k) out << ' ';
    out << m.symbols[k];
  }
  return out.str();
}

void Language::Validate() const {
  alphabet.Validate();
  if (messages.size() != probabilities.size()) {
    throw ConfigError("language has " + std::to_string(messages.size()) + " messages but " +
                      std::to_string(probabilities.size()) + " probabilities");
  }
  for (const auto& m : messages) ValidateMessage(m, alphabet);
  for (double p : probabilities) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("invalid message probability");
  }
}

}  // namespace zla
