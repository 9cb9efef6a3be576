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

#ifndef ZLA_GAME_H_
#define ZLA_GAME_H_

// The reconstruction game's universe. Inputs are identified by a 0-based
// index ordered by decreasing frequency, so index k is the input of
// frequency rank k + 1.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zla/random.h"

namespace zla {

enum class Distribution { kPowerLaw, kUniform };

std::string_view ToString(Distribution d);
// Accepts "powerlaw" and "uniform". Throws ConfigError otherwise.
Distribution ParseDistribution(std::string_view name);

class InputSpace {
 public:
  // p_k proportional to 1/k (power law) or constant (uniform), k = 1..n.
  InputSpace(int n_inputs, Distribution distribution);

  int size() const { return static_cast<int>(probs_.size()); }
  Distribution distribution() const { return distribution_; }
  const std::vector<double>& probabilities() const { return probs_; }

  // Probability of the input with 0-based `index`. Throws ConfigError when out
  // of range.
  double Probability(int index) const;

  // Inverse-CDF draw of an input index.
  int Sample(Rng& rng) const;

 private:
  Distribution distribution_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

// Symbol 0 is EOS; symbols 1..voc_size-1 are the ordinary vocabulary.
inline constexpr int kEos = 0;

struct Alphabet {
  int voc_size = 40;
  int max_len = 30;

  void Validate() const;
  bool operator==(const Alphabet&) const = default;
};

// A symbol sequence terminated by exactly one EOS. Its length counts EOS.
struct Message {
  std::vector<int> symbols;

  int Length() const { return static_cast<int>(symbols.size()); }
  bool operator==(const Message&) const = default;
};

int MessageLength(const Message& m);

// Throws ConfigError unless the message is nonempty, at most max_len long,
// uses only in-range symbols and has EOS exactly at its last position.
void ValidateMessage(const Message& m, const Alphabet& alphabet);

// "3 1 0" style rendering of the symbol ids.
std::string FormatMessage(const Message& m);

// Input-message mapping: messages[k] encodes input k whose probability is
// probabilities[k].
struct Language {
  Alphabet alphabet;
  std::vector<Message> messages;
  std::vector<double> probabilities;

  int size() const { return static_cast<int>(messages.size()); }
  void Validate() const;
  bool operator==(const Language&) const = default;
};

}  // namespace zla

#endif  // ZLA_GAME_H_
