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

#ifndef ZLA_REFCODES_H_
#define ZLA_REFCODES_H_

// Reference codes against which emergent languages are compared.

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "zla/game.h"
#include "zla/random.h"

namespace zla {

// Per-rank frequency weight and length. Frequencies are normalized.
struct FrequencyLengthMapping {
  std::vector<double> frequencies;
  std::vector<int> lengths;

  int size() const { return static_cast<int>(lengths.size()); }
  // Throws ConfigError on size mismatch, negative weights, or lengths below
  // `min_length`.
  void Validate(int min_length = 1) const;
};

FrequencyLengthMapping ToMapping(const Language& language);

// Messages over the voc_size - 1 ordinary symbols in length-then-
// lexicographic order, EOS appended, assigned to inputs in frequency order.
// The most frequent input gets the bare (EOS) message.
// Throws ConfigError if the inputs do not fit within max_len.
Language OptimalCoding(int voc_size, const InputSpace& space, int max_len = 30);

enum class MonkeyConvention {
  // Symbols drawn uniformly over the whole vocabulary, EOS included, until EOS;
  // EOS is forced at max_len. Lengths count EOS, as for agent messages.
  kForcedEos,
  // Up to max_len draws over the whole vocabulary; the reported length is
  // the number of ordinary symbols before the first EOS.
  kEosFreeLength,
};

struct MonkeyTypingSample {
  std::vector<int> lengths;
  double mean_length = 0.0;
};

MonkeyTypingSample MonkeyTyping(int voc_size, int max_len, std::int64_t n_samples, Rng& rng,
                                MonkeyConvention convention = MonkeyConvention::kForcedEos);

// One forced-EOS monkey message per input.
Language MonkeyLanguage(int voc_size, int max_len, const InputSpace& space, Rng& rng);

// Probability of each ordinary symbol; probs[s - 1] belongs to symbol s.
struct UnigramDistribution {
  std::vector<double> probs;
};

// Non-EOS symbol counts over all messages, optionally weighted by message
// probability. Throws ConfigError if there are no ordinary symbols at all.
UnigramDistribution Unigrams(const Language& language, bool weighted = false);

// Shannon entropy in nats.
double Entropy(std::span<const double> probs);

// Size of the uniform alphabet with the same entropy: exp(H).
double EffectiveVocabSize(const UnigramDistribution& unigrams);

// Vocabulary size (EOS included) of the optimal code built on ceil(V_eff)
// ordinary symbols.
int EffectiveOptimalVocSize(double v_eff);

struct FrequencyList {
  FrequencyLengthMapping mapping;
  std::vector<std::string> words;
  std::vector<std::string> warnings;
};

// Reads "rank frequency word" records (whitespace separated). The length of
// a word is its number of UTF-8 code points. Malformed lines are skipped
// with a warning; an input without a single valid record throws IoError.
FrequencyList ParseFrequencyList(std::istream& in, int top_n = 1000);
FrequencyList LoadFrequencyList(const std::string& path, int top_n = 1000);

int Utf8Length(std::string_view text);

}  // namespace zla

#endif  // ZLA_REFCODES_H_
