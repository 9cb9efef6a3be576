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

#include "zla/refcodes.h"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "zla/errors.h"

namespace zla {

void FrequencyLengthMapping::Validate(int min_length) const {
  if (frequencies.size() != lengths.size()) {
    throw ConfigError("mapping: frequency and length counts differ");
  }
  if (lengths.empty()) throw ConfigError("mapping is empty");
  for (double f : frequencies) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw ConfigError("mapping: invalid frequency");
  }
  for (int l : lengths) {
    if (l < min_length) {
      throw ConfigError("mapping: length " + std::to_string(l) + " below " +
                        std::to_string(min_length));
    }
  }
}

FrequencyLengthMapping ToMapping(const Language& language) {
  FrequencyLengthMapping mapping;
  mapping.frequencies = language.probabilities;
  mapping.lengths.reserve(language.messages.size());
  for (const auto& m : language.messages) mapping.lengths.push_back(m.Length());
  return mapping;
}

Language OptimalCoding(int voc_size, const InputSpace& space, int max_len) {
  Alphabet alphabet{voc_size, max_len};
  alphabet.Validate();
  const int symbols = voc_size - 1;
  const int n = space.size();

  Language language;
  language.alphabet = alphabet;
  language.probabilities = space.probabilities();
  language.messages.reserve(n);

  // digits[k] in [1, symbols]; advanced like an odometer, most significant first.
  std::vector<int> digits;
  for (int body = 0; static_cast<int>(language.messages.size()) < n; ++body) {
    if (body + 1 > max_len) {
      throw ConfigError("optimal coding: " + std::to_string(n) + " inputs do not fit in " +
                        std::to_string(symbols) + " symbols with max_len " +
                        std::to_string(max_len));
    }
    digits.assign(body, 1);
    while (static_cast<int>(language.messages.size()) < n) {
      Message m;
      m.symbols = digits;
      m.symbols.push_back(kEos);
      language.messages.push_back(std::move(m));
      int k = body - 1;
      while (k >= 0 && digits[k] == symbols) digits[k--] = 1;
      if (k < 0) break;
      ++digits[k];
    }
  }
  return language;
}

MonkeyTypingSample MonkeyTyping(int voc_size, int max_len, std::int64_t n_samples, Rng& rng,
                                MonkeyConvention convention) {
  Alphabet{voc_size, max_len}.Validate();
  if (n_samples < 1) throw ConfigError("monkey typing needs at least one sample");
  MonkeyTypingSample out;
  out.lengths.reserve(static_cast<std::size_t>(n_samples));
  double sum = 0.0;
  for (std::int64_t s = 0; s < n_samples; ++s) {
    int length = 0;
    if (convention == MonkeyConvention::kForcedEos) {
      // Positions 0..max_len-2 are drawn; the last one is EOS regardless.
      length = max_len;
      for (int pos = 0; pos < max_len - 1; ++pos) {
        if (static_cast<int>(rng.UniformInt(voc_size)) == kEos) {
          length = pos + 1;
          break;
        }
      }
    } else {
      length = max_len;
      for (int pos = 0; pos < max_len; ++pos) {
        if (static_cast<int>(rng.UniformInt(voc_size)) == kEos) {
          length = pos;
          break;
        }
      }
    }
    out.lengths.push_back(length);
    sum += length;
  }
  out.mean_length = sum / static_cast<double>(n_samples);
  return out;
}

Language MonkeyLanguage(int voc_size, int max_len, const InputSpace& space, Rng& rng) {
  Language language;
  language.alphabet = Alphabet{voc_size, max_len};
  language.alphabet.Validate();
  language.probabilities = space.probabilities();
  for (int k = 0; k < space.size(); ++k) {
    Message m;
    for (int pos = 0; pos < max_len - 1; ++pos) {
      const int s = static_cast<int>(rng.UniformInt(voc_size));
      m.symbols.push_back(s);
      if (s == kEos) break;
    }
    if (m.symbols.empty() || m.symbols.back() != kEos) m.symbols.push_back(kEos);
    language.messages.push_back(std::move(m));
  }
  return language;
}

UnigramDistribution Unigrams(const Language& language, bool weighted) {
  const int voc = language.alphabet.voc_size;
  UnigramDistribution out;
  out.probs.assign(voc - 1, 0.0);
  double total = 0.0;
  for (int k = 0; k < language.size(); ++k) {
    const double w = weighted ? language.probabilities[k] : 1.0;
    for (int s : language.messages[k].symbols) {
      if (s == kEos) continue;
      if (s < 1 || s >= voc) throw ConfigError("unigrams: symbol outside vocabulary");
      out.probs[s - 1] += w;
      total += w;
    }
  }
  if (!(total > 0.0)) throw ConfigError("unigrams: language has no ordinary symbols");
  for (double& p : out.probs) p /= total;
  return out;
}

double Entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double EffectiveVocabSize(const UnigramDistribution& unigrams) {
  double total = 0.0;
  for (double p : unigrams.probs) {
    if (p < 0.0) throw ConfigError("unigrams: negative probability");
    total += p;
  }
  if (!(total > 0.0)) throw ConfigError("effective vocabulary of a zero-support distribution");
  return std::exp(Entropy(unigrams.probs));
}

int EffectiveOptimalVocSize(double v_eff) {
  if (!(v_eff >= 1.0)) throw ConfigError("effective vocabulary size must be >= 1");
  // exp(log(V)) can overshoot an integer V by an ulp.
  return static_cast<int>(std::ceil(v_eff - 1e-9)) + 1;
}

int Utf8Length(std::string_view text) {
  int count = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++count;
  }
  return count;
}

FrequencyList ParseFrequencyList(std::istream& in, int top_n) {
  if (top_n < 1) throw ConfigError("top_n must be positive");
  FrequencyList out;
  std::vector<double> raw;
  std::string line;
  int line_no = 0;
  while (static_cast<int>(raw.size()) < top_n && std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string rank, freq, word;
    if (!(fields >> rank >> freq >> word)) {
      out.warnings.push_back("line " + std::to_string(line_no) + ": expected 'rank frequency word'");
      continue;
    }
    double f = 0.0;
    try {
      std::size_t used = 0;
      f = std::stod(freq, &used);
      if (used != freq.size()) throw std::invalid_argument(freq);
    } catch (const std::exception&) {
      out.warnings.push_back("line " + std::to_string(line_no) + ": bad frequency '" + freq + "'");
      continue;
    }
    if (!(f > 0.0) || !std::isfinite(f)) {
      out.warnings.push_back("line " + std::to_string(line_no) + ": non-positive frequency");
      continue;
    }
    raw.push_back(f);
    out.words.push_back(word);
    out.mapping.lengths.push_back(Utf8Length(word));
  }
  if (raw.empty()) throw IoError("frequency list has no valid records");
  if (static_cast<int>(raw.size()) < top_n) {
    out.warnings.push_back("only " + std::to_string(raw.size()) + " records, fewer than " +
                           std::to_string(top_n));
  }
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  for (double f : raw) out.mapping.frequencies.push_back(f / total);
  return out;
}

FrequencyList LoadFrequencyList(const std::string& path, int top_n) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open frequency list '" + path + "'");
  return ParseFrequencyList(in, top_n);
}

}  // namespace zla
