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

#include "zla/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "zla/errors.h"

namespace zla {
namespace {

constexpr std::size_t kPredictChunk = 2048;

double WeightedLength(const std::vector<double>& freqs, const std::vector<int>& lengths,
                      const std::vector<int>& perm) {
  double sum = 0.0;
  for (std::size_t i = 0; i < lengths.size(); ++i) sum += lengths[i] * freqs[perm[i]];
  return sum;
}

std::vector<int> PredictChunked(const BatchPredictor& predictor, const std::vector<Message>& messages,
                                int jobs) {
  std::vector<int> out(messages.size());
  const std::size_t n = messages.size();
  const std::size_t chunks = (n + kPredictChunk - 1) / kPredictChunk;
  auto run = [&](std::size_t first_chunk, std::size_t stride) {
    for (std::size_t c = first_chunk; c < chunks; c += stride) {
      const std::size_t begin = c * kPredictChunk;
      const std::size_t count = std::min(kPredictChunk, n - begin);
      const std::vector<int> pred =
          predictor(std::span<const Message>(messages.data() + begin, count));
      if (pred.size() != count) throw InternalError("predictor returned a wrong-sized batch");
      std::copy(pred.begin(), pred.end(), out.begin() + static_cast<std::ptrdiff_t>(begin));
    }
  };
  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), std::max<std::size_t>(chunks, 1));
  if (workers <= 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(run, w, workers);
    for (auto& t : threads) t.join();
  }
  return out;
}

}  // namespace

double LType(const FrequencyLengthMapping& mapping) {
  mapping.Validate(0);
  return std::accumulate(mapping.lengths.begin(), mapping.lengths.end(), 0.0) / mapping.size();
}

double LType(const Language& language) { return LType(ToMapping(language)); }

double LToken(const FrequencyLengthMapping& mapping) {
  mapping.Validate(0);
  const double total = std::accumulate(mapping.frequencies.begin(), mapping.frequencies.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("L_token: frequencies sum to " + std::to_string(total) + ", not 1");
  }
  double sum = 0.0;
  for (int i = 0; i < mapping.size(); ++i) sum += mapping.frequencies[i] * mapping.lengths[i];
  return sum;
}

double LToken(const Language& language) { return LToken(ToMapping(language)); }

RandomizationResult RandomizationTest(const FrequencyLengthMapping& mapping,
                                      std::int64_t permutations, Rng& rng) {
  mapping.Validate(0);
  if (permutations < 0) throw ConfigError("permutation count must be >= 0");
  const int n = mapping.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);

  RandomizationResult out;
  out.observed = WeightedLength(mapping.frequencies, mapping.lengths, perm);
  out.permutations = permutations;
  if (n < 2) return out;

  // Permuted sums equal to the observed one up to rounding count as ties.
  const double tol = 1e-10 * std::max(1.0, std::abs(out.observed));
  std::int64_t left = 0, right = 0;
  for (std::int64_t p = 0; p < permutations; ++p) {
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.UniformInt(static_cast<std::uint64_t>(i) + 1));
      std::swap(perm[i], perm[j]);
    }
    const double s = WeightedLength(mapping.frequencies, mapping.lengths, perm);
    if (s <= out.observed + tol) ++left;
    if (s >= out.observed - tol) ++right;
  }
  const double denom = static_cast<double>(permutations) + 1.0;
  out.p_left = (static_cast<double>(left) + 1.0) / denom;
  out.p_right = (static_cast<double>(right) + 1.0) / denom;
  return out;
}

// ---------------------------------------------------------------------------

BatchPredictor ListenerPredictor(ListenerKind kind, const ListenerParams& params) {
  // Both kinds answer at EOS from the same recurrence, so the standard pass
  // (which evaluates the head only there) serves either.
  (void)kind;
  return [&params](std::span<const Message> messages) {
    const ListenerPass pass = ListenerForward(params, ListenerKind::kStandard, messages);
    std::vector<int> out(messages.size());
    for (int b = 0; b < pass.batch_size(); ++b) out[b] = pass.Predict(b);
    return out;
  };
}

int InformativenessMatrix::num_reconstructed() const {
  return static_cast<int>(std::count(reconstructed.begin(), reconstructed.end(), true));
}

InformativenessMatrix Informativeness(const Language& language, const BatchPredictor& predictor,
                                      const SubstitutionOptions& options) {
  language.Validate();
  if (options.repeats < 1) throw ConfigError("substitution repeats must be >= 1");
  const int n = language.size();
  const int symbols = language.alphabet.voc_size - 1;

  InformativenessMatrix lambda;
  lambda.reconstructed.assign(n, false);
  lambda.flags.assign(n, {});
  const std::vector<int> original = PredictChunked(predictor, language.messages, options.jobs);

  struct Probe {
    int input;
    int position;
  };
  std::vector<Message> probes;
  std::vector<Probe> where;
  for (int k = 0; k < n; ++k) {
    lambda.reconstructed[k] = original[k] == k;
    if (!lambda.reconstructed[k]) continue;
    const Message& m = language.messages[k];
    Rng rng = Rng::Stream(options.seed, static_cast<std::uint64_t>(k));
    lambda.flags[k].assign(m.Length() - 1, 0);
    for (int pos = 0; pos + 1 < m.Length(); ++pos) {
      for (int r = 0; r < options.repeats; ++r) {
        Message probe = m;
        probe.symbols[pos] = 1 + static_cast<int>(rng.UniformInt(symbols));
        probes.push_back(std::move(probe));
        where.push_back({k, pos});
      }
    }
  }
  const std::vector<int> predicted = PredictChunked(predictor, probes, options.jobs);

  std::vector<std::vector<int>> flips(n);
  for (int k = 0; k < n; ++k) flips[k].assign(lambda.flags[k].size(), 0);
  for (std::size_t p = 0; p < probes.size(); ++p) {
    if (predicted[p] != where[p].input) ++flips[where[p].input][where[p].position];
  }
  for (int k = 0; k < n; ++k) {
    for (std::size_t pos = 0; pos < flips[k].size(); ++pos) {
      const int f = flips[k][pos];
      lambda.flags[k][pos] = options.policy == SubstitutionPolicy::kAny ? (f > 0)
                                                                        : (2 * f > options.repeats);
    }
  }
  return lambda;
}

InformativenessMatrix AllInformative(const Language& language) {
  InformativenessMatrix lambda;
  lambda.reconstructed.assign(language.size(), true);
  for (const auto& m : language.messages) lambda.flags.emplace_back(m.Length() - 1, 1);
  return lambda;
}

std::vector<PositionFraction> PositionalSpectrum(const InformativenessMatrix& lambda) {
  std::vector<int> sums, counts;
  for (int k = 0; k < lambda.size(); ++k) {
    if (!lambda.reconstructed[k]) continue;
    const auto& f = lambda.flags[k];
    if (f.size() > counts.size()) {
      counts.resize(f.size(), 0);
      sums.resize(f.size(), 0);
    }
    for (std::size_t pos = 0; pos < f.size(); ++pos) {
      ++counts[pos];
      sums[pos] += f[pos];
    }
  }
  std::vector<PositionFraction> out;
  for (std::size_t pos = 0; pos < counts.size(); ++pos) {
    if (counts[pos] == 0) continue;
    out.push_back({static_cast<int>(pos) + 1, static_cast<double>(sums[pos]) / counts[pos],
                   counts[pos]});
  }
  return out;
}

double EffectiveLength(const InformativenessMatrix& lambda) {
  const int considered = lambda.num_reconstructed();
  if (considered == 0) throw ConfigError("L_eff: no correctly reconstructed messages");
  double total = 0.0;
  for (int k = 0; k < lambda.size(); ++k) {
    if (!lambda.reconstructed[k]) continue;
    total += std::accumulate(lambda.flags[k].begin(), lambda.flags[k].end(), 0);
  }
  return total / considered;
}

double InformationDensity(const InformativenessMatrix& lambda) {
  const int considered = lambda.num_reconstructed();
  if (considered == 0) throw ConfigError("rho_inf: no correctly reconstructed messages");
  double total = 0.0;
  for (int k = 0; k < lambda.size(); ++k) {
    if (!lambda.reconstructed[k]) continue;
    const auto& f = lambda.flags[k];
    if (f.empty()) {
      total += 1.0;  // (EOS): 0/0 := 1
    } else {
      total += static_cast<double>(std::accumulate(f.begin(), f.end(), 0)) / f.size();
    }
  }
  return total / considered;
}

FrequencyLengthMapping InformativePartLengths(const InformativenessMatrix& lambda,
                                              const Language& language) {
  if (lambda.size() != language.size()) {
    throw ConfigError("informativeness matrix does not match the language");
  }
  FrequencyLengthMapping out;
  double total = 0.0;
  for (int k = 0; k < lambda.size(); ++k) {
    if (!lambda.reconstructed[k]) continue;
    out.frequencies.push_back(language.probabilities[k]);
    out.lengths.push_back(std::accumulate(lambda.flags[k].begin(), lambda.flags[k].end(), 0));
    total += language.probabilities[k];
  }
  if (out.lengths.empty()) throw ConfigError("no correctly reconstructed messages");
  if (total > 0.0) {
    for (double& f : out.frequencies) f /= total;
  }
  return out;
}

// ---------------------------------------------------------------------------

double DeltaStab(std::span<const double> series, int window) {
  const int n = static_cast<int>(series.size());
  if (n < 3) throw ConfigError("delta_stab needs at least 3 points");
  if (window < 1 || window % 2 == 0) throw ConfigError("delta_stab window must be odd");
  const int half = window / 2;
  double mse = 0.0;
  for (int i = 0; i < n; ++i) {
    const int w = std::min({half, i, n - 1 - i});
    // Deviation from the local mean, summed as differences so that a
    // constant window gives exactly zero.
    double dev = 0.0;
    for (int j = i - w; j <= i + w; ++j) dev += series[j] - series[i];
    dev /= 2 * w + 1;
    mse += dev * dev;
  }
  return mse / n;
}

MinimalLengthResult MinimalRequiredLength(
    const std::vector<std::vector<int>>& prefix_predictions) {
  MinimalLengthResult out;
  const int n = static_cast<int>(prefix_predictions.size());
  out.lengths.assign(n, 0);
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto& pred = prefix_predictions[k];
    if (pred.empty() || pred.back() != k) continue;
    int start = static_cast<int>(pred.size()) - 1;
    while (start > 0 && pred[start - 1] == k) --start;
    out.lengths[k] = start + 1;
    if (std::find(pred.begin(), pred.begin() + start, k) != pred.begin() + start) {
      ++out.monotonicity_violations;
    }
    ++out.num_reconstructed;
    sum += out.lengths[k];
  }
  if (out.num_reconstructed > 0) out.mean_length = sum / out.num_reconstructed;
  return out;
}

MinimalLengthResult MinimalRequiredLength(const Language& language,
                                          const ListenerParams& impatient_listener) {
  language.Validate();
  std::vector<std::vector<int>> prefix(language.size());
  for (std::size_t begin = 0; begin < language.messages.size(); begin += kPredictChunk) {
    const std::size_t count = std::min(kPredictChunk, language.messages.size() - begin);
    const ListenerPass pass =
        ListenerForward(impatient_listener, ListenerKind::kImpatient,
                        std::span<const Message>(language.messages.data() + begin, count));
    for (int b = 0; b < pass.batch_size(); ++b) {
      auto& p = prefix[begin + b];
      for (int j = 0; j < pass.NumPredictions(b); ++j) p.push_back(ArgMax(pass.LogProbs(b, j)));
    }
  }
  return MinimalRequiredLength(prefix);
}

// ---------------------------------------------------------------------------

MetricsReport LengthReport(const FrequencyLengthMapping& mapping, std::int64_t permutations,
                           Rng& rng) {
  MetricsReport report;
  report.n_messages = mapping.size();
  report.l_type = LType(mapping);
  report.l_token = LToken(mapping);
  const RandomizationResult test = RandomizationTest(mapping, permutations, rng);
  report.p_zla_left = test.p_left;
  report.p_zla_right = test.p_right;
  report.permutations = permutations;
  return report;
}

void AddInformativeness(const InformativenessMatrix& lambda, const Language& language,
                        std::int64_t permutations, Rng& rng, MetricsReport* report) {
  report->n_reconstructed = lambda.num_reconstructed();
  if (*report->n_reconstructed == 0) return;
  report->l_eff = EffectiveLength(lambda);
  report->rho_inf = InformationDensity(lambda);
  report->spectrum = PositionalSpectrum(lambda);
  const FrequencyLengthMapping informative = InformativePartLengths(lambda, language);
  report->informative_p_zla_left = RandomizationTest(informative, permutations, rng).p_left;
}

}  // namespace zla
