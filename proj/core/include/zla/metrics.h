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

#ifndef ZLA_METRICS_H_
#define ZLA_METRICS_H_

// Efficiency metrics, the frequency/length randomization test, the
// symbol-substitution informativeness analysis and related statistics.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "zla/agents.h"
#include "zla/game.h"
#include "zla/random.h"
#include "zla/refcodes.h"

namespace zla {

// Mean length, every entry weighted equally.
double LType(const FrequencyLengthMapping& mapping);
double LType(const Language& language);

// Frequency-weighted mean length. Frequencies must sum to 1 within 1e-9.
double LToken(const FrequencyLengthMapping& mapping);
double LToken(const Language& language);

struct RandomizationResult {
  double observed = 0.0;  // L_token of the unpermuted mapping
  double p_left = 1.0;    // small: shorter than chance (ZLA)
  double p_right = 1.0;   // small: longer than chance (anti-ZLA)
  std::int64_t permutations = 0;
};

// Monte-Carlo permutation test of the frequency-length pairing. The identity
// permutation is counted, so p = (1 + hits) / (1 + permutations).
RandomizationResult RandomizationTest(const FrequencyLengthMapping& mapping,
                                      std::int64_t permutations, Rng& rng);

inline constexpr double kZlaSignificance = 1e-3;

// ---------------------------------------------------------------------------
// Informativeness

// Batch prediction: one reconstructed input index per message.
using BatchPredictor = std::function<std::vector<int>(std::span<const Message>)>;

BatchPredictor ListenerPredictor(ListenerKind kind, const ListenerParams& params);

enum class SubstitutionPolicy { kAny, kMajority };

// Lambda flags per input. `flags[k]` covers positions 1..l(m)-1 of message k
// and is empty for (EOS) messages and for misreconstructed inputs.
struct InformativenessMatrix {
  std::vector<bool> reconstructed;
  std::vector<std::vector<int>> flags;

  int size() const { return static_cast<int>(flags.size()); }
  int num_reconstructed() const;
};

struct SubstitutionOptions {
  int repeats = 1;
  SubstitutionPolicy policy = SubstitutionPolicy::kAny;
  std::uint64_t seed = 0;
  int jobs = 1;
};

// Replaces each non-EOS symbol by a uniform draw over the ordinary symbols
// and records whether the prediction moves away from the true input. Input k
// draws from its own stream, so the result does not depend on `jobs`.
InformativenessMatrix Informativeness(const Language& language, const BatchPredictor& predictor,
                                      const SubstitutionOptions& options = {});

// Reference-code convention: every ordinary symbol is informative.
InformativenessMatrix AllInformative(const Language& language);

struct PositionFraction {
  int position = 0;  // 1-based
  double fraction = 0.0;
  int count = 0;     // messages with an ordinary symbol at this position
};

// Positions no considered message reaches are omitted.
std::vector<PositionFraction> PositionalSpectrum(const InformativenessMatrix& lambda);

// Mean number of informative symbols per considered message.
double EffectiveLength(const InformativenessMatrix& lambda);

// Mean informative fraction per considered message, 0/0 counted as 1.
double InformationDensity(const InformativenessMatrix& lambda);

// Per considered message, the count of informative symbols. Frequencies are
// renormalized over the considered messages.
FrequencyLengthMapping InformativePartLengths(const InformativenessMatrix& lambda,
                                              const Language& language);

// ---------------------------------------------------------------------------

// Mean squared deviation from the centered moving average of `window`
// (odd) points; windows shrink symmetrically at the edges.
double DeltaStab(std::span<const double> series, int window = 11);

struct MinimalLengthResult {
  // 1-based first position from which every prediction is correct; 0 for
  // misreconstructed inputs.
  std::vector<int> lengths;
  double mean_length = 0.0;  // over reconstructed inputs
  int num_reconstructed = 0;
  int monotonicity_violations = 0;
};

// `prefix_predictions[k][j]` is the argmax after reading position j of the
// message for input k.
MinimalLengthResult MinimalRequiredLength(
    const std::vector<std::vector<int>>& prefix_predictions);

MinimalLengthResult MinimalRequiredLength(const Language& language,
                                          const ListenerParams& impatient_listener);

// ---------------------------------------------------------------------------

struct MetricsReport {
  int n_messages = 0;
  double l_type = 0.0;
  double l_token = 0.0;
  double p_zla_left = 1.0;
  double p_zla_right = 1.0;
  std::int64_t permutations = 0;
  // Metrics that need a listener (or a reference convention) are optional.
  std::optional<int> n_reconstructed;
  std::optional<double> l_eff;
  std::optional<double> rho_inf;
  std::optional<double> minimal_length;
  std::optional<double> v_eff;
  std::optional<double> delta_stab;
  std::optional<double> informative_p_zla_left;
  std::vector<PositionFraction> spectrum;
};

// Length metrics and the randomization test for a plain mapping.
MetricsReport LengthReport(const FrequencyLengthMapping& mapping, std::int64_t permutations,
                           Rng& rng);

// Adds the informativeness-derived fields to `report`.
void AddInformativeness(const InformativenessMatrix& lambda, const Language& language,
                        std::int64_t permutations, Rng& rng, MetricsReport* report);

}  // namespace zla

#endif  // ZLA_METRICS_H_
