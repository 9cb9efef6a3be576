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

#include <vector>

#include <benchmark/benchmark.h>

#include "zla/agents.h"
#include "zla/metrics.h"
#include "zla/numcore.h"
#include "zla/random.h"
#include "zla/refcodes.h"
#include "zla/training.h"

namespace zla {
namespace {

// Args: batch, hidden.
void BM_LstmCellForwardBackward(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  const int hidden = static_cast<int>(state.range(1));
  Rng rng(1);
  const LstmCellParams params = LstmCellParams::Init(hidden, hidden, rng);
  LstmCellParams grads = LstmCellParams::Zeros(hidden, hidden);
  Matrix x(batch, hidden), h(batch, hidden), c(batch, hidden);
  FillUniform(x, 1.0, rng);
  FillUniform(h, 1.0, rng);
  FillUniform(c, 1.0, rng);
  const Matrix grad = Matrix::Ones(batch, hidden);
  for (auto _ : state) {
    const LstmStep step = LstmCellForward(params, x, h, c);
    benchmark::DoNotOptimize(LstmCellBackward(params, step.cache, grad, grad, &grads));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_LstmCellForwardBackward)->Args({128, 64})->Args({512, 100})->Args({512, 600});

// One training batch of the desk-scale game: rollout, listener pass and
// gradients. Args: batch, speaker hidden, listener hidden.
void BM_TrainingBatch(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  const Alphabet alphabet{10, 10};
  Rng rng(2);
  const SpeakerParams speaker =
      SpeakerParams::Init({100, 10, static_cast<int>(state.range(1)), 32}, rng);
  const ListenerParams listener =
      ListenerParams::Init({100, 10, static_cast<int>(state.range(2)), 32}, rng);
  SpeakerParams sg = SpeakerParams::Zeros(speaker.shape());
  ListenerParams lg = ListenerParams::Zeros(listener.shape());
  const InputSpace space(100, Distribution::kPowerLaw);
  std::vector<int> inputs(batch);
  for (auto _ : state) {
    for (int& i : inputs) i = space.Sample(rng);
    const SpeakerRollout rollout =
        RolloutSpeaker(speaker, alphabet, inputs, DecodeMode::kSample, &rng);
    const ListenerPass pass = ListenerForward(listener, ListenerKind::kImpatient, rollout.messages);
    benchmark::DoNotOptimize(AccumulateSurrogateGradient(
        System::kLazImpa, {0.05, 0.01, 1.0}, rollout, pass, speaker, listener, &sg, &lg));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_TrainingBatch)->Args({128, 64, 64})->Args({512, 100, 600});

void BM_RandomizationTest(benchmark::State& state) {
  const Language l = OptimalCoding(40, InputSpace(1000, Distribution::kPowerLaw));
  const FrequencyLengthMapping m = ToMapping(l);
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(RandomizationTest(m, state.range(0), rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RandomizationTest)->Arg(10000);

void BM_OptimalCoding(benchmark::State& state) {
  const InputSpace space(1000, Distribution::kPowerLaw);
  for (auto _ : state) benchmark::DoNotOptimize(OptimalCoding(static_cast<int>(state.range(0)), space));
}
BENCHMARK(BM_OptimalCoding)->Arg(10)->Arg(40);

// Substitution test of 1000 Monkey Typing messages against a random
// impatient listener.
void BM_Informativeness(benchmark::State& state) {
  Rng rng(4);
  const Language l = MonkeyLanguage(40, 30, InputSpace(1000, Distribution::kPowerLaw), rng);
  const ListenerParams listener = ListenerParams::Init({1000, 40, 100, 32}, rng);
  const BatchPredictor predictor = ListenerPredictor(ListenerKind::kImpatient, listener);
  for (auto _ : state) benchmark::DoNotOptimize(Informativeness(l, predictor));
}
BENCHMARK(BM_Informativeness)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace zla

BENCHMARK_MAIN();
