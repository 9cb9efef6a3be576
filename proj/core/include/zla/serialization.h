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

#ifndef ZLA_SERIALIZATION_H_
#define ZLA_SERIALIZATION_H_

// On-disk formats.
//
// Language dump (TSV):
//   # zla-language v1 voc_size=<V> max_len=<L> [label=<text>]
//   <rank>\t<probability>\t<space-separated symbol ids, EOS (0) included>
// Run trace (CSV): one row per epoch, header
//   epoch,uniform_acc,weighted_acc_ema,mean_length,mean_loss,task_loss,
//   length_loss,entropy,alpha
// Checkpoint (JSON):
//   {"format": "zla-checkpoint", "version": 1, "config": {...},
//    "speaker": {"<tensor>": {"shape": [rows, cols], "data": [...]}, ...},
//    "listener": {...}}
// with row-major float64 data. Doubles are written with enough digits to
// read back exactly.

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "zla/agents.h"
#include "zla/game.h"
#include "zla/metrics.h"
#include "zla/refcodes.h"
#include "zla/training.h"

namespace zla {

// "%.17g" rendering.
std::string FormatDouble(double value);

void WriteLanguageTsv(std::ostream& out, const Language& language, std::string_view label = {});
// Throws IoError on malformed input and ConfigError if the result is not a
// valid Language.
Language ReadLanguageTsv(std::istream& in);
void SaveLanguage(const std::string& path, const Language& language, std::string_view label = {});
Language LoadLanguage(const std::string& path);

void WriteTraceCsv(std::ostream& out, std::span<const EpochRecord> epochs);
std::vector<EpochRecord> ReadTraceCsv(std::istream& in);
void SaveTrace(const std::string& path, std::span<const EpochRecord> epochs);
std::vector<EpochRecord> LoadTrace(const std::string& path);

nlohmann::json ConfigToJson(const TrainConfig& config);
// Missing keys keep their defaults; unknown keys throw ConfigError.
TrainConfig ConfigFromJson(const nlohmann::json& j);

struct Checkpoint {
  TrainConfig config;
  SpeakerParams speaker;
  ListenerParams listener;
};

nlohmann::json CheckpointToJson(const Checkpoint& checkpoint);
// Shapes are checked against the stored config.
Checkpoint CheckpointFromJson(const nlohmann::json& j);
void SaveCheckpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint LoadCheckpoint(const std::string& path);

// Absent optional metrics are written as "/".
nlohmann::json MetricsToJson(const MetricsReport& report);

// Trailing mean over the last `window` points (fewer at the start). A
// window of 1 or less returns the input.
std::vector<double> SlidingAverage(std::span<const double> values, int window);

// rank,length (rank is 1-based).
void WriteLengthByRankCsv(std::ostream& out, const FrequencyLengthMapping& mapping,
                          int smooth = 0);
// position,fraction,count
void WriteSpectrumCsv(std::ostream& out, std::span<const PositionFraction> spectrum);
// epoch,uniform_acc,mean_length
void WriteLearningPathCsv(std::ostream& out, std::span<const EpochRecord> epochs, int smooth = 0);
// symbol,probability
void WriteUnigramCsv(std::ostream& out, const UnigramDistribution& unigrams);

nlohmann::json LoadJson(const std::string& path);
// Pretty-printed with a trailing newline.
void SaveJson(const std::string& path, const nlohmann::json& j);

}  // namespace zla

#endif  // ZLA_SERIALIZATION_H_
