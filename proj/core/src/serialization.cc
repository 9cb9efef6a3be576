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

#include "zla/serialization.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "zla/errors.h"

namespace zla {
namespace {

constexpr std::string_view kLanguageMagic = "# zla-language v1";
constexpr std::string_view kTraceHeader =
    "epoch,uniform_acc,weighted_acc_ema,mean_length,mean_loss,task_loss,length_loss,entropy,"
    "alpha";

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

std::ifstream OpenIn(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

void CheckWritten(std::ostream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to " + path + " failed");
}

double ParseDouble(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw IoError("bad number for " + what + ": '" + text + "'");
  }
}

int ParseInt(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw IoError("bad integer for " + what + ": '" + text + "'");
  }
}

std::vector<std::string> Split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

void StripCr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

nlohmann::json TensorsToJson(const std::vector<ConstNamedTensor>& tensors) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& t : tensors) {
    const Matrix& m = *t.value;
    out[std::string(t.name)] = {
        {"shape", {m.rows(), m.cols()}},
        {"data", std::vector<double>(m.data(), m.data() + m.size())},
    };
  }
  return out;
}

void TensorsFromJson(const nlohmann::json& j, const std::vector<NamedTensor>& tensors,
                     std::string_view owner) {
  if (!j.is_object()) throw IoError(std::string(owner) + ": expected an object of tensors");
  if (j.size() != tensors.size()) {
    throw IoError(std::string(owner) + ": expected " + std::to_string(tensors.size()) +
                  " tensors, found " + std::to_string(j.size()));
  }
  for (const auto& t : tensors) {
    const std::string name(t.name);
    if (!j.contains(name)) throw IoError(std::string(owner) + ": missing tensor " + name);
    const auto& entry = j.at(name);
    const auto shape = entry.at("shape").get<std::vector<long>>();
    const auto data = entry.at("data").get<std::vector<double>>();
    Matrix& m = *t.value;
    if (shape.size() != 2 || shape[0] != m.rows() || shape[1] != m.cols()) {
      throw IoError(std::string(owner) + ": tensor " + name + " has the wrong shape");
    }
    if (static_cast<long>(data.size()) != m.size()) {
      throw IoError(std::string(owner) + ": tensor " + name + " has the wrong element count");
    }
    std::copy(data.begin(), data.end(), m.data());
  }
}

}  // namespace

std::string FormatDouble(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

// ---------------------------------------------------------------------------
// Language

void WriteLanguageTsv(std::ostream& out, const Language& language, std::string_view label) {
  language.Validate();
  out << kLanguageMagic << " voc_size=" << language.alphabet.voc_size
      << " max_len=" << language.alphabet.max_len;
  if (!label.empty()) out << " label=" << label;
  out << '\n';
  for (int k = 0; k < language.size(); ++k) {
    out << (k + 1) << '\t' << FormatDouble(language.probabilities[k]) << '\t'
        << FormatMessage(language.messages[k]) << '\n';
  }
}

Language ReadLanguageTsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty language dump");
  StripCr(line);
  if (line.rfind(kLanguageMagic, 0) != 0) throw IoError("not a language dump: missing header");

  Language language;
  language.alphabet = Alphabet{0, 0};
  std::istringstream header(line.substr(kLanguageMagic.size()));
  std::string field;
  while (header >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
    if (key == "voc_size") language.alphabet.voc_size = ParseInt(value, key);
    if (key == "max_len") language.alphabet.max_len = ParseInt(value, key);
  }
  if (language.alphabet.voc_size == 0 || language.alphabet.max_len == 0) {
    throw IoError("language dump header lacks voc_size or max_len");
  }

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    StripCr(line);
    if (line.empty() || line[0] == '#') continue;
    const auto fields = Split(line, '\t');
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() != 3) throw IoError(where + ": expected 3 tab-separated fields");
    const int rank = ParseInt(fields[0], where + " rank");
    if (rank != language.size() + 1) throw IoError(where + ": ranks must be 1, 2, ... in order");
    language.probabilities.push_back(ParseDouble(fields[1], where + " probability"));
    Message m;
    std::istringstream symbols(fields[2]);
    std::string s;
    while (symbols >> s) m.symbols.push_back(ParseInt(s, where + " symbol"));
    language.messages.push_back(std::move(m));
  }
  language.Validate();
  return language;
}

void SaveLanguage(const std::string& path, const Language& language, std::string_view label) {
  auto out = OpenOut(path);
  WriteLanguageTsv(out, language, label);
  CheckWritten(out, path);
}

Language LoadLanguage(const std::string& path) {
  auto in = OpenIn(path);
  return ReadLanguageTsv(in);
}

// ---------------------------------------------------------------------------
// Trace

void WriteTraceCsv(std::ostream& out, std::span<const EpochRecord> epochs) {
  out << kTraceHeader << '\n';
  for (const auto& e : epochs) {
    out << e.epoch << ',' << FormatDouble(e.uniform_accuracy) << ','
        << FormatDouble(e.weighted_accuracy_ema) << ',' << FormatDouble(e.mean_length) << ','
        << FormatDouble(e.mean_loss) << ',' << FormatDouble(e.mean_task_loss) << ','
        << FormatDouble(e.mean_length_loss) << ',' << FormatDouble(e.mean_entropy) << ','
        << FormatDouble(e.alpha) << '\n';
  }
}

std::vector<EpochRecord> ReadTraceCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty trace");
  StripCr(line);
  if (line != kTraceHeader) throw IoError("unexpected trace header: " + line);
  std::vector<EpochRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    StripCr(line);
    if (line.empty()) continue;
    const auto f = Split(line, ',');
    const std::string where = "trace line " + std::to_string(line_no);
    if (f.size() != 9) throw IoError(where + ": expected 9 fields");
    EpochRecord e;
    e.epoch = ParseInt(f[0], where);
    e.uniform_accuracy = ParseDouble(f[1], where);
    e.weighted_accuracy_ema = ParseDouble(f[2], where);
    e.mean_length = ParseDouble(f[3], where);
    e.mean_loss = ParseDouble(f[4], where);
    e.mean_task_loss = ParseDouble(f[5], where);
    e.mean_length_loss = ParseDouble(f[6], where);
    e.mean_entropy = ParseDouble(f[7], where);
    e.alpha = ParseDouble(f[8], where);
    out.push_back(e);
  }
  return out;
}

void SaveTrace(const std::string& path, std::span<const EpochRecord> epochs) {
  auto out = OpenOut(path);
  WriteTraceCsv(out, epochs);
  CheckWritten(out, path);
}

std::vector<EpochRecord> LoadTrace(const std::string& path) {
  auto in = OpenIn(path);
  return ReadTraceCsv(in);
}

// ---------------------------------------------------------------------------
// Config and checkpoint

nlohmann::json ConfigToJson(const TrainConfig& c) {
  return {
      {"system", std::string(ToString(c.system))},
      {"n_inputs", c.n_inputs},
      {"voc_size", c.voc_size},
      {"max_len", c.max_len},
      {"distribution", std::string(ToString(c.distribution))},
      {"epochs", c.epochs},
      {"batches_per_epoch", c.batches_per_epoch},
      {"batch_size", c.batch_size},
      {"learning_rate", c.learning_rate},
      {"entropy_coeff", c.entropy_coeff},
      {"schedule_beta1", c.schedule_beta1},
      {"schedule_beta2", c.schedule_beta2},
      {"accuracy_ema_decay", c.accuracy_ema_decay},
      {"success_threshold", c.success_threshold},
      {"speaker_hidden", c.speaker_hidden},
      {"speaker_embed", c.speaker_embed},
      {"listener_hidden", c.listener_hidden},
      {"listener_embed", c.listener_embed},
      {"seed", c.seed},
  };
}

TrainConfig ConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  TrainConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "system") c.system = ParseSystem(value.get<std::string>());
      else if (key == "n_inputs") c.n_inputs = value.get<int>();
      else if (key == "voc_size") c.voc_size = value.get<int>();
      else if (key == "max_len") c.max_len = value.get<int>();
      else if (key == "distribution") c.distribution = ParseDistribution(value.get<std::string>());
      else if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "batches_per_epoch") c.batches_per_epoch = value.get<int>();
      else if (key == "batch_size") c.batch_size = value.get<int>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "entropy_coeff") c.entropy_coeff = value.get<double>();
      else if (key == "schedule_beta1") c.schedule_beta1 = value.get<double>();
      else if (key == "schedule_beta2") c.schedule_beta2 = value.get<double>();
      else if (key == "accuracy_ema_decay") c.accuracy_ema_decay = value.get<double>();
      else if (key == "success_threshold") c.success_threshold = value.get<double>();
      else if (key == "speaker_hidden") c.speaker_hidden = value.get<int>();
      else if (key == "speaker_embed") c.speaker_embed = value.get<int>();
      else if (key == "listener_hidden") c.listener_hidden = value.get<int>();
      else if (key == "listener_embed") c.listener_embed = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

nlohmann::json CheckpointToJson(const Checkpoint& checkpoint) {
  return {
      {"format", "zla-checkpoint"},
      {"version", 1},
      {"config", ConfigToJson(checkpoint.config)},
      {"speaker", TensorsToJson(checkpoint.speaker.Tensors())},
      {"listener", TensorsToJson(checkpoint.listener.Tensors())},
  };
}

Checkpoint CheckpointFromJson(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "zla-checkpoint") throw IoError("not a zla checkpoint");
    if (j.value("version", 0) != 1) throw IoError("unsupported checkpoint version");
    Checkpoint c;
    c.config = ConfigFromJson(j.at("config"));
    c.config.Validate();
    c.speaker = SpeakerParams::Zeros(c.config.speaker_shape());
    c.listener = ListenerParams::Zeros(c.config.listener_shape());
    TensorsFromJson(j.at("speaker"), c.speaker.Tensors(), "speaker");
    TensorsFromJson(j.at("listener"), c.listener.Tensors(), "listener");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint: ") + e.what());
  }
}

void SaveCheckpoint(const std::string& path, const Checkpoint& checkpoint) {
  SaveJson(path, CheckpointToJson(checkpoint));
}

Checkpoint LoadCheckpoint(const std::string& path) { return CheckpointFromJson(LoadJson(path)); }

// ---------------------------------------------------------------------------
// Reports and curves

nlohmann::json MetricsToJson(const MetricsReport& r) {
  auto opt = [](const auto& v) -> nlohmann::json {
    if (v.has_value()) return *v;
    return "/";
  };
  nlohmann::json spectrum = nlohmann::json::array();
  for (const auto& p : r.spectrum) {
    spectrum.push_back({{"position", p.position}, {"fraction", p.fraction}, {"count", p.count}});
  }
  return {
      {"n_messages", r.n_messages},
      {"l_type", r.l_type},
      {"l_token", r.l_token},
      {"p_zla_left", r.p_zla_left},
      {"p_zla_right", r.p_zla_right},
      {"permutations", r.permutations},
      {"n_reconstructed", opt(r.n_reconstructed)},
      {"l_eff", opt(r.l_eff)},
      {"rho_inf", opt(r.rho_inf)},
      {"informative_p_zla_left", opt(r.informative_p_zla_left)},
      {"minimal_length", opt(r.minimal_length)},
      {"v_eff", opt(r.v_eff)},
      {"delta_stab", opt(r.delta_stab)},
      {"spectrum", std::move(spectrum)},
  };
}

std::vector<double> SlidingAverage(std::span<const double> values, int window) {
  std::vector<double> out(values.begin(), values.end());
  if (window <= 1) return out;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= static_cast<std::size_t>(window)) sum -= values[i - window];
    out[i] = sum / static_cast<double>(std::min<std::size_t>(i + 1, window));
  }
  return out;
}

void WriteLengthByRankCsv(std::ostream& out, const FrequencyLengthMapping& mapping, int smooth) {
  const std::vector<double> raw(mapping.lengths.begin(), mapping.lengths.end());
  const std::vector<double> curve = SlidingAverage(raw, smooth);
  out << "rank,length\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << (i + 1) << ',' << FormatDouble(curve[i]) << '\n';
  }
}

void WriteSpectrumCsv(std::ostream& out, std::span<const PositionFraction> spectrum) {
  out << "position,fraction,count\n";
  for (const auto& p : spectrum) {
    out << p.position << ',' << FormatDouble(p.fraction) << ',' << p.count << '\n';
  }
}

void WriteLearningPathCsv(std::ostream& out, std::span<const EpochRecord> epochs, int smooth) {
  std::vector<double> acc, len;
  for (const auto& e : epochs) {
    acc.push_back(e.uniform_accuracy);
    len.push_back(e.mean_length);
  }
  acc = SlidingAverage(acc, smooth);
  len = SlidingAverage(len, smooth);
  out << "epoch,uniform_acc,mean_length\n";
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    out << epochs[i].epoch << ',' << FormatDouble(acc[i]) << ',' << FormatDouble(len[i]) << '\n';
  }
}

void WriteUnigramCsv(std::ostream& out, const UnigramDistribution& unigrams) {
  out << "symbol,probability\n";
  for (std::size_t s = 0; s < unigrams.probs.size(); ++s) {
    out << (s + 1) << ',' << FormatDouble(unigrams.probs[s]) << '\n';
  }
}

nlohmann::json LoadJson(const std::string& path) {
  auto in = OpenIn(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

void SaveJson(const std::string& path, const nlohmann::json& j) {
  auto out = OpenOut(path);
  out << j.dump(2) << '\n';
  CheckWritten(out, path);
}

}  // namespace zla
