/* Copyright 2026 The Gicx Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "gicx/pipeline/run_config.h"

#include <charconv>
#include <string>
#include <system_error>
#include <variant>

#include "gicx/numerics/byte_io.h"
#include "gicx/numerics/errors.h"

namespace gicx {
namespace {

using Widths = std::array<int, 3>;
using Field = std::variant<int RunConfig::*, uint64_t RunConfig::*, double RunConfig::*,
                           bool RunConfig::*, std::string RunConfig::*, Widths RunConfig::*>;

struct Entry {
  std::string_view key;
  Field field;
};

const std::vector<Entry>& Table() {
  static const std::vector<Entry> table = {
      {"seed", &RunConfig::seed},
      {"checkpoint", &RunConfig::checkpoint},
      {"model.height", &RunConfig::height},
      {"model.width", &RunConfig::width},
      {"model.codec", &RunConfig::codec},
      {"model.latent_channels", &RunConfig::latent_channels},
      {"model.ae_hidden", &RunConfig::ae_hidden},
      {"model.widths", &RunConfig::widths},
      {"model.embed_dim", &RunConfig::embed_dim},
      {"model.tokens", &RunConfig::tokens},
      {"model.dims", &RunConfig::dims},
      {"model.cond_hidden", &RunConfig::cond_hidden},
      {"schedule.steps", &RunConfig::schedule_steps},
      {"schedule.beta_start", &RunConfig::beta_start},
      {"schedule.beta_end", &RunConfig::beta_end},
      {"train.steps", &RunConfig::train_steps},
      {"train.batch", &RunConfig::train_batch},
      {"train.lr", &RunConfig::train_lr},
      {"train.p_uncond", &RunConfig::p_uncond},
      {"train.embedding_lr", &RunConfig::embedding_lr},
      {"train.flip", &RunConfig::flip},
      {"train.ae_steps", &RunConfig::ae_steps},
      {"train.ae_batch", &RunConfig::ae_batch},
      {"train.ae_lr", &RunConfig::ae_lr},
      {"inversion.steps", &RunConfig::inversion_steps},
      {"inversion.lr", &RunConfig::inversion_lr},
      {"inversion.draws", &RunConfig::inversion_draws},
      {"inversion.quantize_in_loop", &RunConfig::quantize_in_loop},
      {"embedding.levels", &RunConfig::embedding_levels},
      {"guidance.levels", &RunConfig::guidance_levels},
      {"guidance.s_c", &RunConfig::s_c},
      {"guidance.s_f", &RunConfig::s_f},
      {"guidance.full_backprop", &RunConfig::full_backprop},
      {"guidance.clamp_x0", &RunConfig::clamp_x0},
      {"sampler.steps", &RunConfig::sampler_steps},
      {"sampler.eta", &RunConfig::eta},
      {"samples", &RunConfig::samples},
      {"dataset.count", &RunConfig::dataset_count},
      {"dataset.kind", &RunConfig::dataset_kind},
  };
  return table;
}

const Entry& Find(std::string_view key) {
  for (const Entry& e : Table()) {
    if (e.key == key) return e;
  }
  throw ParameterError("unknown config key '" + std::string(key) + "'");
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void BadValue(std::string_view key, std::string_view value, const char* expected) {
  throw ParameterError("config key '" + std::string(key) + "': '" + std::string(value) +
                       "' is not " + expected);
}

template <class T>
T ParseNumber(std::string_view key, std::string_view value, const char* expected) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) BadValue(key, value, expected);
  return out;
}

template <class T>
std::string FormatNumber(T v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

Preset ParsePreset(std::string_view name) {
  if (name == "toy") return Preset::kToy;
  if (name == "paper") return Preset::kPaper;
  throw ParameterError("unknown preset '" + std::string(name) + "' (expected toy or paper)");
}

RunConfig RunConfig::ForPreset(Preset preset) {
  RunConfig c;
  if (preset == Preset::kToy) {
    c.sampler_steps = 20;
    c.eta = 0.0;
    return c;
  }
  c.height = 512;
  c.width = 768;
  c.codec = "autoencoder";
  c.latent_channels = 4;
  c.ae_hidden = 64;
  c.widths = {32, 64, 128};
  c.tokens = kPaperInversionPreset.tokens;
  c.dims = kPaperInversionPreset.dims;
  c.cond_hidden = 128;
  c.ae_steps = 2000;
  c.train_steps = 4000;
  c.inversion_steps = kPaperInversionPreset.steps;
  c.sampler_steps = 100;
  c.eta = 1.0;
  return c;
}

const std::vector<std::string>& RunConfig::Keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const Entry& e : Table()) k.emplace_back(e.key);
    return k;
  }();
  return keys;
}

void RunConfig::Set(std::string_view key, std::string_view value) {
  const Entry& entry = Find(key);
  value = Trim(value);
  std::visit(
      [&](auto member) {
        using T = std::remove_reference_t<decltype(this->*member)>;
        T& slot = this->*member;
        if constexpr (std::is_same_v<T, int>) {
          slot = ParseNumber<int>(key, value, "an integer");
        } else if constexpr (std::is_same_v<T, uint64_t>) {
          slot = ParseNumber<uint64_t>(key, value, "an unsigned integer");
        } else if constexpr (std::is_same_v<T, double>) {
          slot = ParseNumber<double>(key, value, "a number");
        } else if constexpr (std::is_same_v<T, bool>) {
          if (value == "true" || value == "1") {
            slot = true;
          } else if (value == "false" || value == "0") {
            slot = false;
          } else {
            BadValue(key, value, "true or false");
          }
        } else if constexpr (std::is_same_v<T, std::string>) {
          slot = std::string(value);
        } else {
          Widths w{};
          std::string_view rest = value;
          for (int i = 0; i < 3; ++i) {
            const auto comma = rest.find(',');
            if ((i < 2) == (comma == std::string_view::npos)) {
              BadValue(key, value, "three comma-separated integers");
            }
            w[i] = ParseNumber<int>(key, Trim(rest.substr(0, comma)),
                                    "three comma-separated integers");
            rest = i < 2 ? rest.substr(comma + 1) : std::string_view();
          }
          slot = w;
        }
      },
      entry.field);
}

std::string RunConfig::Get(std::string_view key) const {
  const Entry& entry = Find(key);
  return std::visit(
      [&](auto member) -> std::string {
        using T = std::remove_cvref_t<decltype(this->*member)>;
        const T& slot = this->*member;
        if constexpr (std::is_same_v<T, bool>) {
          return slot ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return slot;
        } else if constexpr (std::is_same_v<T, Widths>) {
          return FormatNumber(slot[0]) + "," + FormatNumber(slot[1]) + "," +
                 FormatNumber(slot[2]);
        } else {
          return FormatNumber(slot);
        }
      },
      entry.field);
}

std::string RunConfig::ToText() const {
  std::string out;
  for (const Entry& e : Table()) {
    out += std::string(e.key) + " = " + Get(e.key) + "\n";
  }
  return out;
}

void RunConfig::ApplyText(std::string_view text) {
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParameterError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      Set(Trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ParameterError& e) {
      throw ParameterError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::Validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ParameterError(what);
  };
  require(codec == "identity" || codec == "autoencoder",
          "model.codec must be identity or autoencoder");
  ParseToyKind(dataset_kind);
  require(samples >= 1, "samples must be at least 1");
  require(dataset_count >= 1, "dataset.count must be at least 1");
  require(embedding_levels >= 2 && embedding_levels <= 256,
          "embedding.levels must be in [2, 256]");
  require(guidance_levels >= 2 && guidance_levels <= 256, "guidance.levels must be in [2, 256]");
  require(ae_steps >= 0 && ae_batch >= 1 && ae_lr > 0.0, "bad autoencoder training settings");
  const ModelConfig model = ToModelConfig().Resolved();
  ToTrainConfig().Validate();
  ToInversionConfig().Validate();
  ToSamplerConfig(0).Validate(NoiseSchedule::Make(model.schedule));
  require(std::isfinite(s_c) && s_c >= 0.0, "guidance.s_c must be finite and non-negative");
  require(std::isfinite(s_f) && s_f >= 0.0, "guidance.s_f must be finite and non-negative");
}

ModelConfig RunConfig::ToModelConfig() const {
  ModelConfig m;
  m.image_height = height;
  m.image_width = width;
  m.codec = codec == "autoencoder" ? LatentCodecKind::kAutoencoder : LatentCodecKind::kIdentity;
  m.autoencoder = {.latent_channels = latent_channels, .hidden = ae_hidden};
  m.net.widths = widths;
  m.net.embed_dim = embed_dim;
  m.net.tokens = tokens;
  m.net.dims = dims;
  m.net.cond_hidden = cond_hidden;
  m.schedule = {ScheduleKind::kLinear, static_cast<uint32_t>(std::max(schedule_steps, 0)),
                beta_start, beta_end};
  m.seed = seed;
  return m;
}

TrainConfig RunConfig::ToTrainConfig() const {
  return {.steps = train_steps,
          .batch = train_batch,
          .learning_rate = train_lr,
          .p_uncond = p_uncond,
          .flip = flip,
          .embedding_learning_rate = embedding_lr,
          .seed = seed};
}

InversionConfig RunConfig::ToInversionConfig() const {
  InversionConfig c;
  c.steps = inversion_steps;
  c.learning_rate = inversion_lr;
  c.quantize_in_loop = quantize_in_loop;
  c.quantizer.levels = static_cast<uint32_t>(embedding_levels);
  c.draws_per_step = inversion_draws;
  c.seed = seed;
  return c;
}

SamplerConfig RunConfig::ToSamplerConfig(int sample) const {
  return {.num_steps = sampler_steps, .eta = eta, .seed = seed + static_cast<uint64_t>(sample)};
}

ToyDatasetSpec RunConfig::ToDatasetSpec() const {
  return {.count = dataset_count,
          .height = height,
          .width = width,
          .seed = seed,
          .kind = ParseToyKind(dataset_kind)};
}

RunConfig LoadRunConfig(const std::string& path, Preset base) {
  RunConfig c = RunConfig::ForPreset(base);
  const std::vector<uint8_t> bytes = ReadFileBytes(path);
  c.ApplyText(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  return c;
}

}  // namespace gicx
