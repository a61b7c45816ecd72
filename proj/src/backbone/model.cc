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

#include "gicx/backbone/model.h"

#include <cmath>

#include "gicx/numerics/byte_io.h"
#include "gicx/numerics/errors.h"
#include "gicx/numerics/random.h"
#include "gicx/numerics/snapshot.h"

namespace gicx {

namespace {

constexpr int kThumb = 8;

uint64_t CodecSeed(uint64_t seed) { return seed * 0x9e3779b97f4a7c15ULL + 17; }

// Mean of (x - 0.5) over each of the kThumb x kThumb cells of every channel.
std::vector<double> Thumbnail(const Tensor& image) {
  const int64_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  std::vector<double> out(static_cast<std::size_t>(c * kThumb * kThumb), 0.0);
  for (int64_t ch = 0; ch < c; ++ch) {
    for (int i = 0; i < kThumb; ++i) {
      const int64_t y0 = i * h / kThumb, y1 = (i + 1) * h / kThumb;
      for (int j = 0; j < kThumb; ++j) {
        const int64_t x0 = j * w / kThumb, x1 = (j + 1) * w / kThumb;
        double sum = 0.0;
        for (int64_t y = y0; y < y1; ++y)
          for (int64_t x = x0; x < x1; ++x) sum += image[(ch * h + y) * w + x];
        out[(ch * kThumb + i) * kThumb + j] = sum / static_cast<double>((y1 - y0) * (x1 - x0)) - 0.5;
      }
    }
  }
  return out;
}

void WriteConfig(ByteWriter& w, const ModelConfig& c) {
  w.U32(static_cast<uint32_t>(c.image_height));
  w.U32(static_cast<uint32_t>(c.image_width));
  w.U8(static_cast<uint8_t>(c.codec));
  w.U32(static_cast<uint32_t>(c.autoencoder.latent_channels));
  w.U32(static_cast<uint32_t>(c.autoencoder.hidden));
  for (int v : c.net.widths) w.U32(static_cast<uint32_t>(v));
  w.U32(static_cast<uint32_t>(c.net.embed_dim));
  w.U32(static_cast<uint32_t>(c.net.tokens));
  w.U32(static_cast<uint32_t>(c.net.dims));
  w.U32(static_cast<uint32_t>(c.net.cond_hidden));
  w.U8(static_cast<uint8_t>(c.schedule.kind));
  w.U32(c.schedule.steps);
  w.F64(c.schedule.beta_start);
  w.F64(c.schedule.beta_end);
  w.U64(c.seed);
  w.U64(c.descriptor_seed);
}

int ReadPositive(ByteReader& r, const char* field) {
  const uint32_t v = r.U32(field);
  if (v == 0 || v > (1u << 16)) throw FormatError(field, "out of range");
  return static_cast<int>(v);
}

ModelConfig ReadConfig(ByteReader& r) {
  ModelConfig c;
  c.image_height = ReadPositive(r, "image_height");
  c.image_width = ReadPositive(r, "image_width");
  const uint8_t codec = r.U8("codec");
  if (codec > static_cast<uint8_t>(LatentCodecKind::kAutoencoder)) {
    throw FormatError("codec", "unknown latent codec");
  }
  c.codec = static_cast<LatentCodecKind>(codec);
  c.autoencoder.latent_channels = ReadPositive(r, "latent_channels");
  c.autoencoder.hidden = ReadPositive(r, "autoencoder_hidden");
  for (int& v : c.net.widths) v = ReadPositive(r, "widths");
  c.net.embed_dim = ReadPositive(r, "embed_dim");
  c.net.tokens = ReadPositive(r, "tokens");
  c.net.dims = ReadPositive(r, "dims");
  c.net.cond_hidden = ReadPositive(r, "cond_hidden");
  c.schedule.kind = static_cast<ScheduleKind>(r.U8("schedule.kind"));
  c.schedule.steps = r.U32("schedule.steps");
  c.schedule.beta_start = r.F64("schedule.beta_start");
  c.schedule.beta_end = r.F64("schedule.beta_end");
  c.seed = r.U64("seed");
  c.descriptor_seed = r.U64("descriptor_seed");
  try {
    return c.Resolved();
  } catch (const ParameterError& e) {
    throw FormatError("architecture", e.what());
  }
}

}  // namespace

ModelConfig ModelConfig::Resolved() const {
  ModelConfig c = *this;
  if (image_height < 4 || image_width < 4 || image_height % 4 != 0 || image_width % 4 != 0) {
    throw ParameterError("image size must be positive multiples of 4");
  }
  NoiseSchedule::Make(schedule);
  if (codec == LatentCodecKind::kIdentity) {
    c.net.channels = 3;
    c.net.height = image_height;
    c.net.width = image_width;
  } else {
    c.net.channels = autoencoder.latent_channels;
    c.net.height = image_height / 4;
    c.net.width = image_width / 4;
  }
  c.net.timesteps = static_cast<int>(schedule.steps);
  c.net.Validate();
  return c;
}

Model::Model(const ModelConfig& config)
    : config_(config.Resolved()),
      schedule_(NoiseSchedule::Make(config_.schedule)),
      net_(config_.net, config_.seed),
      codec_(config_.codec == LatentCodecKind::kIdentity
                 ? LatentCodec::Identity()
                 : LatentCodec::Autoencoder(config_.autoencoder, CodecSeed(config_.seed))),
      normalizer_(LatentNormalizer::Unit(config_.net.channels)) {}

void Model::SetTrainable(bool trainable) {
  net_.params().SetTrainable(trainable);
  codec_.params().SetTrainable(trainable);
}

double Model::stat(const std::string& key) const {
  auto it = stats_.find(key);
  if (it == stats_.end()) throw Error("model has no statistic '" + key + "'");
  return it->second;
}

Tensor Model::ToLatent(const Tensor& image) const {
  const Shape expected{3, config_.image_height, config_.image_width};
  if (image.shape() != expected) {
    throw ParameterError("image " + ShapeToString(image.shape()) + " does not match model " +
                         ShapeToString(expected));
  }
  return normalizer_.Standardize(codec_.Encode(image));
}

Tensor Model::ToImage(const Tensor& latent) const {
  return codec_.Decode(normalizer_.Destandardize(latent));
}

Shape Model::latent_shape() const {
  return {config_.net.channels, config_.net.height, config_.net.width};
}

LatentBounds Model::latent_bounds() const {
  LatentBounds b;
  const int channels = config_.net.channels;
  for (int c = 0; c < channels; ++c) {
    if (codec_.kind() == LatentCodecKind::kIdentity) {
      const double mean = normalizer_.mean.empty() ? 0.0 : normalizer_.mean[c];
      const double sd = normalizer_.stddev.empty() ? 1.0 : normalizer_.stddev[c];
      b.lo.push_back((0.0 - mean) / sd);
      b.hi.push_back((1.0 - mean) / sd);
    } else {
      b.lo.push_back(stat("latent_min/" + std::to_string(c)));
      b.hi.push_back(stat("latent_max/" + std::to_string(c)));
    }
  }
  return b;
}

Tensor Model::ImageDescriptor(const Tensor& image) const {
  if (image.rank() != 3 || image.dim(0) != 3 || image.dim(1) < kThumb || image.dim(2) < kThumb) {
    throw DimensionError("descriptor needs a 3 x H x W image with H, W >= 8");
  }
  const std::vector<double> f = Thumbnail(image);
  const int64_t n = static_cast<int64_t>(config_.net.tokens) * config_.net.dims;
  const double scale = 1.0 / std::sqrt(static_cast<double>(f.size()));
  Rng rng(config_.descriptor_seed);
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  for (int64_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (double v : f) acc += rng.Normal() * v;
    e[i] = scale * acc;
  }
  return Tensor({config_.net.tokens, config_.net.dims}, std::move(e));
}

uint64_t Model::Id() const { return Fnv1a64(EncodeCheckpoint(*this)); }

std::vector<uint8_t> EncodeCheckpoint(const Model& model) {
  ByteWriter w;
  w.Tag("GCKP");
  w.U32(kCheckpointVersion);
  WriteConfig(w, model.config());
  const LatentNormalizer& n = model.normalizer();
  w.U32(static_cast<uint32_t>(n.mean.size()));
  for (std::size_t i = 0; i < n.mean.size(); ++i) {
    w.F64(n.mean[i]);
    w.F64(n.stddev[i]);
  }
  const auto& net = model.net().params().entries();
  const auto& codec = model.codec().params().entries();
  w.U32(static_cast<uint32_t>(net.size() + codec.size()));
  for (const auto* list : {&net, &codec}) {
    for (const auto& [name, t] : *list) {
      w.String(list == &net ? "net/" + name : "codec/" + name);
      WriteSnapshot(w, t);
    }
  }
  w.U32(static_cast<uint32_t>(model.stats().size()));
  for (const auto& [key, value] : model.stats()) {
    w.String(key);
    w.F64(value);
  }
  return w.Release();
}

Model DecodeCheckpoint(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  r.ExpectTag("GCKP", "magic");
  if (r.U32("version") != kCheckpointVersion) throw FormatError("version", "unsupported");
  Model model(ReadConfig(r));
  const uint32_t channels = r.U32("normalizer");
  if (channels != static_cast<uint32_t>(model.config().net.channels)) {
    throw FormatError("normalizer", "channel count does not match the architecture");
  }
  LatentNormalizer n;
  for (uint32_t i = 0; i < channels; ++i) {
    n.mean.push_back(r.F64("normalizer.mean"));
    n.stddev.push_back(r.F64("normalizer.stddev"));
    if (!(n.stddev.back() > 0.0) || !std::isfinite(n.mean.back())) {
      throw FormatError("normalizer", "invalid statistics");
    }
  }
  model.set_normalizer(std::move(n));

  const uint32_t count = r.U32("tensor_count");
  std::vector<std::pair<std::string, Tensor>> net, codec;
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = r.String("tensor_name");
    Tensor t;
    try {
      t = ReadSnapshot(r);
    } catch (const FormatError& e) {
      throw FormatError("tensor " + name, e.what());
    }
    if (name.rfind("net/", 0) == 0) {
      net.emplace_back(name.substr(4), t);
    } else if (name.rfind("codec/", 0) == 0) {
      codec.emplace_back(name.substr(6), t);
    } else {
      throw FormatError("tensor_name", "unknown prefix in " + name);
    }
  }
  model.net().params().CopyValuesFrom(net);
  model.codec().params().CopyValuesFrom(codec);

  const uint32_t stats = r.U32("stat_count");
  for (uint32_t i = 0; i < stats; ++i) {
    std::string key = r.String("stat_key");
    model.set_stat(key, r.F64("stat_value"));
  }
  if (r.remaining() != 0) throw FormatError("trailer", "unexpected bytes after checkpoint");
  return model;
}

void SaveCheckpoint(const std::string& path, const Model& model) {
  WriteFileBytes(path, EncodeCheckpoint(model));
}

Model LoadCheckpoint(const std::string& path) { return DecodeCheckpoint(ReadFileBytes(path)); }

}  // namespace gicx
