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

#include "gicx/pipeline/pipeline.h"

#include <cstdio>
#include <filesystem>
#include <map>

#include "gicx/codec/guidance_codec.h"
#include "gicx/codec/range_coder.h"
#include "gicx/diffusion/sampler.h"
#include "gicx/guidance/guidance.h"
#include "gicx/metrics/image_io.h"
#include "gicx/metrics/toy_dataset.h"
#include "gicx/numerics/errors.h"

namespace gicx {
namespace {

std::string Hex(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string Num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string Scale(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

[[noreturn]] void Incompatible(const std::string& field, const std::string& stream,
                               const std::string& model) {
  throw CompatibilityError("bitstream " + field + " " + stream + " does not match checkpoint " +
                           field + " " + model);
}

}  // namespace

TrainedModel TrainModel(const RunConfig& config, std::span<const Tensor> images) {
  config.Validate();
  Model model(config.ToModelConfig());
  std::vector<double> ae_loss;
  if (model.codec().kind() == LatentCodecKind::kAutoencoder && config.ae_steps > 0) {
    ae_loss = TrainAutoencoder(model.codec(), images, config.ae_steps, config.ae_batch,
                               config.ae_lr, config.seed);
  }
  TrainingLog log = TrainDenoiser(model, images, config.ToTrainConfig());
  model.SetTrainable(false);
  return {std::move(model), std::move(ae_loss), std::move(log)};
}

BppBreakdown Breakdown(const Bitstream& stream) {
  const double pixels = static_cast<double>(stream.header.height) * stream.header.width;
  BppBreakdown b;
  b.header = 8.0 * static_cast<double>(stream.header_bytes()) / pixels;
  b.embedding = 8.0 * static_cast<double>(stream.embedding_payload.size()) / pixels;
  b.guidance = 8.0 * static_cast<double>(stream.guidance_payload.size()) / pixels;
  b.total = stream.bpp();
  return b;
}

CompressResult CompressImage(Model& model, const Tensor& image, const RunConfig& config) {
  config.Validate();
  const ModelConfig& mc = model.config();
  if (image.rank() != 3 || image.dim(0) != 3 || image.dim(1) != mc.image_height ||
      image.dim(2) != mc.image_width) {
    throw ParameterError("image " + ShapeToString(image.shape()) + " does not match the model's " +
                         std::to_string(mc.image_height) + " x " +
                         std::to_string(mc.image_width));
  }
  CompressResult out;
  out.inversion = InvertEmbedding(model, image, config.ToInversionConfig());
  const QuantizerSpec& q = out.inversion.quantizer;
  const std::vector<uint32_t> symbols = Quantize(out.inversion.quantized.data(), q);
  out.embedding_symbols = symbols.size();

  CompressedGuidance guidance =
      CompressGuidanceImage(image, static_cast<uint32_t>(config.guidance_levels));
  out.guidance_reference = guidance.reference;

  BitstreamHeader& h = out.stream.header;
  h.height = static_cast<uint32_t>(mc.image_height);
  h.width = static_cast<uint32_t>(mc.image_width);
  h.latent_codec = static_cast<uint8_t>(mc.codec);
  h.embedding_codec = kEmbeddingCodecUniformRange;
  h.model_id = model.Id();
  h.schedule = mc.schedule;
  h.tokens = static_cast<uint16_t>(mc.net.tokens);
  h.dims = static_cast<uint16_t>(mc.net.dims);
  h.embedding_quantizer = q;
  h.guidance_channels = static_cast<uint8_t>(guidance.reference.dim(0));
  h.guidance_height = static_cast<uint32_t>(guidance.reference.dim(1));
  h.guidance_width = static_cast<uint32_t>(guidance.reference.dim(2));
  h.guidance_quantizers = guidance.quantizers;
  h.s_c = config.s_c;
  h.s_f = config.s_f;
  out.stream.embedding_payload = RangeEncode(symbols, {.alphabet_size = q.levels});
  out.stream.guidance_payload = std::move(guidance.payload);
  return out;
}

void CheckCompatible(const Model& model, const BitstreamHeader& header) {
  const ModelConfig& mc = model.config();
  if (header.model_id != model.Id()) {
    Incompatible("model id", Hex(header.model_id), Hex(model.Id()));
  }
  // A matching id implies the rest; these only fire for hand-edited headers.
  if (header.latent_codec != static_cast<uint8_t>(mc.codec)) {
    Incompatible("latent codec", std::to_string(header.latent_codec),
                 std::to_string(static_cast<int>(mc.codec)));
  }
  if (!(header.schedule == mc.schedule)) Incompatible("schedule", "(header)", "(model)");
  if (header.tokens != mc.net.tokens || header.dims != mc.net.dims) {
    Incompatible("embedding shape",
                 std::to_string(header.tokens) + "x" + std::to_string(header.dims),
                 std::to_string(mc.net.tokens) + "x" + std::to_string(mc.net.dims));
  }
  if (static_cast<int64_t>(header.height) != mc.image_height ||
      static_cast<int64_t>(header.width) != mc.image_width) {
    Incompatible("image size",
                 std::to_string(header.height) + "x" + std::to_string(header.width),
                 std::to_string(mc.image_height) + "x" + std::to_string(mc.image_width));
  }
}

DecodedPayloads DecodePayloads(const Bitstream& stream) {
  const BitstreamHeader& h = stream.header;
  const QuantizerSpec& q = h.embedding_quantizer;
  const std::size_t count = static_cast<std::size_t>(h.tokens) * h.dims;
  const std::vector<uint32_t> symbols =
      RangeDecode(stream.embedding_payload, count, {.alphabet_size = q.levels});
  DecodedPayloads out;
  out.embedding = Tensor({h.tokens, h.dims}, Dequantize(symbols, q));
  out.reference = DecompressGuidanceImage(stream.guidance_payload, h.guidance_quantizers,
                                          h.guidance_height, h.guidance_width);
  return out;
}

Tensor DecompressImage(const Model& model, const Bitstream& stream, const RunConfig& config,
                       int sample) {
  CheckCompatible(model, stream.header);
  const DecodedPayloads payloads = DecodePayloads(stream);
  GuidanceConfig guidance;
  guidance.s_c = stream.header.s_c;
  guidance.s_f = stream.header.s_f;
  guidance.reference = payloads.reference;
  guidance.full_backprop = config.full_backprop;
  guidance.clamp_x0 = config.clamp_x0;
  const DenoiseFn fn =
      GuidedDenoiseFn(model, guidance, GuidanceProxy::ForModel(model), payloads.embedding);
  const Tensor z = SampleLoop(model.schedule(), fn, config.ToSamplerConfig(sample),
                              model.latent_shape());
  NoGradGuard no_grad;
  return DecodeLatent(model.codec(), model.normalizer().Destandardize(z));
}

std::vector<NamedImage> LoadCorpus(const std::string& dir) {
  std::vector<NamedImage> corpus;
  for (const std::string& path : ListImages(dir)) {
    corpus.push_back({std::filesystem::path(path).filename().string(), ReadPpm(path)});
  }
  return corpus;
}

std::vector<SweepRow> SweepCorpus(Model& model, const std::vector<NamedImage>& corpus,
                                  const std::vector<double>& s_c, const std::vector<double>& s_f,
                                  const RunConfig& config) {
  if (corpus.empty()) throw ParameterError("sweep needs at least one image");
  if (s_c.empty() || s_f.empty()) throw ParameterError("sweep needs at least one s_c and s_f");
  std::vector<SweepRow> rows;
  std::map<std::pair<double, double>, std::vector<SweepRow>> cells;
  for (const NamedImage& item : corpus) {
    const CompressResult compressed = CompressImage(model, item.image, config);
    for (double sc : s_c) {
      for (double sf : s_f) {
        Bitstream stream = compressed.stream;
        stream.header.s_c = sc;
        stream.header.s_f = sf;
        const Tensor out = DecompressImage(model, stream, config, 0);
        SweepRow row{sc, sf, item.name, Psnr(out, item.image), Ssim(out, item.image),
                     stream.bpp()};
        rows.push_back(row);
        cells[{sc, sf}].push_back(row);
      }
    }
  }
  for (double sc : s_c) {
    for (double sf : s_f) {
      const auto& cell = cells.at({sc, sf});
      SweepRow mean{sc, sf, "mean", 0.0, 0.0, 0.0};
      for (const SweepRow& r : cell) {
        mean.psnr += r.psnr / static_cast<double>(cell.size());
        mean.ssim += r.ssim / static_cast<double>(cell.size());
        mean.bpp += r.bpp / static_cast<double>(cell.size());
      }
      rows.push_back(mean);
    }
  }
  return rows;
}

QualityReport EvaluateCorpus(Model& model, const std::vector<NamedImage>& corpus,
                             const RunConfig& config) {
  if (corpus.empty()) throw ParameterError("eval needs at least one image");
  std::vector<ImageQuality> images;
  for (const NamedImage& item : corpus) {
    const CompressResult compressed = CompressImage(model, item.image, config);
    const Bitstream stream = UnpackBitstream(PackBitstream(compressed.stream));
    const Tensor out = DecompressImage(model, stream, config, 0);
    images.push_back(
        {item.name, Psnr(out, item.image), Ssim(out, item.image), stream.bpp()});
  }
  return SummarizeQuality(std::move(images));
}

std::string SweepCsv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kSweepCsvHeader) + "\n";
  for (const SweepRow& r : rows) {
    out += Scale(r.s_c) + "," + Scale(r.s_f) + "," + r.image + "," + Num(r.psnr) + "," +
           Num(r.ssim) + "," + Num(r.bpp) + "\n";
  }
  return out;
}

std::string EvalCsv(const QualityReport& report) {
  std::string out = std::string(kEvalCsvHeader) + "\n";
  for (const ImageQuality& q : report.images) {
    out += q.name + "," + Num(q.psnr) + "," + Num(q.ssim) + "," + Num(q.bpp) + ",\n";
  }
  out += "mean," + Num(report.mean_psnr) + "," + Num(report.mean_ssim) + "," +
         Num(report.bitrate.mean) + "," + Num(report.bitrate.stddev) + "\n";
  return out;
}

}  // namespace gicx
