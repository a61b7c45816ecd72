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

#ifndef GICX_PIPELINE_PIPELINE_H_
#define GICX_PIPELINE_PIPELINE_H_

#include <string>
#include <vector>

#include "gicx/backbone/model.h"
#include "gicx/backbone/trainer.h"
#include "gicx/codec/bitstream.h"
#include "gicx/inversion/inversion.h"
#include "gicx/metrics/metrics.h"
#include "gicx/pipeline/run_config.h"

namespace gicx {

struct TrainedModel {
  Model model;
  std::vector<double> autoencoder_loss;  // empty for the identity codec
  TrainingLog log;
};

// Autoencoder first (when the codec has one and train.ae_steps > 0), then the
// denoiser. The returned model is frozen.
TrainedModel TrainModel(const RunConfig& config, std::span<const Tensor> images);

// Share of the total rate, in bits per pixel of the original image.
struct BppBreakdown {
  double header = 0.0;
  double embedding = 0.0;
  double guidance = 0.0;
  double total = 0.0;
};
BppBreakdown Breakdown(const Bitstream& stream);

struct CompressResult {
  Bitstream stream;
  InversionResult inversion;
  std::size_t embedding_symbols = 0;
  Tensor guidance_reference;  // what the decoder will reconstruct
};

// Inverts the embedding, range-codes its grid indices, codes the x4
// guidance image and stores guidance.s_c / guidance.s_f in the header.
// Throws ParameterError if the image does not match the model resolution.
CompressResult CompressImage(Model& model, const Tensor& image, const RunConfig& config);

// Throws CompatibilityError naming the first header field that disagrees
// with the loaded model (model id, latent codec, schedule, embedding shape,
// image size).
void CheckCompatible(const Model& model, const BitstreamHeader& header);

struct DecodedPayloads {
  Tensor embedding;  // tokens x dims, on the quantizer grid
  Tensor reference;  // 3 x H/4 x W/4
};
DecodedPayloads DecodePayloads(const Bitstream& stream);

// Guided sampling with the header's s_c and s_f and the sampler settings of
// `config`; sample k is seeded with config.seed + k. Calls CheckCompatible.
Tensor DecompressImage(const Model& model, const Bitstream& stream, const RunConfig& config,
                       int sample);

struct NamedImage {
  std::string name;
  Tensor image;
};

// Reads every *.ppm of `dir`, named by file name.
std::vector<NamedImage> LoadCorpus(const std::string& dir);

struct SweepRow {
  double s_c = 0.0;
  double s_f = 0.0;
  std::string image;  // "mean" on the per-cell summary rows
  double psnr = 0.0;
  double ssim = 0.0;
  double bpp = 0.0;
};

// Compresses each image once, then decompresses (sample 0) for every
// (s_c, s_f) cell with the scales rewritten in the header. Per-image rows in
// (image, s_c, s_f) order come first, then one "mean" row per cell.
std::vector<SweepRow> SweepCorpus(Model& model, const std::vector<NamedImage>& corpus,
                                  const std::vector<double>& s_c, const std::vector<double>& s_f,
                                  const RunConfig& config);

// Compress + decompress (sample 0) of every image at the config's scales.
QualityReport EvaluateCorpus(Model& model, const std::vector<NamedImage>& corpus,
                             const RunConfig& config);

// CSV layouts, also printed by the command-line help.
inline constexpr char kSweepCsvHeader[] = "s_c,s_f,image,psnr,ssim,bpp";
inline constexpr char kEvalCsvHeader[] = "image,psnr,ssim,bpp,bpp_std";

std::string SweepCsv(const std::vector<SweepRow>& rows);
// One row per image (bpp_std left empty), then "mean" with corpus means and
// the population standard deviation of bpp.
std::string EvalCsv(const QualityReport& report);

}  // namespace gicx

#endif  // GICX_PIPELINE_PIPELINE_H_
