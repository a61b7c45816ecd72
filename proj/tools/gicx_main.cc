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

// gicx: train a toy backbone, compress / decompress images, sweep guidance
// scales and evaluate corpora. See --help of each command.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gicx/backbone/model.h"
#include "gicx/codec/bitstream.h"
#include "gicx/metrics/image_io.h"
#include "gicx/metrics/toy_dataset.h"
#include "gicx/numerics/byte_io.h"
#include "gicx/numerics/errors.h"
#include "gicx/pipeline/pipeline.h"
#include "gicx/pipeline/run_config.h"

namespace gicx {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitFormat = 3;
constexpr int kExitNumeric = 4;

constexpr char kFooter[] = R"(Exit status: 0 ok, 2 usage (bad flags, config or paths), 3 format or
model/bitstream incompatibility, 4 numeric failure (NaN or infinity).

Config files hold one "key = value" per line ('#' comments); unknown keys
are rejected. Precedence: preset < --config file < --set < named flags.
`gicx config` prints every key.

sweep CSV: s_c,s_f,image,psnr,ssim,bpp
  one row per (image, s_c, s_f), then one row per (s_c, s_f) cell with
  image = "mean" holding the cell means.
eval CSV: image,psnr,ssim,bpp,bpp_std
  one row per image (bpp_std empty), then a "mean" row with corpus mean
  PSNR, SSIM and bpp, and the population standard deviation of bpp.)";

// Flags shared by every command. Named flags are applied last.
struct Overrides {
  std::string config_path;
  std::string preset = "toy";
  std::vector<std::string> sets;
  std::optional<uint64_t> seed;
  std::vector<double> s_c;
  std::vector<double> s_f;
  std::optional<int> steps;
  std::optional<double> eta;
  std::optional<int> samples;
  std::optional<std::string> checkpoint;

  RunConfig Resolve() const {
    RunConfig c = config_path.empty() ? RunConfig::ForPreset(ParsePreset(preset))
                                      : LoadRunConfig(config_path, ParsePreset(preset));
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ParameterError("--set expects key=value, got '" + s + "'");
      c.Set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (seed) c.seed = *seed;
    if (s_c.size() == 1) c.s_c = s_c.front();
    if (s_f.size() == 1) c.s_f = s_f.front();
    if (steps) c.sampler_steps = *steps;
    if (eta) c.eta = *eta;
    if (samples) c.samples = *samples;
    if (checkpoint) c.checkpoint = *checkpoint;
    c.Validate();
    return c;
  }
};

void AddCommonFlags(CLI::App* cmd, Overrides& o, bool scale_lists) {
  cmd->add_option("--config", o.config_path, "key = value file applied on top of the preset");
  cmd->add_option("--preset", o.preset, "base settings: toy (default) or paper")
      ->check(CLI::IsMember({"toy", "paper"}));
  cmd->add_option("--set", o.sets, "key=value override (repeatable)")->allow_extra_args(false);
  cmd->add_option("--seed", o.seed, "run seed");
  cmd->add_option("--checkpoint", o.checkpoint, "model checkpoint path");
  if (scale_lists) {
    cmd->add_option("--sc", o.s_c, "compression guidance scales, comma separated")
        ->delimiter(',')
        ->allow_extra_args(false);
    cmd->add_option("--sf", o.s_f, "classifier-free guidance scales, comma separated")
        ->delimiter(',')
        ->allow_extra_args(false);
  } else {
    cmd->add_option("--sc", o.s_c, "compression guidance scale")->expected(1);
    cmd->add_option("--sf", o.s_f, "classifier-free guidance scale")->expected(1);
  }
  cmd->add_option("--steps", o.steps, "sampler steps");
  cmd->add_option("--eta", o.eta, "sampler eta in [0, 1]");
  cmd->add_option("--samples", o.samples, "decompressions per bitstream");
}

std::string Grouped(std::size_t n) {
  std::string digits = std::to_string(n);
  for (int i = static_cast<int>(digits.size()) - 3; i > 0; i -= 3) digits.insert(i, ",");
  return digits;
}

Model LoadFrozen(const std::string& path) {
  Model model = LoadCheckpoint(path);
  model.SetTrainable(false);
  return model;
}

void WriteText(const std::string& path, const std::string& text) {
  WriteFileBytes(path, std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

// out.ppm -> out_3.ppm
std::string SamplePath(const std::string& path, int sample, int samples) {
  if (samples == 1) return path;
  const std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + "_" + std::to_string(sample) +
                             p.extension().string()))
      .string();
}

int RunTrain(const RunConfig& config, const std::string& dataset) {
  const std::vector<NamedImage> corpus = LoadCorpus(dataset);
  std::vector<Tensor> images;
  for (const NamedImage& item : corpus) images.push_back(item.image);
  std::printf("training on %zu images, %d steps\n", images.size(), config.train_steps);
  const TrainedModel trained = TrainModel(config, images);
  if (!trained.autoencoder_loss.empty()) {
    std::printf("autoencoder final loss %.6f\n", trained.autoencoder_loss.back());
  }
  const std::vector<double>& loss = trained.log.loss;
  const std::size_t tail = std::min<std::size_t>(loss.size(), 50);
  double mean = 0.0;
  for (std::size_t i = loss.size() - tail; i < loss.size(); ++i) mean += loss[i];
  if (tail > 0) std::printf("denoiser final loss %.6f (mean of last %zu steps)\n", mean / tail, tail);
  SaveCheckpoint(config.checkpoint, trained.model);
  std::printf("wrote %s (model id %016llx)\n", config.checkpoint.c_str(),
              static_cast<unsigned long long>(trained.model.Id()));
  return kExitOk;
}

int RunCompress(const RunConfig& config, const std::string& image_path, const std::string& out) {
  Model model = LoadFrozen(config.checkpoint);
  const Tensor image = ReadPpm(image_path);
  const auto& net = model.config().net;
  std::printf("embedding symbol count %s (%d x %d)\n",
              Grouped(static_cast<std::size_t>(net.tokens) * net.dims).c_str(), net.tokens,
              net.dims);
  std::fflush(stdout);
  const CompressResult result = CompressImage(model, image, config);
  const std::vector<uint8_t> bytes = PackBitstream(result.stream);
  WriteFileBytes(out, bytes);
  const BppBreakdown b = Breakdown(result.stream);
  std::printf("bytes %zu (header %zu, embedding %zu, guidance %zu)\n", bytes.size(),
              result.stream.header_bytes(), result.stream.embedding_payload.size(),
              result.stream.guidance_payload.size());
  std::printf("bpp %.6f = embedding %.6f + guidance %.6f + header %.6f\n", b.total, b.embedding,
              b.guidance, b.header);
  return kExitOk;
}

int RunDecompress(const RunConfig& config, const Overrides& o, const std::string& in,
                  const std::string& out) {
  const Model model = LoadFrozen(config.checkpoint);
  Bitstream stream = ReadBitstreamFile(in);
  // The header carries the encoder's scales; explicit flags replace them.
  if (o.s_c.size() == 1) stream.header.s_c = o.s_c.front();
  if (o.s_f.size() == 1) stream.header.s_f = o.s_f.front();
  std::printf("s_c %g s_f %g, %d steps, eta %g\n", stream.header.s_c, stream.header.s_f,
              config.sampler_steps, config.eta);
  for (int k = 0; k < config.samples; ++k) {
    const Tensor image = DecompressImage(model, stream, config, k);
    const std::string path = SamplePath(out, k, config.samples);
    WritePpm(path, image);
    std::printf("wrote %s (seed %llu)\n", path.c_str(),
                static_cast<unsigned long long>(config.ToSamplerConfig(k).seed));
  }
  return kExitOk;
}

int RunSweep(const RunConfig& config, const Overrides& o, const std::string& dir,
             const std::string& out) {
  Model model = LoadFrozen(config.checkpoint);
  const std::vector<double> s_c = o.s_c.empty() ? std::vector<double>{config.s_c} : o.s_c;
  const std::vector<double> s_f = o.s_f.empty() ? std::vector<double>{config.s_f} : o.s_f;
  const std::vector<SweepRow> rows = SweepCorpus(model, LoadCorpus(dir), s_c, s_f, config);
  WriteText(out, SweepCsv(rows));
  for (const SweepRow& r : rows) {
    if (r.image == "mean") {
      std::printf("s_c %g s_f %g: psnr %.3f ssim %.4f bpp %.4f\n", r.s_c, r.s_f, r.psnr, r.ssim,
                  r.bpp);
    }
  }
  return kExitOk;
}

int RunEval(const RunConfig& config, const std::string& dir, const std::string& out) {
  Model model = LoadFrozen(config.checkpoint);
  const QualityReport report = EvaluateCorpus(model, LoadCorpus(dir), config);
  WriteText(out, EvalCsv(report));
  std::printf("%zu images: psnr %.3f ssim %.4f bpp %.4f +- %.4f\n", report.images.size(),
              report.mean_psnr, report.mean_ssim, report.bitrate.mean, report.bitrate.stddev);
  return kExitOk;
}

int RunGenDataset(const RunConfig& config, const std::string& dir) {
  const auto paths = WriteToyDataset(config.ToDatasetSpec(), dir);
  std::printf("wrote %zu images to %s\n", paths.size(), dir.c_str());
  return kExitOk;
}

int Main(int argc, char** argv) {
  CLI::App app("gicx: image compression with a guided diffusion decoder");
  app.require_subcommand(1);
  app.footer(kFooter);

  Overrides o;
  std::string a, b;

  CLI::App* train = app.add_subcommand("train", "train a backbone on a directory of .ppm images");
  AddCommonFlags(train, o, false);
  train->add_option("dataset", a, "image directory")->required();
  train->add_option("out", b, "checkpoint to write (default: the checkpoint key)");

  CLI::App* compress = app.add_subcommand("compress", "compress one .ppm image to .gicx");
  AddCommonFlags(compress, o, false);
  compress->add_option("image", a, "input .ppm")->required();
  compress->add_option("out", b, "output .gicx")->required();

  CLI::App* decompress = app.add_subcommand("decompress", "decode a .gicx to .ppm image(s)");
  AddCommonFlags(decompress, o, false);
  decompress->add_option("in", a, "input .gicx")->required();
  decompress->add_option("out", b, "output .ppm; with --samples k > 1, name_0 .. name_{k-1}")
      ->required();

  CLI::App* sweep = app.add_subcommand("sweep", "grid over s_c x s_f on a corpus");
  AddCommonFlags(sweep, o, true);
  sweep->add_option("corpus", a, "image directory")->required();
  sweep->add_option("out", b, "output CSV")->required();

  CLI::App* eval = app.add_subcommand("eval", "compress and decompress a corpus");
  AddCommonFlags(eval, o, false);
  eval->add_option("corpus", a, "image directory")->required();
  eval->add_option("out", b, "output CSV")->required();

  CLI::App* gen = app.add_subcommand("gen-dataset", "write a procedural toy corpus");
  AddCommonFlags(gen, o, false);
  gen->add_option("out", a, "output directory")->required();

  CLI::App* show = app.add_subcommand("config", "print the effective configuration");
  AddCommonFlags(show, o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train->parsed() && !b.empty()) o.checkpoint = b;
    const RunConfig config = o.Resolve();
    if (train->parsed()) return RunTrain(config, a);
    if (compress->parsed()) return RunCompress(config, a, b);
    if (decompress->parsed()) return RunDecompress(config, o, a, b);
    if (sweep->parsed()) return RunSweep(config, o, a, b);
    if (eval->parsed()) return RunEval(config, a, b);
    if (gen->parsed()) return RunGenDataset(config, a);
    std::fputs(config.ToText().c_str(), stdout);
    return kExitOk;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "gicx: numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const CompatibilityError& e) {
    std::fprintf(stderr, "gicx: incompatible: %s\n", e.what());
    return kExitFormat;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "gicx: format error: %s\n", e.what());
    return kExitFormat;
  } catch (const DecodeError& e) {
    std::fprintf(stderr, "gicx: format error: %s\n", e.what());
    return kExitFormat;
  } catch (const ParameterError& e) {
    std::fprintf(stderr, "gicx: %s\n", e.what());
    return kExitUsage;
  } catch (const DimensionError& e) {
    std::fprintf(stderr, "gicx: %s\n", e.what());
    return kExitUsage;
  } catch (const IoError& e) {
    std::fprintf(stderr, "gicx: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "gicx: internal error: %s\n", e.what());
    return kExitInternal;
  }
}

}  // namespace
}  // namespace gicx

int main(int argc, char** argv) { return gicx::Main(argc, argv); }
