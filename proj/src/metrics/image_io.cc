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

#include "gicx/metrics/image_io.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "gicx/numerics/byte_io.h"
#include "gicx/numerics/errors.h"

namespace gicx {

namespace {

class PpmTokenizer {
 public:
  explicit PpmTokenizer(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  std::string Next(const char* field) {
    SkipSpaceAndComments();
    std::string tok;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) tok.push_back(static_cast<char>(bytes_[pos_++]));
    if (tok.empty()) throw FormatError(field, "missing");
    return tok;
  }
  int64_t NextInt(const char* field) {
    const std::string tok = Next(field);
    if (!std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      throw FormatError(field, "not a number");
    }
    if (tok.size() > 9) throw FormatError(field, "too large");
    return std::stoll(tok);
  }
  // Exactly one whitespace byte separates the header from the raster.
  std::span<const uint8_t> Raster() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw FormatError("ppm.raster", "missing separator");
    return bytes_.subspan(pos_ + 1);
  }

 private:
  void SkipSpaceAndComments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }
  std::span<const uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<uint8_t> EncodePpm(const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw DimensionError("ppm needs a 3 x H x W image, got " + ShapeToString(image.shape()));
  }
  const int64_t h = image.dim(1), w = image.dim(2);
  const std::string header = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + static_cast<std::size_t>(3 * h * w));
  auto d = image.data();
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      for (int64_t c = 0; c < 3; ++c) {
        const double v = std::clamp(d[(c * h + y) * w + x], 0.0, 1.0);
        out.push_back(static_cast<uint8_t>(std::lround(v * 255.0)));
      }
    }
  }
  return out;
}

Tensor DecodePpm(std::span<const uint8_t> bytes) {
  PpmTokenizer tok(bytes);
  if (tok.Next("ppm.magic") != "P6") throw FormatError("ppm.magic", "expected P6");
  const int64_t w = tok.NextInt("ppm.width");
  const int64_t h = tok.NextInt("ppm.height");
  const int64_t maxval = tok.NextInt("ppm.maxval");
  if (w <= 0 || h <= 0) throw FormatError("ppm.size", "empty image");
  if (maxval != 255) throw FormatError("ppm.maxval", "only 8-bit images are supported");
  auto raster = tok.Raster();
  if (raster.size() < static_cast<std::size_t>(3 * w * h)) throw FormatError("ppm.raster", "truncated");
  std::vector<double> data(static_cast<std::size_t>(3 * h * w));
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < w; ++x)
      for (int64_t c = 0; c < 3; ++c)
        data[(c * h + y) * w + x] = raster[(y * w + x) * 3 + c] / 255.0;
  return Tensor({3, h, w}, std::move(data));
}

void WritePpm(const std::string& path, const Tensor& image) { WriteFileBytes(path, EncodePpm(image)); }

Tensor ReadPpm(const std::string& path) { return DecodePpm(ReadFileBytes(path)); }

Tensor ClampImage(const Tensor& image) {
  std::vector<double> v(image.data().begin(), image.data().end());
  for (double& x : v) x = std::clamp(x, 0.0, 1.0);
  return Tensor(image.shape(), std::move(v));
}

}  // namespace gicx
