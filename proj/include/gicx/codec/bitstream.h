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

#ifndef GICX_CODEC_BITSTREAM_H_
#define GICX_CODEC_BITSTREAM_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gicx/codec/quantizer.h"
#include "gicx/diffusion/schedule.h"

namespace gicx {

inline constexpr uint16_t kBitstreamVersion = 1;
// Embedding coded by per-tensor uniform quantization + adaptive range coding.
inline constexpr uint8_t kEmbeddingCodecUniformRange = 0;
inline constexpr uint8_t kMaxLatentCodecId = 1;

// Everything a decoder needs besides the model checkpoint named by model_id.
struct BitstreamHeader {
  uint32_t height = 0;
  uint32_t width = 0;
  uint8_t latent_codec = 0;
  uint8_t embedding_codec = kEmbeddingCodecUniformRange;
  uint64_t model_id = 0;
  ScheduleParams schedule;
  uint16_t tokens = 0;
  uint16_t dims = 0;
  QuantizerSpec embedding_quantizer;
  uint8_t guidance_channels = 3;
  uint32_t guidance_height = 0;
  uint32_t guidance_width = 0;
  std::vector<QuantizerSpec> guidance_quantizers;
  double s_c = 0.0;
  double s_f = 1.0;

  bool operator==(const BitstreamHeader&) const = default;
};

// .gicx container, all integers little-endian:
//
//   "GICX" | u16 version | u32 height | u32 width | u8 latent_codec
//   | u8 embedding_codec | u64 model_id
//   | u8 schedule_kind | u32 T | f64 beta_start | f64 beta_end
//   | u16 tokens | u16 dims | f64 emb_min | f64 emb_max | u32 emb_levels
//   | u8 guidance_channels | u32 guidance_height | u32 guidance_width
//   | guidance_channels x (f64 min | f64 max | u32 levels)
//   | f64 s_c | f64 s_f | u64 embedding_bytes | u64 guidance_bytes
//   | u32 header_checksum (low 32 bits of FNV-1a over all preceding bytes)
//   | embedding payload | guidance payload
struct Bitstream {
  BitstreamHeader header;
  std::vector<uint8_t> embedding_payload;
  std::vector<uint8_t> guidance_payload;

  std::size_t header_bytes() const;
  std::size_t total_bytes() const {
    return header_bytes() + embedding_payload.size() + guidance_payload.size();
  }
  uint64_t total_bits() const { return 8ull * total_bytes(); }
  double bpp() const;
};

std::vector<uint8_t> PackBitstream(const Bitstream& stream);
// Throws FormatError naming the first field that fails validation.
Bitstream UnpackBitstream(std::span<const uint8_t> bytes);

void WriteBitstreamFile(const std::string& path, const Bitstream& stream);
Bitstream ReadBitstreamFile(const std::string& path);

struct BitrateStats {
  std::vector<double> bpp;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;
};

// Throws ParameterError on an empty list.
BitrateStats BitrateReport(std::span<const Bitstream> streams);
BitrateStats SummarizeBpp(std::vector<double> bpp);

}  // namespace gicx

#endif  // GICX_CODEC_BITSTREAM_H_
