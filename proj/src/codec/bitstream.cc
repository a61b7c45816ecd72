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

#include "gicx/codec/bitstream.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gicx/numerics/byte_io.h"
#include "gicx/numerics/errors.h"

namespace gicx {

namespace {

void WriteHeader(ByteWriter& w, const Bitstream& s) {
  const BitstreamHeader& h = s.header;
  w.Tag("GICX");
  w.U16(kBitstreamVersion);
  w.U32(h.height);
  w.U32(h.width);
  w.U8(h.latent_codec);
  w.U8(h.embedding_codec);
  w.U64(h.model_id);
  w.U8(static_cast<uint8_t>(h.schedule.kind));
  w.U32(h.schedule.steps);
  w.F64(h.schedule.beta_start);
  w.F64(h.schedule.beta_end);
  w.U16(h.tokens);
  w.U16(h.dims);
  w.F64(h.embedding_quantizer.min);
  w.F64(h.embedding_quantizer.max);
  w.U32(h.embedding_quantizer.levels);
  w.U8(h.guidance_channels);
  w.U32(h.guidance_height);
  w.U32(h.guidance_width);
  for (const QuantizerSpec& q : h.guidance_quantizers) {
    w.F64(q.min);
    w.F64(q.max);
    w.U32(q.levels);
  }
  w.F64(h.s_c);
  w.F64(h.s_f);
  w.U64(s.embedding_payload.size());
  w.U64(s.guidance_payload.size());
  w.U32(static_cast<uint32_t>(Fnv1a64(w.bytes())));
}

QuantizerSpec ReadQuantizer(ByteReader& r, const char* field) {
  QuantizerSpec q;
  q.min = r.F64(field);
  q.max = r.F64(field);
  q.levels = r.U32(field);
  try {
    q.Validate();
  } catch (const ParameterError& e) {
    throw FormatError(field, e.what());
  }
  return q;
}

void Require(bool ok, const char* field, const char* what) {
  if (!ok) throw FormatError(field, what);
}

}  // namespace

std::size_t Bitstream::header_bytes() const {
  return 4 + 2 + 4 + 4 + 1 + 1 + 8 + (1 + 4 + 8 + 8) + (2 + 2) + (8 + 8 + 4) + (1 + 4 + 4) +
         header.guidance_quantizers.size() * (8 + 8 + 4) + 8 + 8 + 8 + 8 + 4;
}

double Bitstream::bpp() const {
  return static_cast<double>(total_bits()) /
         (static_cast<double>(header.height) * static_cast<double>(header.width));
}

std::vector<uint8_t> PackBitstream(const Bitstream& stream) {
  if (stream.header.guidance_quantizers.size() != stream.header.guidance_channels) {
    throw ParameterError("one guidance quantizer per channel is required");
  }
  ByteWriter w;
  WriteHeader(w, stream);
  w.Bytes(stream.embedding_payload);
  w.Bytes(stream.guidance_payload);
  return w.Release();
}

Bitstream UnpackBitstream(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  Bitstream s;
  BitstreamHeader& h = s.header;
  r.ExpectTag("GICX", "magic");
  Require(r.U16("version") == kBitstreamVersion, "version", "unsupported version");
  h.height = r.U32("height");
  h.width = r.U32("width");
  Require(h.height > 0 && h.width > 0 && h.height % 4 == 0 && h.width % 4 == 0, "height/width",
          "image dimensions must be positive multiples of 4");
  h.latent_codec = r.U8("latent_codec");
  Require(h.latent_codec <= kMaxLatentCodecId, "latent_codec", "unknown latent codec");
  h.embedding_codec = r.U8("embedding_codec");
  Require(h.embedding_codec == kEmbeddingCodecUniformRange, "embedding_codec",
          "unknown embedding codec");
  h.model_id = r.U64("model_id");
  h.schedule.kind = static_cast<ScheduleKind>(r.U8("schedule.kind"));
  h.schedule.steps = r.U32("schedule.steps");
  h.schedule.beta_start = r.F64("schedule.beta_start");
  h.schedule.beta_end = r.F64("schedule.beta_end");
  try {
    NoiseSchedule::Make(h.schedule);
  } catch (const ParameterError& e) {
    throw FormatError("schedule", e.what());
  }
  h.tokens = r.U16("tokens");
  h.dims = r.U16("dims");
  Require(h.tokens > 0 && h.dims > 0, "tokens/dims", "embedding shape must be non-empty");
  h.embedding_quantizer = ReadQuantizer(r, "embedding_quantizer");
  h.guidance_channels = r.U8("guidance_channels");
  Require(h.guidance_channels > 0, "guidance_channels", "must be positive");
  h.guidance_height = r.U32("guidance_height");
  h.guidance_width = r.U32("guidance_width");
  Require(h.guidance_height * 4 == h.height && h.guidance_width * 4 == h.width,
          "guidance_height/guidance_width", "must be the image size divided by 4");
  for (uint8_t c = 0; c < h.guidance_channels; ++c) {
    h.guidance_quantizers.push_back(ReadQuantizer(r, "guidance_quantizer"));
  }
  h.s_c = r.F64("s_c");
  Require(std::isfinite(h.s_c) && h.s_c >= 0.0, "s_c", "must be finite and non-negative");
  h.s_f = r.F64("s_f");
  Require(std::isfinite(h.s_f) && h.s_f >= 0.0, "s_f", "must be finite and non-negative");
  const uint64_t emb_len = r.U64("embedding_bytes");
  const uint64_t guide_len = r.U64("guidance_bytes");
  const uint32_t expected = static_cast<uint32_t>(Fnv1a64(bytes.first(r.position())));
  Require(r.U32("header_checksum") == expected, "header_checksum", "mismatch");
  Require(emb_len <= r.remaining(), "embedding_bytes", "exceeds file size");
  Require(emb_len + guide_len == r.remaining(), "guidance_bytes",
          "payload lengths do not match file size");
  auto emb = r.Bytes(emb_len, "embedding_payload");
  auto guide = r.Bytes(guide_len, "guidance_payload");
  s.embedding_payload.assign(emb.begin(), emb.end());
  s.guidance_payload.assign(guide.begin(), guide.end());
  return s;
}

void WriteBitstreamFile(const std::string& path, const Bitstream& stream) {
  WriteFileBytes(path, PackBitstream(stream));
}

Bitstream ReadBitstreamFile(const std::string& path) { return UnpackBitstream(ReadFileBytes(path)); }

BitrateStats SummarizeBpp(std::vector<double> bpp) {
  if (bpp.empty()) throw ParameterError("bitrate report needs at least one stream");
  BitrateStats st;
  st.bpp = std::move(bpp);
  const double n = static_cast<double>(st.bpp.size());
  st.mean = std::accumulate(st.bpp.begin(), st.bpp.end(), 0.0) / n;
  double var = 0.0;
  for (double b : st.bpp) var += (b - st.mean) * (b - st.mean);
  st.stddev = std::sqrt(var / n);
  auto [lo, hi] = std::minmax_element(st.bpp.begin(), st.bpp.end());
  st.min = *lo;
  st.max = *hi;
  return st;
}

BitrateStats BitrateReport(std::span<const Bitstream> streams) {
  std::vector<double> bpp;
  for (const Bitstream& s : streams) bpp.push_back(s.bpp());
  return SummarizeBpp(std::move(bpp));
}

}  // namespace gicx
