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

#ifndef GICX_CODEC_RANGE_CODER_H_
#define GICX_CODEC_RANGE_CODER_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gicx {

// Adaptive frequency table. Every symbol starts at frequency 1; coding a
// symbol adds `increment` to it, and once the total reaches
// `rescale_threshold` all counts are halved (rounding up, so none drop to 0).
// Encoder and decoder evolve identical tables from identical symbol streams.
struct RangeModelConfig {
  uint32_t alphabet_size = 256;
  uint32_t increment = 32;
  uint32_t rescale_threshold = 1u << 16;

  // Throws ParameterError if the table could exceed the coder's precision.
  void Validate() const;
};

class AdaptiveFrequencyModel {
 public:
  explicit AdaptiveFrequencyModel(const RangeModelConfig& config);

  uint32_t total() const { return total_; }
  uint32_t frequency(uint32_t symbol) const { return freq_[symbol]; }
  uint32_t cumulative(uint32_t symbol) const;
  // Symbol whose interval [cum, cum + freq) contains `target`.
  uint32_t Find(uint32_t target, uint32_t* cum) const;
  void Update(uint32_t symbol);

  std::size_t alphabet_size() const { return freq_.size(); }

 private:
  RangeModelConfig config_;
  std::vector<uint32_t> freq_;
  uint32_t total_ = 0;
};

// 32-bit renormalizing range coder with carry propagation. The output omits
// the always-zero leading byte, so a decoder consumes exactly the bytes the
// encoder produced.
class RangeEncoder {
 public:
  void Encode(uint32_t cum, uint32_t freq, uint32_t total);
  std::vector<uint8_t> Finish();

 private:
  void ShiftLow();

  std::vector<uint8_t> out_;
  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;
  bool leading_ = true;
};

class RangeDecoder {
 public:
  // Throws DecodeError if fewer than 4 bytes are available. Error positions
  // are reported relative to `base`.
  explicit RangeDecoder(std::span<const uint8_t> bytes, std::size_t base = 0);

  // Scaled target in [0, total) for the next symbol.
  uint32_t Target(uint32_t total);
  void Consume(uint32_t cum, uint32_t freq);
  std::size_t position() const { return pos_; }

 private:
  uint8_t NextByte();

  std::span<const uint8_t> bytes_;
  std::size_t base_ = 0;
  std::size_t pos_ = 0;
  uint32_t code_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t scale_ = 0;
};

// Stream = mode byte + body. Mode 0 is the adaptive range-coded body; mode 1
// stores symbols at ceil(log2(alphabet_size)) bits each and is chosen when
// adaptive coding would not be smaller, so output never exceeds raw size plus
// one byte. Symbols must be < alphabet_size. An empty list encodes to no
// bytes.
std::vector<uint8_t> RangeEncode(std::span<const uint32_t> symbols,
                                 const RangeModelConfig& config);
// Throws DecodeError (with byte position) on truncated, overlong or
// inconsistent input.
std::vector<uint32_t> RangeDecode(std::span<const uint8_t> bytes, std::size_t count,
                                  const RangeModelConfig& config);

}  // namespace gicx

#endif  // GICX_CODEC_RANGE_CODER_H_
