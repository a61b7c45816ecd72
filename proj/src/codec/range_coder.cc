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

#include "gicx/codec/range_coder.h"

#include <string>

#include "gicx/numerics/errors.h"

namespace gicx {

namespace {

constexpr uint32_t kTop = 1u << 24;
constexpr uint32_t kMaxTotal = 1u << 16;

}  // namespace

void RangeModelConfig::Validate() const {
  if (alphabet_size < 1) throw ParameterError("range model: empty alphabet");
  if (increment < 1) throw ParameterError("range model: increment must be positive");
  if (rescale_threshold > kMaxTotal) {
    throw ParameterError("range model: rescale threshold above coder precision");
  }
  if (alphabet_size + increment >= rescale_threshold) {
    throw ParameterError("range model: alphabet too large for rescale threshold");
  }
}

AdaptiveFrequencyModel::AdaptiveFrequencyModel(const RangeModelConfig& config)
    : config_(config), freq_(config.alphabet_size, 1u), total_(config.alphabet_size) {
  config_.Validate();
}

uint32_t AdaptiveFrequencyModel::cumulative(uint32_t symbol) const {
  uint32_t cum = 0;
  for (uint32_t s = 0; s < symbol; ++s) cum += freq_[s];
  return cum;
}

uint32_t AdaptiveFrequencyModel::Find(uint32_t target, uint32_t* cum) const {
  uint32_t acc = 0;
  for (uint32_t s = 0; s < freq_.size(); ++s) {
    if (target < acc + freq_[s]) {
      *cum = acc;
      return s;
    }
    acc += freq_[s];
  }
  throw ContractError("frequency target outside model total");
}

void AdaptiveFrequencyModel::Update(uint32_t symbol) {
  freq_[symbol] += config_.increment;
  total_ += config_.increment;
  if (total_ >= config_.rescale_threshold) {
    total_ = 0;
    for (uint32_t& f : freq_) {
      f = (f + 1) / 2;
      total_ += f;
    }
  }
}

void RangeEncoder::Encode(uint32_t cum, uint32_t freq, uint32_t total) {
  const uint32_t r = range_ / total;
  low_ += static_cast<uint64_t>(r) * cum;
  range_ = r * freq;
  while (range_ < kTop) {
    range_ <<= 8;
    ShiftLow();
  }
}

void RangeEncoder::ShiftLow() {
  if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const uint8_t carry = static_cast<uint8_t>(low_ >> 32);
    uint8_t pending = cache_;
    do {
      if (leading_) {
        leading_ = false;  // the first byte is always zero
      } else {
        out_.push_back(static_cast<uint8_t>(pending + carry));
      }
      pending = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

std::vector<uint8_t> RangeEncoder::Finish() {
  for (int i = 0; i < 5; ++i) ShiftLow();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> bytes, std::size_t base)
    : bytes_(bytes), base_(base) {
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | NextByte();
}

uint8_t RangeDecoder::NextByte() {
  if (pos_ >= bytes_.size()) throw DecodeError(base_ + pos_, "range decoder ran out of input");
  return bytes_[pos_++];
}

uint32_t RangeDecoder::Target(uint32_t total) {
  scale_ = range_ / total;
  const uint32_t target = code_ / scale_;
  if (target >= total) throw DecodeError(base_ + pos_, "corrupt range-coded stream");
  return target;
}

void RangeDecoder::Consume(uint32_t cum, uint32_t freq) {
  code_ -= scale_ * cum;
  range_ = scale_ * freq;
  while (range_ < kTop) {
    code_ = (code_ << 8) | NextByte();
    range_ <<= 8;
  }
}

namespace {

enum : uint8_t { kModeAdaptive = 0, kModeStored = 1 };

int SymbolBits(uint32_t alphabet_size) {
  int bits = 0;
  while ((uint64_t{1} << bits) < alphabet_size) ++bits;
  return bits;
}

std::size_t StoredBytes(std::size_t count, int bits) {
  return (count * static_cast<std::size_t>(bits) + 7) / 8;
}

}  // namespace

std::vector<uint8_t> RangeEncode(std::span<const uint32_t> symbols,
                                 const RangeModelConfig& config) {
  config.Validate();
  if (symbols.empty()) return {};
  AdaptiveFrequencyModel model(config);
  RangeEncoder enc;
  for (uint32_t s : symbols) {
    if (s >= config.alphabet_size) {
      throw ParameterError("symbol " + std::to_string(s) + " outside alphabet of " +
                           std::to_string(config.alphabet_size));
    }
    enc.Encode(model.cumulative(s), model.frequency(s), model.total());
    model.Update(s);
  }
  std::vector<uint8_t> coded = enc.Finish();
  const int bits = SymbolBits(config.alphabet_size);
  std::vector<uint8_t> out;
  if (coded.size() <= StoredBytes(symbols.size(), bits)) {
    out.reserve(coded.size() + 1);
    out.push_back(kModeAdaptive);
    out.insert(out.end(), coded.begin(), coded.end());
    return out;
  }
  // Incompressible input: fixed-width symbols, least significant bit first.
  out.assign(StoredBytes(symbols.size(), bits) + 1, 0);
  out[0] = kModeStored;
  std::size_t bit = 0;
  for (uint32_t s : symbols) {
    for (int b = 0; b < bits; ++b, ++bit) {
      if ((s >> b) & 1u) out[1 + bit / 8] |= static_cast<uint8_t>(1u << (bit % 8));
    }
  }
  return out;
}

std::vector<uint32_t> RangeDecode(std::span<const uint8_t> bytes, std::size_t count,
                                  const RangeModelConfig& config) {
  config.Validate();
  std::vector<uint32_t> out;
  if (count == 0) {
    if (!bytes.empty()) throw DecodeError(0, "unexpected bytes for an empty symbol stream");
    return out;
  }
  if (bytes.empty()) throw DecodeError(0, "missing stream mode byte");
  out.reserve(count);
  const auto body = bytes.subspan(1);
  if (bytes[0] == kModeStored) {
    const int bits = SymbolBits(config.alphabet_size);
    const std::size_t need = StoredBytes(count, bits);
    if (body.size() < need) throw DecodeError(bytes.size(), "stored stream truncated");
    if (body.size() > need) throw DecodeError(1 + need, "trailing bytes after stored stream");
    std::size_t bit = 0;
    for (std::size_t i = 0; i < count; ++i) {
      uint32_t s = 0;
      for (int b = 0; b < bits; ++b, ++bit) s |= ((body[bit / 8] >> (bit % 8)) & 1u) << b;
      if (s >= config.alphabet_size) throw DecodeError(1 + bit / 8, "stored symbol outside alphabet");
      out.push_back(s);
    }
    return out;
  }
  if (bytes[0] != kModeAdaptive) throw DecodeError(0, "unknown stream mode");
  AdaptiveFrequencyModel model(config);
  RangeDecoder dec(body, 1);
  for (std::size_t i = 0; i < count; ++i) {
    uint32_t cum = 0;
    const uint32_t s = model.Find(dec.Target(model.total()), &cum);
    dec.Consume(cum, model.frequency(s));
    model.Update(s);
    out.push_back(s);
  }
  if (dec.position() != body.size()) {
    throw DecodeError(1 + dec.position(), "trailing bytes after range-coded stream");
  }
  return out;
}

}  // namespace gicx
