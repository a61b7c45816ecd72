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

#ifndef GICX_NUMERICS_BYTE_IO_H_
#define GICX_NUMERICS_BYTE_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gicx/numerics/errors.h"

namespace gicx {

// Little-endian serialization helpers shared by every on-disk format.
class ByteWriter {
 public:
  void U8(uint8_t v) { bytes_.push_back(v); }
  void U16(uint16_t v) { PutLe(v, 2); }
  void U32(uint32_t v) { PutLe(v, 4); }
  void U64(uint64_t v) { PutLe(v, 8); }
  void F64(double v) { U64(std::bit_cast<uint64_t>(v)); }
  void Tag(std::string_view magic) {
    bytes_.insert(bytes_.end(), magic.begin(), magic.end());
  }
  void Bytes(std::span<const uint8_t> b) {
    bytes_.insert(bytes_.end(), b.begin(), b.end());
  }
  void String(std::string_view s) {
    U32(static_cast<uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }

  std::size_t size() const { return bytes_.size(); }
  const std::vector<uint8_t>& bytes() const { return bytes_; }
  std::vector<uint8_t> Release() { return std::move(bytes_); }

 private:
  void PutLe(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  std::vector<uint8_t> bytes_;
};

// Bounds-checked reader. Every accessor takes the name of the field being
// read so truncation errors point at it.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  uint8_t U8(const char* field) { return static_cast<uint8_t>(GetLe(1, field)); }
  uint16_t U16(const char* field) { return static_cast<uint16_t>(GetLe(2, field)); }
  uint32_t U32(const char* field) { return static_cast<uint32_t>(GetLe(4, field)); }
  uint64_t U64(const char* field) { return GetLe(8, field); }
  double F64(const char* field) { return std::bit_cast<double>(GetLe(8, field)); }

  void ExpectTag(std::string_view magic, const char* field) {
    Need(magic.size(), field);
    if (std::memcmp(bytes_.data() + pos_, magic.data(), magic.size()) != 0) {
      throw FormatError(field, "expected \"" + std::string(magic) + "\"");
    }
    pos_ += magic.size();
  }
  std::span<const uint8_t> Bytes(std::size_t n, const char* field) {
    Need(n, field);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::string String(const char* field) {
    const uint32_t n = U32(field);
    auto b = Bytes(n, field);
    return std::string(b.begin(), b.end());
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void Need(std::size_t n, const char* field) const {
    if (bytes_.size() - pos_ < n) throw FormatError(field, "truncated");
  }
  uint64_t GetLe(int n, const char* field) {
    Need(static_cast<std::size_t>(n), field);
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// Both throw IoError when the file cannot be opened or fully written.
std::vector<uint8_t> ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, std::span<const uint8_t> bytes);

// 64-bit FNV-1a, used for checkpoint ids and weight checksums.
uint64_t Fnv1a64(std::span<const uint8_t> bytes, uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace gicx

#endif  // GICX_NUMERICS_BYTE_IO_H_
