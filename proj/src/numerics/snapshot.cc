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

#include "gicx/numerics/snapshot.h"

#include "gicx/numerics/errors.h"

namespace gicx {

void WriteSnapshot(ByteWriter& out, const Tensor& t) {
  out.Tag("GTNS");
  out.U32(kSnapshotVersion);
  out.U32(static_cast<uint32_t>(t.rank()));
  for (int64_t d : t.shape()) out.U64(static_cast<uint64_t>(d));
  for (double v : t.data()) out.F64(v);
}

Tensor ReadSnapshot(ByteReader& in) {
  in.ExpectTag("GTNS", "snapshot.magic");
  if (in.U32("snapshot.version") != kSnapshotVersion) {
    throw FormatError("snapshot.version", "unsupported");
  }
  const uint32_t rank = in.U32("snapshot.rank");
  if (rank > 8) throw FormatError("snapshot.rank", "too large");
  Shape shape;
  uint64_t count = 1;
  for (uint32_t i = 0; i < rank; ++i) {
    const uint64_t d = in.U64("snapshot.dims");
    if (d > (1ULL << 32)) throw FormatError("snapshot.dims", "dimension too large");
    count *= d;
    if (count > in.remaining()) throw FormatError("snapshot.data", "truncated");
    shape.push_back(static_cast<int64_t>(d));
  }
  std::vector<double> data(count);
  for (auto& v : data) v = in.F64("snapshot.data");
  try {
    return Tensor(std::move(shape), std::move(data));
  } catch (const NumericError&) {
    throw FormatError("snapshot.data", "non-finite value");
  }
}

std::vector<uint8_t> EncodeSnapshot(const Tensor& t) {
  ByteWriter w;
  WriteSnapshot(w, t);
  return w.Release();
}

Tensor DecodeSnapshot(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  Tensor t = ReadSnapshot(r);
  if (r.remaining() != 0) throw FormatError("snapshot", "trailing bytes");
  return t;
}

void SaveSnapshot(const std::string& path, const Tensor& t) {
  WriteFileBytes(path, EncodeSnapshot(t));
}

Tensor LoadSnapshot(const std::string& path) { return DecodeSnapshot(ReadFileBytes(path)); }

}  // namespace gicx
