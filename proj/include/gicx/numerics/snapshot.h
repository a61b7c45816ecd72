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

#ifndef GICX_NUMERICS_SNAPSHOT_H_
#define GICX_NUMERICS_SNAPSHOT_H_

#include <string>
#include <vector>

#include "gicx/numerics/byte_io.h"
#include "gicx/numerics/tensor.h"

namespace gicx {

// Tensor snapshot layout (little-endian):
//   "GTNS" | u32 version = 1 | u32 rank | u64 dims[rank] | f64 data[]
inline constexpr uint32_t kSnapshotVersion = 1;

void WriteSnapshot(ByteWriter& out, const Tensor& t);
Tensor ReadSnapshot(ByteReader& in);

std::vector<uint8_t> EncodeSnapshot(const Tensor& t);
Tensor DecodeSnapshot(std::span<const uint8_t> bytes);

void SaveSnapshot(const std::string& path, const Tensor& t);
Tensor LoadSnapshot(const std::string& path);

}  // namespace gicx

#endif  // GICX_NUMERICS_SNAPSHOT_H_
