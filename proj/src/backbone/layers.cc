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

#include "gicx/backbone/layers.h"

#include <bit>
#include <cmath>

#include "gicx/numerics/byte_io.h"
#include "gicx/numerics/errors.h"
#include "gicx/numerics/ops.h"

namespace gicx {

namespace {

Tensor RandomLeaf(const Shape& shape, double stddev, Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(NumElements(shape)), 0.0);
  if (stddev > 0.0) {
    for (double& x : v) x = stddev * rng.Normal();
  }
  return Tensor(shape, std::move(v));
}

}  // namespace

Tensor ParameterSet::Add(const std::string& name, Tensor value) {
  for (const auto& [n, t] : entries_) {
    if (n == name) throw ContractError("duplicate parameter name " + name);
  }
  value.set_requires_grad(true);
  entries_.emplace_back(name, value);
  return value;
}

std::vector<Tensor> ParameterSet::tensors() const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const auto& [name, t] : entries_) out.push_back(t);
  return out;
}

const Tensor& ParameterSet::at(const std::string& name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw Error("no parameter named " + name);
}

int64_t ParameterSet::scalar_count() const {
  int64_t n = 0;
  for (const auto& [name, t] : entries_) n += t.numel();
  return n;
}

void ParameterSet::SetTrainable(bool trainable) {
  for (auto& [name, t] : entries_) t.set_requires_grad(trainable);
}

uint64_t ParameterSet::Checksum() const {
  ByteWriter w;
  for (const auto& [name, t] : entries_) {
    w.String(name);
    for (double v : t.data()) w.F64(v);
  }
  return Fnv1a64(w.bytes());
}

void ParameterSet::CopyValuesFrom(const std::vector<std::pair<std::string, Tensor>>& source) {
  if (source.size() != entries_.size()) {
    throw FormatError("tensors", "expected " + std::to_string(entries_.size()) +
                                     " parameters, found " + std::to_string(source.size()));
  }
  for (std::size_t i = 0; i < source.size(); ++i) {
    auto& [name, dst] = entries_[i];
    const auto& [src_name, src] = source[i];
    if (src_name != name) throw FormatError("tensors", "expected " + name + ", found " + src_name);
    if (src.shape() != dst.shape()) {
      throw FormatError("tensors", name + " has shape " + ShapeToString(src.shape()) +
                                       ", expected " + ShapeToString(dst.shape()));
    }
    auto out = dst.mutable_leaf_data();
    std::copy(src.data().begin(), src.data().end(), out.begin());
  }
}

Tensor Linear::operator()(const Tensor& x) const {
  const Tensor y = MatMul(x, w);
  return Add(y, x.dim(0) == 1 ? b : RepeatRows(b, x.dim(0)));
}

Tensor Conv::operator()(const Tensor& x) const { return Conv2d(x, kernel, bias, stride, padding); }

Linear MakeLinear(ParameterSet& params, const std::string& name, int in, int out, double gain,
                  Rng& rng) {
  Linear l;
  l.w = params.Add(name + ".w", RandomLeaf({in, out}, gain / std::sqrt(in), rng));
  l.b = params.Add(name + ".b", Tensor::Zeros({1, out}));
  return l;
}

Conv MakeConv(ParameterSet& params, const std::string& name, int in, int out, int kernel,
              int stride, int padding, double gain, Rng& rng) {
  Conv c;
  const double fan_in = static_cast<double>(in) * kernel * kernel;
  c.kernel = params.Add(name + ".k",
                        RandomLeaf({out, in, kernel, kernel}, gain / std::sqrt(fan_in), rng));
  c.bias = params.Add(name + ".b", Tensor::Zeros({out}));
  c.stride = stride;
  c.padding = padding;
  return c;
}

Tensor MeanRows(const Tensor& x) {
  if (x.rank() != 2) throw DimensionError("MeanRows expects a matrix");
  const Tensor ones = Tensor::Full({1, x.dim(0)}, 1.0 / static_cast<double>(x.dim(0)));
  return MatMul(ones, x);
}

Tensor RepeatRows(const Tensor& row, int64_t m) {
  if (row.rank() != 2 || row.dim(0) != 1) throw DimensionError("RepeatRows expects [1 x N]");
  return MatMul(Tensor::Full({m, 1}, 1.0), row);
}

}  // namespace gicx
