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

#include "gicx/numerics/tensor.h"

#include <cmath>
#include <sstream>

#include "gicx/numerics/errors.h"

namespace gicx {

int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

namespace {

void CheckFinite(std::span<const double> data) {
  for (double v : data) {
    if (!std::isfinite(v)) throw NumericError("non-finite value in tensor");
  }
}

}  // namespace

Tensor::Tensor(Shape shape, std::vector<double> data)
    : impl_(std::make_shared<TensorStorage>()) {
  for (int64_t d : shape) {
    if (d < 0) throw DimensionError("negative dimension in " + ShapeToString(shape));
  }
  if (NumElements(shape) != static_cast<int64_t>(data.size())) {
    throw DimensionError("shape " + ShapeToString(shape) + " does not match " +
                         std::to_string(data.size()) + " values");
  }
  CheckFinite(data);
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
}

Tensor Tensor::Zeros(const Shape& shape) {
  return Tensor(shape, std::vector<double>(static_cast<std::size_t>(NumElements(shape)), 0.0));
}

Tensor Tensor::Full(const Shape& shape, double value) {
  return Tensor(shape, std::vector<double>(static_cast<std::size_t>(NumElements(shape)), value));
}

double Tensor::item() const {
  if (impl_->data.size() != 1) {
    throw ContractError("item() on tensor of shape " + ShapeToString(shape()));
  }
  return impl_->data[0];
}

Tensor& Tensor::set_requires_grad(bool on) {
  if (!impl_->is_leaf) throw ContractError("requires_grad can only be set on leaves");
  impl_->requires_grad = on;
  if (!on) impl_->grad.clear();
  return *this;
}

void Tensor::ZeroGrad() {
  if (impl_->requires_grad) impl_->grad.assign(impl_->data.size(), 0.0);
}

std::span<double> Tensor::mutable_leaf_data() {
  if (!impl_->is_leaf) throw ContractError("only leaves can be updated in place");
  return impl_->data;
}

std::span<double> Tensor::mutable_grad() {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
  return impl_->grad;
}

Tensor Tensor::Detach() const { return Tensor(impl_->shape, impl_->data); }

Tensor Tensor::Reshape(const Shape& new_shape) const {
  if (NumElements(new_shape) != numel()) {
    throw DimensionError("cannot reshape " + ShapeToString(shape()) + " to " +
                         ShapeToString(new_shape));
  }
  std::vector<double> copy = impl_->data;
  return RecordOp(new_shape, std::move(copy), {*this}, {[](const GradContext& g) {
                    if (!g.inputs[0]) return;
                    auto& gi = *g.inputs[0];
                    for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += g.output_grad[i];
                  }});
}

Tensor RecordOp(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
                BackwardFn backward) {
  Tensor out(std::move(shape), std::move(data));
  Tape& tape = Tape::Current();
  if (!tape.recording()) return out;
  bool any = false;
  for (const Tensor& in : inputs) any = any || in.requires_grad();
  if (!any) return out;

  out.impl_->requires_grad = true;
  out.impl_->is_leaf = false;
  TapeNode node;
  node.inputs.reserve(inputs.size());
  for (const Tensor& in : inputs) node.inputs.push_back(in.impl_);
  node.output = out.impl_;
  node.backward = std::move(backward.fn);
  tape.Record(std::move(node));
  return out;
}

Tape& Tape::Current() {
  thread_local Tape tape;
  return tape;
}

std::size_t Tape::Backward(const Tensor& loss) {
  if (loss.numel() != 1) {
    throw ContractError("backward needs a one-element loss, got " +
                        ShapeToString(loss.shape()));
  }
  std::vector<TapeNode> nodes = std::move(nodes_);
  nodes_.clear();
  if (!loss.requires_grad()) return 0;

  auto& root = *loss.storage();
  if (root.is_leaf) {
    if (root.grad.empty()) root.grad.assign(1, 0.0);
    root.grad[0] += 1.0;
    return 0;
  }
  root.grad.assign(1, 1.0);

  // Intermediate gradients are freed as soon as their node has run.
  std::size_t replayed = 0;
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    TensorStorage& out = *it->output;
    if (out.grad.empty()) continue;  // not reachable from the loss
    GradContext ctx;
    ctx.output_grad = out.grad;
    ctx.inputs.reserve(it->inputs.size());
    for (auto& in : it->inputs) {
      if (in->requires_grad) {
        if (in->grad.empty()) in->grad.assign(in->data.size(), 0.0);
        ctx.inputs.push_back(&in->grad);
      } else {
        ctx.inputs.push_back(nullptr);
      }
    }
    it->backward(ctx);
    ++replayed;
    std::vector<double>().swap(out.grad);
  }
  for (auto& in_node : nodes) {
    for (auto& in : in_node.inputs) {
      if (!in->is_leaf && !in->grad.empty()) std::vector<double>().swap(in->grad);
    }
  }
  return replayed;
}

}  // namespace gicx
