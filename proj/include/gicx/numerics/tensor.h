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

#ifndef GICX_NUMERICS_TENSOR_H_
#define GICX_NUMERICS_TENSOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gicx {

using Shape = std::vector<int64_t>;

int64_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

struct TensorStorage {
  Shape shape;
  std::vector<double> data;
  // Empty until a gradient is accumulated.
  std::vector<double> grad;
  bool requires_grad = false;
  // False once the tensor is produced by a recorded operation.
  bool is_leaf = true;
};

// Gradient buffers handed to a backward closure. `inputs[i]` is null when
// input i does not need a gradient, letting the closure skip that work.
struct GradContext {
  std::span<const double> output_grad;
  std::vector<std::vector<double>*> inputs;
};

struct BackwardFn {
  std::function<void(const GradContext&)> fn;
};

class Tensor;
Tensor RecordOp(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
                BackwardFn backward);

// Dense row-major array of doubles. Copies share storage; values are never
// modified after construction except through the optimizer (leaves only).
class Tensor {
 public:
  Tensor() : Tensor(Shape{0}, {}) {}
  Tensor(Shape shape, std::vector<double> data);

  static Tensor Zeros(const Shape& shape);
  static Tensor Full(const Shape& shape, double value);
  static Tensor Scalar(double value) { return Tensor({1}, {value}); }

  const Shape& shape() const { return impl_->shape; }
  int64_t dim(std::size_t i) const { return impl_->shape.at(i); }
  std::size_t rank() const { return impl_->shape.size(); }
  int64_t numel() const { return static_cast<int64_t>(impl_->data.size()); }

  std::span<const double> data() const { return impl_->data; }
  double operator[](std::size_t i) const { return impl_->data[i]; }
  double item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  // Only valid on leaves.
  Tensor& set_requires_grad(bool on);
  bool is_leaf() const { return impl_->is_leaf; }

  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const double> grad() const { return impl_->grad; }
  void ZeroGrad();

  // In-place update hook used by optimizers. Leaves only.
  std::span<double> mutable_leaf_data();
  std::span<double> mutable_grad();

  // Copy of the values that is not connected to any recorded operation.
  Tensor Detach() const;
  Tensor Reshape(const Shape& shape) const;

  const std::shared_ptr<TensorStorage>& storage() const { return impl_; }
  bool SameStorage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  explicit Tensor(std::shared_ptr<TensorStorage> impl) : impl_(std::move(impl)) {}
  friend class Tape;
  friend Tensor RecordOp(Shape, std::vector<double>, std::vector<Tensor>, BackwardFn);
  std::shared_ptr<TensorStorage> impl_;
};

// Creates the result of a primitive. When recording is enabled and any input
// requires a gradient, the operation is appended to the current thread's tape.
// Throws NumericError if `data` contains a non-finite value.
Tensor RecordOp(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
                BackwardFn backward);

struct TapeNode {
  std::vector<std::shared_ptr<TensorStorage>> inputs;
  std::shared_ptr<TensorStorage> output;
  std::function<void(const GradContext&)> backward;
};

// Define-by-run record of primitive operations. One tape per thread.
class Tape {
 public:
  static Tape& Current();

  void Record(TapeNode node) { nodes_.push_back(std::move(node)); }
  std::size_t size() const { return nodes_.size(); }
  void Clear() { nodes_.clear(); }
  bool recording() const { return paused_ == 0; }

  // Accumulates d(loss)/d(leaf) into every reachable leaf that requires a
  // gradient, then clears the tape. Nodes are replayed in reverse recording
  // order, which is a reverse topological order; each is visited at most once.
  // Returns the number of nodes replayed.
  std::size_t Backward(const Tensor& loss);

 private:
  friend class NoGradGuard;
  std::vector<TapeNode> nodes_;
  int paused_ = 0;
};

// Disables recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard() { ++Tape::Current().paused_; }
  ~NoGradGuard() { --Tape::Current().paused_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

inline std::size_t Backward(const Tensor& loss) { return Tape::Current().Backward(loss); }

}  // namespace gicx

#endif  // GICX_NUMERICS_TENSOR_H_
