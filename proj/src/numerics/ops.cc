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

#include "gicx/numerics/ops.h"

#include <Eigen/Core>
#include <cmath>

#include "gicx/numerics/errors.h"

namespace gicx {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMatrix = Eigen::Map<RowMatrix>;
using ConstMapMatrix = Eigen::Map<const RowMatrix>;

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape " + ShapeToString(a.shape()) + " vs " +
                         ShapeToString(b.shape()));
  }
}

template <typename F>
std::vector<double> Map2(const Tensor& a, const Tensor& b, F f) {
  std::vector<double> out(static_cast<std::size_t>(a.numel()));
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[i], y[i]);
  return out;
}

template <typename F>
std::vector<double> Map1(const Tensor& a, F f) {
  std::vector<double> out(static_cast<std::size_t>(a.numel()));
  auto x = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[i]);
  return out;
}

void AccumulateScaled(std::vector<double>* dst, std::span<const double> g, double s) {
  if (!dst) return;
  for (std::size_t i = 0; i < g.size(); ++i) (*dst)[i] += s * g[i];
}

struct ConvGeometry {
  int64_t c_in, h, w, c_out, k, stride, pad, h_out, w_out;
  int64_t patch() const { return c_in * k * k; }
  int64_t pixels() const { return h_out * w_out; }
};

ConvGeometry CheckConv(const Tensor& input, const Tensor& kernel, int stride, int padding) {
  if (input.rank() != 3 || kernel.rank() != 4) {
    throw DimensionError("conv2d expects CxHxW input and OxIxKxK kernel, got " +
                         ShapeToString(input.shape()) + " and " + ShapeToString(kernel.shape()));
  }
  ConvGeometry g{input.dim(0), input.dim(1), input.dim(2), kernel.dim(0), kernel.dim(2),
                 stride, padding, 0, 0};
  if (kernel.dim(1) != g.c_in || kernel.dim(3) != g.k) {
    throw DimensionError("conv2d kernel " + ShapeToString(kernel.shape()) +
                         " incompatible with input " + ShapeToString(input.shape()));
  }
  if (stride < 1 || padding < 0) throw ParameterError("conv2d: bad stride/padding");
  const int64_t span_h = g.h + 2 * g.pad - g.k;
  const int64_t span_w = g.w + 2 * g.pad - g.k;
  if (span_h < 0 || span_w < 0 || span_h % g.stride != 0 || span_w % g.stride != 0) {
    throw DimensionError("conv2d output size is not integral for input " +
                         ShapeToString(input.shape()));
  }
  g.h_out = span_h / g.stride + 1;
  g.w_out = span_w / g.stride + 1;
  return g;
}

// Row r = (c, ky, kx), column = output pixel.
void Im2Col(const ConvGeometry& g, std::span<const double> x, std::vector<double>& col) {
  col.assign(static_cast<std::size_t>(g.patch() * g.pixels()), 0.0);
  for (int64_t c = 0; c < g.c_in; ++c) {
    for (int64_t ky = 0; ky < g.k; ++ky) {
      for (int64_t kx = 0; kx < g.k; ++kx) {
        double* row = col.data() + ((c * g.k + ky) * g.k + kx) * g.pixels();
        for (int64_t oy = 0; oy < g.h_out; ++oy) {
          const int64_t iy = oy * g.stride + ky - g.pad;
          if (iy < 0 || iy >= g.h) continue;
          const double* src = x.data() + (c * g.h + iy) * g.w;
          for (int64_t ox = 0; ox < g.w_out; ++ox) {
            const int64_t ix = ox * g.stride + kx - g.pad;
            if (ix >= 0 && ix < g.w) row[oy * g.w_out + ox] = src[ix];
          }
        }
      }
    }
  }
}

void Col2ImAccumulate(const ConvGeometry& g, const std::vector<double>& col,
                      std::vector<double>& dx) {
  for (int64_t c = 0; c < g.c_in; ++c) {
    for (int64_t ky = 0; ky < g.k; ++ky) {
      for (int64_t kx = 0; kx < g.k; ++kx) {
        const double* row = col.data() + ((c * g.k + ky) * g.k + kx) * g.pixels();
        for (int64_t oy = 0; oy < g.h_out; ++oy) {
          const int64_t iy = oy * g.stride + ky - g.pad;
          if (iy < 0 || iy >= g.h) continue;
          double* dst = dx.data() + (c * g.h + iy) * g.w;
          for (int64_t ox = 0; ox < g.w_out; ++ox) {
            const int64_t ix = ox * g.stride + kx - g.pad;
            if (ix >= 0 && ix < g.w) dst[ix] += row[oy * g.w_out + ox];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor Add(const Tensor& a, const Tensor& b) {
  if (b.numel() == 1 && a.numel() != 1) {
    const double s = b[0];
    return RecordOp(a.shape(), Map1(a, [s](double x) { return x + s; }), {a, b},
                    {[](const GradContext& g) {
                      AccumulateScaled(g.inputs[0], g.output_grad, 1.0);
                      if (g.inputs[1]) {
                        double total = 0.0;
                        for (double v : g.output_grad) total += v;
                        (*g.inputs[1])[0] += total;
                      }
                    }});
  }
  RequireSameShape(a, b, "add");
  return RecordOp(a.shape(), Map2(a, b, [](double x, double y) { return x + y; }), {a, b},
                  {[](const GradContext& g) {
                    AccumulateScaled(g.inputs[0], g.output_grad, 1.0);
                    AccumulateScaled(g.inputs[1], g.output_grad, 1.0);
                  }});
}

Tensor Add(const Tensor& a, double b) {
  return RecordOp(a.shape(), Map1(a, [b](double x) { return x + b; }), {a},
                  {[](const GradContext& g) { AccumulateScaled(g.inputs[0], g.output_grad, 1.0); }});
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "sub");
  return RecordOp(a.shape(), Map2(a, b, [](double x, double y) { return x - y; }), {a, b},
                  {[](const GradContext& g) {
                    AccumulateScaled(g.inputs[0], g.output_grad, 1.0);
                    AccumulateScaled(g.inputs[1], g.output_grad, -1.0);
                  }});
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "mul");
  auto sa = a.storage();
  auto sb = b.storage();
  return RecordOp(a.shape(), Map2(a, b, [](double x, double y) { return x * y; }), {a, b},
                  {[sa, sb](const GradContext& g) {
                    const auto& go = g.output_grad;
                    if (g.inputs[0]) {
                      for (std::size_t i = 0; i < go.size(); ++i) (*g.inputs[0])[i] += go[i] * sb->data[i];
                    }
                    if (g.inputs[1]) {
                      for (std::size_t i = 0; i < go.size(); ++i) (*g.inputs[1])[i] += go[i] * sa->data[i];
                    }
                  }});
}

Tensor Scale(const Tensor& a, double s) {
  return RecordOp(a.shape(), Map1(a, [s](double x) { return x * s; }), {a},
                  {[s](const GradContext& g) { AccumulateScaled(g.inputs[0], g.output_grad, s); }});
}

Tensor Abs(const Tensor& a) {
  auto sa = a.storage();
  return RecordOp(a.shape(), Map1(a, [](double x) { return std::abs(x); }), {a},
                  {[sa](const GradContext& g) {
                    if (!g.inputs[0]) return;
                    for (std::size_t i = 0; i < g.output_grad.size(); ++i) {
                      const double x = sa->data[i];
                      const double sign = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
                      (*g.inputs[0])[i] += sign * g.output_grad[i];
                    }
                  }});
}

Tensor Silu(const Tensor& a) {
  auto sa = a.storage();
  return RecordOp(a.shape(), Map1(a, [](double x) { return x / (1.0 + std::exp(-x)); }), {a},
                  {[sa](const GradContext& g) {
                    if (!g.inputs[0]) return;
                    for (std::size_t i = 0; i < g.output_grad.size(); ++i) {
                      const double x = sa->data[i];
                      const double sig = 1.0 / (1.0 + std::exp(-x));
                      (*g.inputs[0])[i] += g.output_grad[i] * sig * (1.0 + x * (1.0 - sig));
                    }
                  }});
}

Tensor Sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  return RecordOp({1}, {total}, {a}, {[](const GradContext& g) {
                    if (!g.inputs[0]) return;
                    for (double& v : *g.inputs[0]) v += g.output_grad[0];
                  }});
}

Tensor Mean(const Tensor& a) {
  if (a.numel() == 0) throw DimensionError("mean of empty tensor");
  const double n = static_cast<double>(a.numel());
  double total = 0.0;
  for (double v : a.data()) total += v;
  return RecordOp({1}, {total / n}, {a}, {[n](const GradContext& g) {
                    if (!g.inputs[0]) return;
                    for (double& v : *g.inputs[0]) v += g.output_grad[0] / n;
                  }});
}

Tensor MseLoss(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "mse");
  if (a.numel() == 0) throw DimensionError("mse of empty tensors");
  const double n = static_cast<double>(a.numel());
  auto diff = std::make_shared<std::vector<double>>(
      Map2(a, b, [](double x, double y) { return x - y; }));
  double total = 0.0;
  for (double d : *diff) total += d * d;
  return RecordOp({1}, {total / n}, {a, b}, {[diff, n](const GradContext& g) {
                    const double s = 2.0 * g.output_grad[0] / n;
                    AccumulateScaled(g.inputs[0], *diff, s);
                    AccumulateScaled(g.inputs[1], *diff, -s);
                  }});
}

// Eigen evaluates tiny products coefficient-wise with vector reductions whose
// order follows buffer alignment. Below this size we run a fixed-order loop so
// results do not depend on where malloc put the operands.
constexpr int64_t kSmallProduct = 32;

template <class Lhs, class Rhs>
void Product(MapMatrix dst, const Lhs& lhs, const Rhs& rhs, bool accumulate) {
  const int64_t m = lhs.rows(), k = lhs.cols(), n = rhs.cols();
  if (m + k + n >= kSmallProduct) {
    if (accumulate) {
      dst.noalias() += lhs * rhs;
    } else {
      dst.noalias() = lhs * rhs;
    }
    return;
  }
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int64_t p = 0; p < k; ++p) acc += lhs.coeff(i, p) * rhs.coeff(p, j);
      dst(i, j) = accumulate ? dst(i, j) + acc : acc;
    }
  }
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: " + ShapeToString(a.shape()) + " x " +
                         ShapeToString(b.shape()));
  }
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(static_cast<std::size_t>(m * n));
  Product(MapMatrix(out.data(), m, n), ConstMapMatrix(a.data().data(), m, k),
          ConstMapMatrix(b.data().data(), k, n), false);
  auto sa = a.storage();
  auto sb = b.storage();
  return RecordOp({m, n}, std::move(out), {a, b}, {[sa, sb, m, k, n](const GradContext& g) {
                    ConstMapMatrix go(g.output_grad.data(), m, n);
                    if (g.inputs[0]) {
                      Product(MapMatrix(g.inputs[0]->data(), m, k), go,
                              ConstMapMatrix(sb->data.data(), k, n).transpose(), true);
                    }
                    if (g.inputs[1]) {
                      Product(MapMatrix(g.inputs[1]->data(), k, n),
                              ConstMapMatrix(sa->data.data(), m, k).transpose(), go, true);
                    }
                  }});
}

Tensor Conv2d(const Tensor& input, const Tensor& kernel, int stride, int padding) {
  return Conv2d(input, kernel, Tensor(), stride, padding);
}

Tensor Conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride,
              int padding) {
  const ConvGeometry g = CheckConv(input, kernel, stride, padding);
  const bool has_bias = bias.numel() > 0;
  if (has_bias && bias.numel() != g.c_out) {
    throw DimensionError("conv2d bias has " + std::to_string(bias.numel()) + " elements, need " +
                         std::to_string(g.c_out));
  }
  auto col = std::make_shared<std::vector<double>>();
  Im2Col(g, input.data(), *col);
  std::vector<double> out(static_cast<std::size_t>(g.c_out * g.pixels()));
  MapMatrix y(out.data(), g.c_out, g.pixels());
  Product(y, ConstMapMatrix(kernel.data().data(), g.c_out, g.patch()),
          ConstMapMatrix(col->data(), g.patch(), g.pixels()), false);
  if (has_bias) {
    for (int64_t o = 0; o < g.c_out; ++o) y.row(o).array() += bias[static_cast<std::size_t>(o)];
  }
  auto sk = kernel.storage();
  std::vector<Tensor> inputs{input, kernel};
  if (has_bias) inputs.push_back(bias);
  return RecordOp({g.c_out, g.h_out, g.w_out}, std::move(out), std::move(inputs),
                  {[g, col, sk, has_bias](const GradContext& ctx) {
                    ConstMapMatrix gy(ctx.output_grad.data(), g.c_out, g.pixels());
                    if (ctx.inputs[1]) {
                      Product(MapMatrix(ctx.inputs[1]->data(), g.c_out, g.patch()), gy,
                              ConstMapMatrix(col->data(), g.patch(), g.pixels()).transpose(),
                              true);
                    }
                    if (has_bias && ctx.inputs[2]) {
                      for (int64_t o = 0; o < g.c_out; ++o) {
                        double sum = 0.0;
                        for (int64_t p = 0; p < g.pixels(); ++p) sum += gy(o, p);
                        (*ctx.inputs[2])[o] += sum;
                      }
                    }
                    if (ctx.inputs[0]) {
                      std::vector<double> dcol(static_cast<std::size_t>(g.patch() * g.pixels()));
                      Product(MapMatrix(dcol.data(), g.patch(), g.pixels()),
                              ConstMapMatrix(sk->data.data(), g.c_out, g.patch()).transpose(), gy,
                              false);
                      Col2ImAccumulate(g, dcol, *ctx.inputs[0]);
                    }
                  }});
}

Tensor AvgPool2d(const Tensor& input, int factor) {
  if (input.rank() != 3) throw DimensionError("avgpool expects CxHxW");
  if (factor < 1) throw ParameterError("avgpool factor must be positive");
  const int64_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (h % factor != 0 || w % factor != 0) {
    throw DimensionError("avgpool: " + ShapeToString(input.shape()) + " not divisible by " +
                         std::to_string(factor));
  }
  const int64_t ho = h / factor, wo = w / factor;
  const double inv = 1.0 / (factor * factor);
  std::vector<double> out(static_cast<std::size_t>(c * ho * wo), 0.0);
  auto x = input.data();
  for (int64_t ch = 0; ch < c; ++ch)
    for (int64_t y = 0; y < h; ++y)
      for (int64_t xx = 0; xx < w; ++xx)
        out[(ch * ho + y / factor) * wo + xx / factor] += x[(ch * h + y) * w + xx];
  for (double& v : out) v *= inv;
  return RecordOp({c, ho, wo}, std::move(out), {input},
                  {[c, h, w, ho, wo, factor, inv](const GradContext& g) {
                    if (!g.inputs[0]) return;
                    auto& gi = *g.inputs[0];
                    for (int64_t ch = 0; ch < c; ++ch)
                      for (int64_t y = 0; y < h; ++y)
                        for (int64_t xx = 0; xx < w; ++xx)
                          gi[(ch * h + y) * w + xx] +=
                              inv * g.output_grad[(ch * ho + y / factor) * wo + xx / factor];
                  }});
}

Tensor UpsampleNearest(const Tensor& input, int factor) {
  if (input.rank() != 3) throw DimensionError("upsample expects CxHxW");
  if (factor < 1) throw ParameterError("upsample factor must be positive");
  const int64_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int64_t ho = h * factor, wo = w * factor;
  std::vector<double> out(static_cast<std::size_t>(c * ho * wo));
  auto x = input.data();
  for (int64_t ch = 0; ch < c; ++ch)
    for (int64_t y = 0; y < ho; ++y)
      for (int64_t xx = 0; xx < wo; ++xx)
        out[(ch * ho + y) * wo + xx] = x[(ch * h + y / factor) * w + xx / factor];
  return RecordOp({c, ho, wo}, std::move(out), {input},
                  {[c, h, w, ho, wo, factor](const GradContext& g) {
                    if (!g.inputs[0]) return;
                    auto& gi = *g.inputs[0];
                    for (int64_t ch = 0; ch < c; ++ch)
                      for (int64_t y = 0; y < ho; ++y)
                        for (int64_t xx = 0; xx < wo; ++xx)
                          gi[(ch * h + y / factor) * w + xx / factor] +=
                              g.output_grad[(ch * ho + y) * wo + xx];
                  }});
}

Tensor ChannelScaleShift(const Tensor& x, const Tensor& scale, const Tensor& shift) {
  if (x.rank() < 1) throw DimensionError("channel scale/shift needs a leading channel axis");
  const int64_t c = x.dim(0);
  if (scale.numel() != c || shift.numel() != c) {
    throw DimensionError("channel scale/shift: " + std::to_string(c) + " channels vs " +
                         std::to_string(scale.numel()) + "/" + std::to_string(shift.numel()));
  }
  const int64_t inner = x.numel() / std::max<int64_t>(c, 1);
  std::vector<double> out(static_cast<std::size_t>(x.numel()));
  auto xd = x.data();
  for (int64_t ch = 0; ch < c; ++ch) {
    const double s = scale[static_cast<std::size_t>(ch)];
    const double b = shift[static_cast<std::size_t>(ch)];
    for (int64_t i = 0; i < inner; ++i) out[ch * inner + i] = xd[ch * inner + i] * s + b;
  }
  auto sx = x.storage();
  auto ss = scale.storage();
  return RecordOp(x.shape(), std::move(out), {x, scale, shift},
                  {[sx, ss, c, inner](const GradContext& g) {
                    const auto& go = g.output_grad;
                    for (int64_t ch = 0; ch < c; ++ch) {
                      const double s = ss->data[ch];
                      double ds = 0.0, db = 0.0;
                      for (int64_t i = 0; i < inner; ++i) {
                        const std::size_t idx = static_cast<std::size_t>(ch * inner + i);
                        if (g.inputs[0]) (*g.inputs[0])[idx] += go[idx] * s;
                        ds += go[idx] * sx->data[idx];
                        db += go[idx];
                      }
                      if (g.inputs[1]) (*g.inputs[1])[ch] += ds;
                      if (g.inputs[2]) (*g.inputs[2])[ch] += db;
                    }
                  }});
}

Tensor GroupNorm(const Tensor& x, int groups, double epsilon) {
  if (x.rank() < 1) throw DimensionError("group norm needs a leading channel axis");
  if (groups < 1 || x.dim(0) % groups != 0) {
    throw ParameterError("group norm: " + std::to_string(x.dim(0)) + " channels not divisible into " +
                         std::to_string(groups) + " groups");
  }
  if (!(epsilon > 0.0)) throw ParameterError("group norm epsilon must be positive");
  const int64_t n = x.numel() / groups;
  auto xhat = std::make_shared<std::vector<double>>(static_cast<std::size_t>(x.numel()));
  auto inv_std = std::make_shared<std::vector<double>>(static_cast<std::size_t>(groups));
  auto xd = x.data();
  for (int64_t gi = 0; gi < groups; ++gi) {
    const double* src = xd.data() + gi * n;
    double mean = 0.0;
    for (int64_t i = 0; i < n; ++i) mean += src[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (int64_t i = 0; i < n; ++i) var += (src[i] - mean) * (src[i] - mean);
    var /= static_cast<double>(n);
    const double r = 1.0 / std::sqrt(var + epsilon);
    (*inv_std)[gi] = r;
    for (int64_t i = 0; i < n; ++i) (*xhat)[gi * n + i] = (src[i] - mean) * r;
  }
  std::vector<double> out = *xhat;
  return RecordOp(x.shape(), std::move(out), {x}, {[xhat, inv_std, groups, n](const GradContext& g) {
                    if (!g.inputs[0]) return;
                    auto& dx = *g.inputs[0];
                    const auto& go = g.output_grad;
                    for (int64_t gi = 0; gi < groups; ++gi) {
                      double mg = 0.0, mgx = 0.0;
                      for (int64_t i = 0; i < n; ++i) {
                        mg += go[gi * n + i];
                        mgx += go[gi * n + i] * (*xhat)[gi * n + i];
                      }
                      mg /= static_cast<double>(n);
                      mgx /= static_cast<double>(n);
                      const double r = (*inv_std)[gi];
                      for (int64_t i = 0; i < n; ++i) {
                        const std::size_t idx = static_cast<std::size_t>(gi * n + i);
                        dx[idx] += r * (go[idx] - mg - (*xhat)[idx] * mgx);
                      }
                    }
                  }});
}

}  // namespace gicx
