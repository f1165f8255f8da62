/* Copyright 2026 The Latency Atlas Authors. All Rights Reserved.

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

#ifndef LATENCY_ATLAS_NN_HPP_
#define LATENCY_ATLAS_NN_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace latency_atlas::nn {

// Row-major (batch x features) matrix. Convolution activations are stored
// position-major ("channels last"): column = position * channels + channel,
// so flattening is a no-op on the data.
struct Tensor2D {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor2D() = default;
  Tensor2D(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  bool operator==(const Tensor2D&) const = default;
};

enum class LayerType { kDense, kConv1D, kRelu, kFlatten, kDropout, kSoftplus };

const char* ToString(LayerType type);

struct LayerParams {
  LayerType type = LayerType::kRelu;
  int in = 0;      // Dense: input features. Conv1D: input channels.
  int out = 0;     // Dense: output features. Conv1D: output channels.
  int kernel = 0;  // Conv1D only
  int stride = 1;  // Conv1D only
  double rate = 0; // Dropout only, in [0, 1)
  // Dense: (in x out) row-major. Conv1D: (kernel*in x out) row-major, i.e.
  // weight(tap, in_channel, out_channel).
  std::vector<double> weights;
  std::vector<double> biases;  // out

  static LayerParams Dense(int in, int out);
  static LayerParams Conv1D(int in_channels, int out_channels, int kernel,
                            int stride = 1);
  static LayerParams Relu() {
    LayerParams p;
    p.type = LayerType::kRelu;
    return p;
  }
  static LayerParams Flatten() {
    LayerParams p;
    p.type = LayerType::kFlatten;
    return p;
  }
  static LayerParams Dropout(double rate);
  static LayerParams Softplus() {
    LayerParams p;
    p.type = LayerType::kSoftplus;
    return p;
  }

  bool has_params() const {
    return type == LayerType::kDense || type == LayerType::kConv1D;
  }
  bool operator==(const LayerParams&) const = default;
};

using Network = std::vector<LayerParams>;

// Output width of the network for an input of `input_width` features; throws
// kShapeMismatch naming the first layer that cannot consume its input.
std::size_t OutputWidth(const Network& net, std::size_t input_width);
std::size_t ParameterCount(const Network& net);

// He-uniform for weights feeding a ReLU, Glorot-uniform otherwise; zero biases.
void InitializeWeights(Network& net, std::uint64_t seed);

struct ForwardCache {
  std::vector<Tensor2D> inputs;              // input of every layer
  std::vector<Tensor2D> columns;             // im2col buffer per layer (conv)
  std::vector<std::vector<double>> masks;    // dropout keep-scale per layer
  std::size_t input_width = 0;
};

// Runs the network. Dropout is active only when `training` is true; the mask is
// drawn from `dropout_seed`. Pass `cache` to enable Backward.
Tensor2D Forward(const Network& net, const Tensor2D& x, bool training,
                 std::uint64_t dropout_seed = 0, ForwardCache* cache = nullptr);

// Runs layers [begin, end) only. Dropout masks depend on the absolute layer
// index, so chaining ranges reproduces Forward exactly.
Tensor2D ForwardRange(const Network& net, const Tensor2D& x, std::size_t begin,
                      std::size_t end, bool training,
                      std::uint64_t dropout_seed = 0);

struct LayerGrad {
  std::vector<double> weights;
  std::vector<double> biases;
};

// Reverse-mode gradients of a scalar loss given dL/dY. Entries for layers
// without parameters are empty. `input_grad`, when given, receives dL/dX.
std::vector<LayerGrad> Backward(const Network& net, const ForwardCache& cache,
                                const Tensor2D& dy,
                                Tensor2D* input_grad = nullptr);

// Per-column standardization. Columns with zero variance keep std = 1 and are
// flagged in `constant`.
struct StandardScaler {
  std::vector<double> means;
  std::vector<double> stds;
  std::vector<bool> constant;

  static StandardScaler Fit(const Tensor2D& x);
  Tensor2D Transform(const Tensor2D& x) const;
  Tensor2D Inverse(const Tensor2D& x) const;
  void TransformRow(std::span<const double> in, std::span<double> out) const;
  bool operator==(const StandardScaler&) const = default;
};

struct LossResult {
  double loss = 0;
  std::vector<double> grad;  // dL/dy_hat
};

// Mean absolute percentage logarithmic error:
//   (1/n) sum |(ln(1+yh) - ln(1+y)) / ln(1+y)|
// Requires y > 0 and yh > -1 (kDomain otherwise). Subgradient 0 at the kink.
LossResult MapleLoss(std::span<const double> y_hat, std::span<const double> y);

// Mean squared logarithmic error: (1/n) sum (ln(1+yh) - ln(1+y))^2.
// Requires y >= 0 and yh > -1.
LossResult MsleLoss(std::span<const double> y_hat, std::span<const double> y);

struct AdamState {
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // One entry per parameter tensor: weights then biases of each layer that
  // has parameters, in layer order.
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  static AdamState For(const Network& net);
};

// Bias-corrected Adam update of every parameter in `net`.
void AdamStep(Network& net, const std::vector<LayerGrad>& grads,
              AdamState& state, double lr);

}  // namespace latency_atlas::nn

#endif  // LATENCY_ATLAS_NN_HPP_
