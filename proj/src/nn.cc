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

#include "latency_atlas/nn.hpp"

#include <Eigen/Core>
#include <cmath>
#include <random>
#include <string>

#include "latency_atlas/error.hpp"

namespace latency_atlas::nn {

namespace {

using RowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatMap = Eigen::Map<const RowMajor>;

// Products run on owned (hence aligned) copies. Eigen picks its vectorized
// paths from the operand addresses, so mapping std::vector storage directly
// makes the last bits of a result depend on where the heap put the buffers.
RowMajor Owned(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
  return ConstMatMap(v.data(), rows, cols);
}

void Store(const RowMajor& m, std::vector<double>& dst) {
  dst.assign(m.data(), m.data() + m.size());
}

void AddBias(std::vector<double>& out, const std::vector<double>& bias) {
  const std::size_t width = bias.size();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += bias[k % width];
}

std::vector<double> ColumnSums(const std::vector<double>& g, std::size_t width) {
  std::vector<double> sums(width, 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) sums[k % width] += g[k];
  return sums;
}

std::string LayerLabel(std::size_t index, LayerType type) {
  return "layer " + std::to_string(index) + " (" + ToString(type) + ")";
}

// Spatial length of a conv input; throws if the width is not a whole number of
// positions.
std::size_t ConvLength(const LayerParams& p, std::size_t width,
                       std::size_t index) {
  if (p.in <= 0 || width % static_cast<std::size_t>(p.in) != 0) {
    Fail(ErrorCode::kShapeMismatch,
         LayerLabel(index, p.type) + ": input width " + std::to_string(width) +
             " is not a multiple of " + std::to_string(p.in) + " channels");
  }
  const std::size_t length = width / p.in;
  if (length < static_cast<std::size_t>(p.kernel)) {
    Fail(ErrorCode::kShapeMismatch,
         LayerLabel(index, p.type) + ": input length " +
             std::to_string(length) + " shorter than kernel " +
             std::to_string(p.kernel));
  }
  return length;
}

std::size_t ConvOutLength(const LayerParams& p, std::size_t length) {
  return (length - p.kernel) / p.stride + 1;
}

double Softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (std::uint64_t{words[0]} << 32) | words[1];
}

}  // namespace

const char* ToString(LayerType type) {
  switch (type) {
    case LayerType::kDense: return "dense";
    case LayerType::kConv1D: return "conv1d";
    case LayerType::kRelu: return "relu";
    case LayerType::kFlatten: return "flatten";
    case LayerType::kDropout: return "dropout";
    case LayerType::kSoftplus: return "softplus";
  }
  return "?";
}

LayerParams LayerParams::Dense(int in, int out) {
  LayerParams p;
  p.type = LayerType::kDense;
  p.in = in;
  p.out = out;
  p.weights.assign(static_cast<std::size_t>(in) * out, 0.0);
  p.biases.assign(out, 0.0);
  return p;
}

LayerParams LayerParams::Conv1D(int in_channels, int out_channels, int kernel,
                                int stride) {
  LayerParams p;
  p.type = LayerType::kConv1D;
  p.in = in_channels;
  p.out = out_channels;
  p.kernel = kernel;
  p.stride = stride;
  p.weights.assign(static_cast<std::size_t>(kernel) * in_channels * out_channels,
                   0.0);
  p.biases.assign(out_channels, 0.0);
  return p;
}

LayerParams LayerParams::Dropout(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    Fail(ErrorCode::kValidation, "dropout rate must be in [0, 1)");
  }
  LayerParams p;
  p.type = LayerType::kDropout;
  p.rate = rate;
  return p;
}

std::size_t OutputWidth(const Network& net, std::size_t width) {
  for (std::size_t i = 0; i < net.size(); ++i) {
    const LayerParams& p = net[i];
    switch (p.type) {
      case LayerType::kDense:
        if (width != static_cast<std::size_t>(p.in)) {
          Fail(ErrorCode::kShapeMismatch,
               LayerLabel(i, p.type) + ": expects " + std::to_string(p.in) +
                   " inputs, got " + std::to_string(width));
        }
        width = p.out;
        break;
      case LayerType::kConv1D:
        width = ConvOutLength(p, ConvLength(p, width, i)) * p.out;
        break;
      default:
        break;
    }
  }
  return width;
}

std::size_t ParameterCount(const Network& net) {
  std::size_t n = 0;
  for (const auto& p : net) n += p.weights.size() + p.biases.size();
  return n;
}

void InitializeWeights(Network& net, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < net.size(); ++i) {
    LayerParams& p = net[i];
    if (!p.has_params()) continue;
    const double fan_in =
        p.type == LayerType::kConv1D ? double(p.kernel) * p.in : double(p.in);
    const bool feeds_relu =
        i + 1 < net.size() && net[i + 1].type == LayerType::kRelu;
    const double limit = feeds_relu ? std::sqrt(6.0 / fan_in)
                                    : std::sqrt(6.0 / (fan_in + p.out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : p.weights) w = dist(rng);
    std::fill(p.biases.begin(), p.biases.end(), 0.0);
  }
}

namespace {
Tensor2D RunLayers(const Network& net, const Tensor2D& x, std::size_t begin,
                   std::size_t end, bool training, std::uint64_t dropout_seed,
                   ForwardCache* cache);
}  // namespace

Tensor2D Forward(const Network& net, const Tensor2D& x, bool training,
                 std::uint64_t dropout_seed, ForwardCache* cache) {
  if (cache) {
    cache->inputs.assign(net.size(), {});
    cache->columns.assign(net.size(), {});
    cache->masks.assign(net.size(), {});
    cache->input_width = x.cols;
  }
  return RunLayers(net, x, 0, net.size(), training, dropout_seed, cache);
}

Tensor2D ForwardRange(const Network& net, const Tensor2D& x, std::size_t begin,
                      std::size_t end, bool training, std::uint64_t dropout_seed) {
  if (begin > end || end > net.size()) {
    Fail(ErrorCode::kUsage, "layer range out of bounds");
  }
  return RunLayers(net, x, begin, end, training, dropout_seed, nullptr);
}

namespace {

Tensor2D RunLayers(const Network& net, const Tensor2D& x, std::size_t begin,
                   std::size_t end, bool training, std::uint64_t dropout_seed,
                   ForwardCache* cache) {
  Tensor2D cur = x;
  const std::size_t batch = x.rows;
  for (std::size_t i = begin; i < end; ++i) {
    const LayerParams& p = net[i];
    Tensor2D next;
    switch (p.type) {
      case LayerType::kDense: {
        if (cur.cols != static_cast<std::size_t>(p.in)) {
          Fail(ErrorCode::kShapeMismatch,
               LayerLabel(i, p.type) + ": expects " + std::to_string(p.in) +
                   " inputs, got " + std::to_string(cur.cols));
        }
        next = Tensor2D(batch, p.out);
        const RowMajor out = Owned(cur.data, batch, p.in) * Owned(p.weights, p.in, p.out);
        Store(out, next.data);
        AddBias(next.data, p.biases);
        break;
      }
      case LayerType::kConv1D: {
        const std::size_t length = ConvLength(p, cur.cols, i);
        const std::size_t out_len = ConvOutLength(p, length);
        const std::size_t patch = static_cast<std::size_t>(p.kernel) * p.in;
        const std::size_t rows = batch * out_len;
        // im2col: with channels-last storage each receptive field is one
        // contiguous run of kernel*in values.
        Tensor2D cols(rows, patch);
        for (std::size_t b = 0; b < batch; ++b) {
          const double* src = cur.data.data() + b * cur.cols;
          for (std::size_t q = 0; q < out_len; ++q) {
            std::copy_n(src + q * p.stride * p.in, patch,
                        cols.data.data() + (b * out_len + q) * patch);
          }
        }
        next = Tensor2D(batch, out_len * p.out);
        const RowMajor out = Owned(cols.data, rows, patch) * Owned(p.weights, patch, p.out);
        Store(out, next.data);
        AddBias(next.data, p.biases);
        if (cache) cache->columns[i] = std::move(cols);
        break;
      }
      case LayerType::kRelu:
        next = cur;
        for (double& v : next.data) v = v > 0 ? v : 0.0;
        break;
      case LayerType::kFlatten:
        next = cur;
        break;
      case LayerType::kDropout: {
        next = cur;
        if (training && p.rate > 0) {
          std::mt19937_64 rng(MixSeed(dropout_seed, i));
          std::uniform_real_distribution<double> u(0.0, 1.0);
          const double scale = 1.0 / (1.0 - p.rate);
          std::vector<double> mask(next.data.size());
          for (std::size_t k = 0; k < mask.size(); ++k) {
            mask[k] = u(rng) >= p.rate ? scale : 0.0;
            next.data[k] *= mask[k];
          }
          if (cache) cache->masks[i] = std::move(mask);
        }
        break;
      }
      case LayerType::kSoftplus:
        next = cur;
        for (double& v : next.data) v = Softplus(v);
        break;
    }
    if (cache) {
      cache->inputs[i] = std::move(cur);
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

std::vector<LayerGrad> Backward(const Network& net, const ForwardCache& cache,
                                const Tensor2D& dy, Tensor2D* input_grad) {
  if (cache.inputs.size() != net.size()) {
    Fail(ErrorCode::kUsage, "forward cache does not match network");
  }
  std::vector<LayerGrad> grads(net.size());
  Tensor2D g = dy;
  for (std::size_t idx = net.size(); idx-- > 0;) {
    const LayerParams& p = net[idx];
    const Tensor2D& in = cache.inputs[idx];
    const std::size_t batch = in.rows;
    Tensor2D prev;
    switch (p.type) {
      case LayerType::kDense: {
        if (g.rows != batch || g.cols != static_cast<std::size_t>(p.out)) {
          Fail(ErrorCode::kShapeMismatch,
               LayerLabel(idx, p.type) + ": upstream gradient shape mismatch");
        }
        LayerGrad& lg = grads[idx];
        const RowMajor gy = Owned(g.data, batch, p.out);
        const RowMajor gw = Owned(in.data, batch, p.in).transpose() * gy;
        Store(gw, lg.weights);
        lg.biases = ColumnSums(g.data, p.out);
        const RowMajor gx = gy * Owned(p.weights, p.in, p.out).transpose();
        prev = Tensor2D(batch, p.in);
        Store(gx, prev.data);
        break;
      }
      case LayerType::kConv1D: {
        const Tensor2D& cols = cache.columns[idx];
        const std::size_t patch = static_cast<std::size_t>(p.kernel) * p.in;
        const std::size_t rows = cols.rows;
        const std::size_t out_len = rows / batch;
        if (g.data.size() != rows * p.out) {
          Fail(ErrorCode::kShapeMismatch,
               LayerLabel(idx, p.type) + ": upstream gradient shape mismatch");
        }
        LayerGrad& lg = grads[idx];
        const RowMajor gy = Owned(g.data, rows, p.out);
        const RowMajor gw = Owned(cols.data, rows, patch).transpose() * gy;
        Store(gw, lg.weights);
        lg.biases = ColumnSums(g.data, p.out);
        const RowMajor dcols = gy * Owned(p.weights, patch, p.out).transpose();
        prev = Tensor2D(batch, in.cols);
        for (std::size_t b = 0; b < batch; ++b) {
          double* dst = prev.data.data() + b * in.cols;
          for (std::size_t q = 0; q < out_len; ++q) {
            const double* src = dcols.data() + (b * out_len + q) * patch;
            double* at = dst + q * p.stride * p.in;
            for (std::size_t k = 0; k < patch; ++k) at[k] += src[k];
          }
        }
        break;
      }
      case LayerType::kRelu:
        prev = std::move(g);
        for (std::size_t k = 0; k < prev.data.size(); ++k) {
          if (!(in.data[k] > 0)) prev.data[k] = 0.0;
        }
        break;
      case LayerType::kFlatten:
        prev = std::move(g);
        break;
      case LayerType::kDropout: {
        prev = std::move(g);
        const auto& mask = cache.masks[idx];
        if (!mask.empty()) {
          for (std::size_t k = 0; k < prev.data.size(); ++k) prev.data[k] *= mask[k];
        }
        break;
      }
      case LayerType::kSoftplus:
        prev = std::move(g);
        for (std::size_t k = 0; k < prev.data.size(); ++k) {
          prev.data[k] *= Sigmoid(in.data[k]);
        }
        break;
    }
    g = std::move(prev);
  }
  if (input_grad) *input_grad = std::move(g);
  return grads;
}

// ---------------------------------------------------------------------------

StandardScaler StandardScaler::Fit(const Tensor2D& x) {
  if (x.rows == 0 || x.cols == 0) {
    Fail(ErrorCode::kEmptyInput, "cannot fit a scaler on empty data");
  }
  StandardScaler s;
  s.means.assign(x.cols, 0.0);
  s.stds.assign(x.cols, 1.0);
  s.constant.assign(x.cols, false);
  for (std::size_t c = 0; c < x.cols; ++c) {
    double sum = 0;
    for (std::size_t r = 0; r < x.rows; ++r) sum += x(r, c);
    const double mean = sum / x.rows;
    double sq = 0;
    for (std::size_t r = 0; r < x.rows; ++r) {
      const double d = x(r, c) - mean;
      sq += d * d;
    }
    const double sd = std::sqrt(sq / x.rows);
    s.means[c] = mean;
    if (sd > 0 && std::isfinite(sd)) {
      s.stds[c] = sd;
    } else {
      s.constant[c] = true;
    }
  }
  return s;
}

void StandardScaler::TransformRow(std::span<const double> in,
                                  std::span<double> out) const {
  if (in.size() != means.size() || out.size() != means.size()) {
    Fail(ErrorCode::kLayoutMismatch,
         "scaler fitted on " + std::to_string(means.size()) +
             " columns, got " + std::to_string(in.size()));
  }
  for (std::size_t c = 0; c < in.size(); ++c) out[c] = (in[c] - means[c]) / stds[c];
}

Tensor2D StandardScaler::Transform(const Tensor2D& x) const {
  if (x.cols != means.size()) {
    Fail(ErrorCode::kLayoutMismatch,
         "scaler fitted on " + std::to_string(means.size()) +
             " columns, got " + std::to_string(x.cols));
  }
  Tensor2D out(x.rows, x.cols);
  for (std::size_t r = 0; r < x.rows; ++r) TransformRow(x.row(r), out.row(r));
  return out;
}

Tensor2D StandardScaler::Inverse(const Tensor2D& x) const {
  if (x.cols != means.size()) {
    Fail(ErrorCode::kLayoutMismatch,
         "scaler fitted on " + std::to_string(means.size()) +
             " columns, got " + std::to_string(x.cols));
  }
  Tensor2D out(x.rows, x.cols);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < x.cols; ++c) {
      out(r, c) = x(r, c) * stds[c] + means[c];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void CheckLossInputs(std::span<const double> y_hat, std::span<const double> y) {
  if (y_hat.size() != y.size()) {
    Fail(ErrorCode::kShapeMismatch, "loss: prediction and target lengths differ");
  }
  if (y.empty()) Fail(ErrorCode::kEmptyInput, "loss: empty input");
  for (double v : y_hat) {
    if (!(v > -1.0)) Fail(ErrorCode::kDomain, "loss: prediction <= -1");
  }
}

}  // namespace

LossResult MapleLoss(std::span<const double> y_hat, std::span<const double> y) {
  CheckLossInputs(y_hat, y);
  for (double v : y) {
    if (!(v > 0.0)) Fail(ErrorCode::kDomain, "MAPLE requires strictly positive targets");
  }
  const double n = static_cast<double>(y.size());
  LossResult r;
  r.grad.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double ly = std::log1p(y[i]);
    const double diff = std::log1p(y_hat[i]) - ly;
    r.loss += std::abs(diff / ly);
    const double sign = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
    r.grad[i] = sign / (n * ly * (1.0 + y_hat[i]));
  }
  r.loss /= n;
  return r;
}

LossResult MsleLoss(std::span<const double> y_hat, std::span<const double> y) {
  CheckLossInputs(y_hat, y);
  for (double v : y) {
    if (!(v >= 0.0)) Fail(ErrorCode::kDomain, "MSLE requires non-negative targets");
  }
  const double n = static_cast<double>(y.size());
  LossResult r;
  r.grad.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double diff = std::log1p(y_hat[i]) - std::log1p(y[i]);
    r.loss += diff * diff;
    r.grad[i] = 2.0 * diff / (n * (1.0 + y_hat[i]));
  }
  r.loss /= n;
  return r;
}

// ---------------------------------------------------------------------------

AdamState AdamState::For(const Network& net) {
  AdamState s;
  for (const auto& p : net) {
    if (!p.has_params()) continue;
    s.m.emplace_back(p.weights.size(), 0.0);
    s.v.emplace_back(p.weights.size(), 0.0);
    s.m.emplace_back(p.biases.size(), 0.0);
    s.v.emplace_back(p.biases.size(), 0.0);
  }
  return s;
}

void AdamStep(Network& net, const std::vector<LayerGrad>& grads,
              AdamState& state, double lr) {
  if (grads.size() != net.size()) {
    Fail(ErrorCode::kUsage, "adam: gradient list does not match network");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, double(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, double(state.step));
  std::size_t slot = 0;
  auto update = [&](std::vector<double>& theta, const std::vector<double>& g) {
    if (slot + 1 > state.m.size() || state.m[slot].size() != theta.size() ||
        g.size() != theta.size()) {
      Fail(ErrorCode::kUsage, "adam: parameter/gradient shape mismatch");
    }
    auto& m = state.m[slot];
    auto& v = state.v[slot];
    for (std::size_t k = 0; k < theta.size(); ++k) {
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      theta[k] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
    ++slot;
  };
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (!net[i].has_params()) continue;
    update(net[i].weights, grads[i].weights);
    update(net[i].biases, grads[i].biases);
  }
}

}  // namespace latency_atlas::nn
