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

#include "latency_atlas/features.hpp"

#include "latency_atlas/error.hpp"

namespace latency_atlas {

namespace {

const std::vector<std::string>& SoftwareNames(LayerKind kind) {
  static const std::vector<std::string> kConv = {
      "batch_size", "matrix_size", "kernel_size", "channels_in",
      "channels_out", "strides", "padding", "activation", "bias"};
  static const std::vector<std::string> kPool = {
      "batch_size", "matrix_size", "channels_in", "strides",
      "padding", "activation", "pool_size"};
  static const std::vector<std::string> kDense = {
      "batch_size", "dim_input", "dim_output", "activation", "bias"};
  switch (kind) {
    case LayerKind::kConv2D: return kConv;
    case LayerKind::kPooling: return kPool;
    case LayerKind::kDense: return kDense;
  }
  return kDense;
}

const std::vector<std::string> kOptimizerNames = {"sgd", "adagrad", "rmsprop",
                                                  "adam"};
const std::vector<std::string> kHardwareNames = {
    "basic_clock_mhz", "cuda_cores", "memory_clock_mhz",
    "memory_bandwidth_gbs", "peak_tflops"};

double Flag(bool b) { return b ? 1.0 : 0.0; }

}  // namespace

std::string LayoutId::ToString() const {
  std::string s = std::string(latency_atlas::ToString(kind)) + "-" +
                  std::string(latency_atlas::ToString(task));
  if (mode == Mode::kUnseen) s += "-unseen";
  return s;
}

LayoutId LayoutId::Parse(std::string_view text) {
  for (LayerKind k : kAllLayerKinds) {
    for (Task t : {Task::kInference, Task::kTraining}) {
      for (Mode m : {Mode::kPerDevice, Mode::kUnseen}) {
        const LayoutId id{k, t, m};
        if (id.ToString() == text) return id;
      }
    }
  }
  Fail(ErrorCode::kParse, "unknown layout '" + std::string(text) + "'");
}

std::size_t LayoutWidth(LayoutId layout) {
  std::size_t n = SoftwareNames(layout.kind).size();
  if (layout.task == Task::kTraining) n += kOptimizerNames.size();
  if (layout.mode == Mode::kUnseen) n += kHardwareNames.size();
  return n;
}

std::vector<std::string> FeatureNames(LayoutId layout) {
  std::vector<std::string> names = SoftwareNames(layout.kind);
  if (layout.task == Task::kTraining) {
    names.insert(names.end(), kOptimizerNames.begin(), kOptimizerNames.end());
  }
  if (layout.mode == Mode::kUnseen) {
    names.insert(names.end(), kHardwareNames.begin(), kHardwareNames.end());
  }
  return names;
}

FeatureVector Featurize(const LayerSpec& l, const Scenario& scenario,
                        const std::optional<DeviceSpec>& device) {
  ValidateScenario(scenario);
  if (scenario.mode == Mode::kUnseen && !device) {
    Fail(ErrorCode::kUsage, "unseen-mode features require a device");
  }
  FeatureVector fv;
  fv.layout = LayoutId::For(l.kind, scenario);
  auto& v = fv.values;
  v.reserve(LayoutWidth(fv.layout));
  switch (l.kind) {
    case LayerKind::kConv2D:
      v = {double(l.batch_size), double(l.matrix_size), double(l.kernel_size),
           double(l.channels_in), double(l.channels_out), double(l.strides),
           double(static_cast<int>(l.padding)),
           double(static_cast<int>(l.activation)), Flag(l.use_bias)};
      break;
    case LayerKind::kPooling:
      v = {double(l.batch_size), double(l.matrix_size), double(l.channels_in),
           double(l.strides), double(static_cast<int>(l.padding)),
           double(static_cast<int>(l.activation)), double(l.pool_size)};
      break;
    case LayerKind::kDense:
      v = {double(l.batch_size), double(l.dim_input), double(l.dim_output),
           double(static_cast<int>(l.activation)), Flag(l.use_bias)};
      break;
  }
  if (scenario.task == Task::kTraining) {
    for (Optimizer o : kAllOptimizers) v.push_back(Flag(*scenario.optimizer == o));
  }
  if (scenario.mode == Mode::kUnseen) {
    v.push_back(device->basic_clock_mhz);
    v.push_back(device->cuda_cores);
    v.push_back(device->memory_clock_mhz);
    v.push_back(device->memory_bandwidth_gbs);
    v.push_back(device->peak_tflops);
  }
  return fv;
}

double DesignSpaceCardinality(LayoutId layout) {
  const double batch = ranges::kBatchSize.Size();
  const double binary = 2.0;
  double n = 0;
  switch (layout.kind) {
    case LayerKind::kConv2D:
      n = batch * ranges::kMatrixSize.Size() * ranges::kKernelSize.Size() *
          double(ranges::kChannels.Size()) * ranges::kChannels.Size() *
          ranges::kStrides.Size() * binary * binary * binary;
      break;
    case LayerKind::kPooling:
      n = batch * ranges::kMatrixSize.Size() * ranges::kChannels.Size() *
          ranges::kStrides.Size() * binary * binary *
          ranges::kPoolSize.Size();
      break;
    case LayerKind::kDense:
      n = batch * double(ranges::kDims.Size()) * ranges::kDims.Size() *
          binary * binary;
      break;
  }
  if (layout.task == Task::kTraining) n *= std::size(kAllOptimizers);
  return n;
}

}  // namespace latency_atlas
