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

#ifndef LATENCY_ATLAS_FEATURES_HPP_
#define LATENCY_ATLAS_FEATURES_HPP_

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "latency_atlas/netspec.hpp"

namespace latency_atlas {

// Identifies one fixed feature layout: (layer kind x task x mode).
//
// Column order is a compatibility contract; serialized models and datasets
// depend on it. Per kind:
//   conv2d : batch_size matrix_size kernel_size channels_in channels_out
//            strides padding activation bias
//   pooling: batch_size matrix_size channels_in strides padding activation
//            pool_size
//   dense  : batch_size dim_input dim_output activation bias
// Training layouts append the one-hot optimizer block
//   sgd adagrad rmsprop adam
// and unseen layouts then append the hardware block
//   basic_clock_mhz cuda_cores memory_clock_mhz memory_bandwidth_gbs
//   peak_tflops
struct LayoutId {
  LayerKind kind = LayerKind::kConv2D;
  Task task = Task::kInference;
  Mode mode = Mode::kPerDevice;

  static LayoutId For(LayerKind kind, const Scenario& scenario) {
    return {kind, scenario.task, scenario.mode};
  }
  // e.g. "conv2d-inference", "dense-training-unseen".
  std::string ToString() const;
  static LayoutId Parse(std::string_view text);

  auto operator<=>(const LayoutId&) const = default;
};

std::size_t LayoutWidth(LayoutId layout);
std::vector<std::string> FeatureNames(LayoutId layout);

struct FeatureVector {
  LayoutId layout;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

// Requires `device` iff scenario.mode is unseen and an optimizer iff the task
// is training. Throws kUsage otherwise.
FeatureVector Featurize(const LayerSpec& layer, const Scenario& scenario,
                        const std::optional<DeviceSpec>& device = std::nullopt);

// Number of distinct software feature combinations in a layout (the hardware
// block is continuous and excluded).
double DesignSpaceCardinality(LayoutId layout);

}  // namespace latency_atlas

#endif  // LATENCY_ATLAS_FEATURES_HPP_
