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

#ifndef LATENCY_ATLAS_NETSPEC_HPP_
#define LATENCY_ATLAS_NETSPEC_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace latency_atlas {

enum class LayerKind { kConv2D, kPooling, kDense };
enum class Padding { kValid = 0, kSame = 1 };
enum class Activation { kNone = 0, kRelu = 1 };
enum class Task { kInference, kTraining };
enum class Mode { kPerDevice, kUnseen };
// Order matches the one-hot block of the training feature layouts.
enum class Optimizer { kSgd = 0, kAdagrad = 1, kRmsprop = 2, kAdam = 3 };

inline constexpr LayerKind kAllLayerKinds[] = {
    LayerKind::kConv2D, LayerKind::kPooling, LayerKind::kDense};
inline constexpr Optimizer kAllOptimizers[] = {
    Optimizer::kSgd, Optimizer::kAdagrad, Optimizer::kRmsprop,
    Optimizer::kAdam};

std::string_view ToString(LayerKind kind);
std::string_view ToString(Padding padding);
std::string_view ToString(Activation activation);
std::string_view ToString(Task task);
std::string_view ToString(Mode mode);
std::string_view ToString(Optimizer optimizer);

// Parsers accept the lowercase names produced by ToString. They throw
// Error(kUsage) on unknown names.
LayerKind ParseLayerKind(std::string_view text);
Task ParseTask(std::string_view text);
Mode ParseMode(std::string_view text);
Optimizer ParseOptimizer(std::string_view text);

// Inclusive integer range of one software feature.
struct FeatureRange {
  int lo;
  int hi;
  constexpr bool Contains(std::int64_t v) const { return v >= lo && v <= hi; }
  constexpr std::int64_t Size() const { return std::int64_t{hi} - lo + 1; }
};

namespace ranges {
inline constexpr FeatureRange kBatchSize{1, 64};
inline constexpr FeatureRange kMatrixSize{1, 512};
inline constexpr FeatureRange kKernelSize{1, 7};
inline constexpr FeatureRange kChannels{1, 9999};
inline constexpr FeatureRange kStrides{1, 4};
inline constexpr FeatureRange kDims{1, 4096};
inline constexpr FeatureRange kPoolSize{1, 7};
}  // namespace ranges

// One layer description. Fields that do not apply to `kind` are zero and are
// ignored by validation, featurization and comparison helpers.
struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  std::string name;
  int batch_size = 1;
  int matrix_size = 0;   // Conv2D, Pooling
  int kernel_size = 0;   // Conv2D
  int channels_in = 0;   // Conv2D, Pooling
  int channels_out = 0;  // Conv2D
  int strides = 1;       // Conv2D, Pooling
  Padding padding = Padding::kValid;
  Activation activation = Activation::kRelu;
  bool use_bias = true;  // Conv2D, Dense
  int dim_input = 0;     // Dense
  int dim_output = 0;    // Dense
  int pool_size = 0;     // Pooling

  bool operator==(const LayerSpec&) const = default;
};

LayerSpec MakeConv2D(int batch, int matrix, int kernel, int channels_in,
                     int channels_out, int strides = 1,
                     Padding padding = Padding::kValid,
                     Activation activation = Activation::kRelu,
                     bool use_bias = true);
LayerSpec MakePooling(int batch, int matrix, int channels, int pool_size,
                      int strides, Padding padding = Padding::kValid,
                      Activation activation = Activation::kNone);
LayerSpec MakeDense(int batch, int dim_input, int dim_output,
                    Activation activation = Activation::kRelu,
                    bool use_bias = true);

// Activation shape between layers. A flat vector has spatial == 0.
struct Shape {
  int spatial = 0;
  int depth = 0;

  static Shape Spatial(int size, int channels) { return {size, channels}; }
  static Shape Flat(int dim) { return {0, dim}; }
  bool flat() const { return spatial == 0; }
  std::int64_t elements() const {
    return flat() ? depth : std::int64_t{spatial} * spatial * depth;
  }
  // "32x32x1" or "120".
  std::string ToString() const;
  bool operator==(const Shape&) const = default;
};

// Shape a layer expects at its input, read from the layer's own fields.
Shape InputShapeOf(const LayerSpec& layer);

// Valid: floor((in - k) / stride) + 1; Same: ceil(in / stride); Dense:
// dim_output. Throws kInvalidGeometry when the result would be empty and
// kShapeMismatch when `input` is not consumable by the layer.
Shape InferOutputShape(const LayerSpec& layer, const Shape& input);

// Checks the feature ranges and geometry of one layer. `index` is only used to
// build the error message.
void ValidateLayer(const LayerSpec& layer, std::size_t index = 0);

struct DeviceSpec {
  std::string name;
  double basic_clock_mhz = 0;
  double cuda_cores = 0;
  double memory_clock_mhz = 0;
  double memory_bandwidth_gbs = 0;
  double peak_tflops = 0;

  bool operator==(const DeviceSpec&) const = default;
};

// Throws kValidation on non-positive values.
void ValidateDevice(const DeviceSpec& device);

// Human readable notes for every hardware feature outside the range covered by
// the reference devices. Extrapolating is allowed, so these are not errors.
std::vector<std::string> DeviceRangeWarnings(const DeviceSpec& device);

// P1000, P2000, P4000, P5000 and GTX1080Ti.
const std::vector<DeviceSpec>& ReferenceDevices();
// Looks up `name` (case-insensitive) in `devices`; throws kUsage if absent.
DeviceSpec FindDevice(std::string_view name,
                      const std::vector<DeviceSpec>& devices = ReferenceDevices());

nlohmann::json DeviceToJson(const DeviceSpec& device);
DeviceSpec DeviceFromJson(const nlohmann::json& j);
std::vector<DeviceSpec> LoadDeviceFile(const std::filesystem::path& path);
void SaveDeviceFile(const std::vector<DeviceSpec>& devices,
                    const std::filesystem::path& path);

struct Scenario {
  Task task = Task::kInference;
  Mode mode = Mode::kPerDevice;
  std::optional<Optimizer> optimizer;  // present iff task == kTraining

  static Scenario Inference(Mode mode = Mode::kPerDevice) {
    return {Task::kInference, mode, std::nullopt};
  }
  static Scenario Training(Optimizer opt, Mode mode = Mode::kPerDevice) {
    return {Task::kTraining, mode, opt};
  }
  bool operator==(const Scenario&) const = default;
};

void ValidateScenario(const Scenario& scenario);

struct NetworkSpec {
  std::string name;
  int batch_size = 1;
  std::vector<LayerSpec> layers;

  bool operator==(const NetworkSpec&) const = default;
};

inline constexpr int kNetworkFormatVersion = 1;

// Validates every layer and the adjacency invariant: each layer's input shape
// equals the previous layer's output shape (a dense layer after a spatial one
// consumes the flattened activation).
void ValidateNetwork(const NetworkSpec& net);

// Shape at the input of every layer followed by the final output shape
// (size layers + 1).
std::vector<Shape> ShapeChain(const NetworkSpec& net);

// Returns a copy with every layer's batch size replaced by `batch_size`.
NetworkSpec WithBatchSize(const NetworkSpec& net, int batch_size);

NetworkSpec ParseNetworkJson(const nlohmann::json& doc);
NetworkSpec ParseNetworkFile(const std::filesystem::path& path);
nlohmann::json NetworkToJson(const NetworkSpec& net);
void WriteNetworkFile(const NetworkSpec& net, const std::filesystem::path& path);

// Complete per-layer encoding including batch_size; used by suite manifests.
nlohmann::json LayerToJson(const LayerSpec& layer);
LayerSpec LayerFromJson(const nlohmann::json& j);

}  // namespace latency_atlas

#endif  // LATENCY_ATLAS_NETSPEC_HPP_
