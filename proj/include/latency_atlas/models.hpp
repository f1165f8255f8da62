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

#ifndef LATENCY_ATLAS_MODELS_HPP_
#define LATENCY_ATLAS_MODELS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "latency_atlas/bench.hpp"
#include "latency_atlas/features.hpp"
#include "latency_atlas/netspec.hpp"
#include "latency_atlas/nn.hpp"

namespace latency_atlas {

enum class Architecture { kPerfNet, kPerfNetV2 };
enum class Phase { kPre = 0, kExe = 1, kPost = 2 };
enum class LossKind { kMaple, kMsle };

inline constexpr Phase kAllPhases[] = {Phase::kPre, Phase::kExe, Phase::kPost};

std::string_view ToString(Architecture arch);
std::string_view ToString(Phase phase);
std::string_view ToString(LossKind loss);
Architecture ParseArchitecture(std::string_view text);
Phase ParsePhase(std::string_view text);
LossKind ParseLossKind(std::string_view text);

double PhaseValue(const PhaseTimes& t, Phase phase);

// The dense widths of both architectures live here so they can be overridden
// from the config file.
struct ArchitectureConfig {
  std::vector<int> perfnet_widths = {256, 128, 64, 32};
  std::vector<int> perfnetv2_widths = {256, 128, 64, 48, 32};
  int conv1_filters = 32;
  int conv1_kernel = 3;
  int conv2_filters = 128;
  int conv2_kernel = 2;
  double dropout = 0.3;

  bool operator==(const ArchitectureConfig&) const = default;
};

nlohmann::json ArchitectureConfigToJson(const ArchitectureConfig& c);
ArchitectureConfig ArchitectureConfigFromJson(const nlohmann::json& j);

// PerfNetV2: Conv1D(1->32,k3)+ReLU, Conv1D(32->128,k2)+ReLU, Flatten,
// Dense widths +ReLU each, Dropout, Dense(->1), Softplus.
// PerfNet: Dense widths +ReLU each, Dropout, Dense(->1), Softplus.
// Throws kShapeMismatch when the input is too narrow for the convolutions.
nn::Network BuildArchitecture(Architecture arch, std::size_t input_width,
                              const ArchitectureConfig& config = {});

// lr(e) = lr0 / 2^floor(e / halve_every)
struct TrainConfig {
  int epochs = 200;
  int batch_size = 128;
  double lr0 = 1e-3;
  int halve_every = 80;

  // 1000 epochs, halving every 400.
  static TrainConfig Full();
  double LearningRate(int epoch) const;
  bool operator==(const TrainConfig&) const = default;
};

nlohmann::json TrainConfigToJson(const TrainConfig& c);
TrainConfig TrainConfigFromJson(const nlohmann::json& j, TrainConfig base = {});

struct TrainingMeta {
  std::uint64_t seed = 0;
  int epochs = 0;
  double final_train_loss = 0;
  std::optional<double> final_validation_loss;

  bool operator==(const TrainingMeta&) const = default;
};

struct PhaseModel {
  Architecture architecture = Architecture::kPerfNetV2;
  LossKind loss = LossKind::kMaple;
  LayoutId layout;
  Phase phase = Phase::kExe;
  nn::StandardScaler scaler;
  nn::Network net;
  TrainingMeta meta;

  bool operator==(const PhaseModel&) const = default;
};

struct TrainOptions {
  ArchitectureConfig architecture;
  const Dataset* validation = nullptr;
  // Called after every epoch with the loss over the whole training set
  // (evaluated without dropout). Costs one extra forward pass per epoch.
  std::function<void(int epoch, double train_loss)> on_epoch;
};

// Fits the scaler on the training features, then runs seeded mini-batch Adam.
// MAPLE with a non-positive target fails with kDomain before any training.
PhaseModel TrainPhaseModel(const Dataset& train, Phase phase,
                           Architecture arch, LossKind loss,
                           const TrainConfig& config, std::uint64_t seed,
                           const TrainOptions& options = {});

// Loss of `model` on `ds` with dropout disabled.
double EvaluateLoss(const PhaseModel& model, const Dataset& ds);

// Throws kLayoutMismatch when fv.layout differs from the model's.
double PredictPhase(const PhaseModel& model, const FeatureVector& fv);
std::vector<double> PredictPhase(const PhaseModel& model,
                                 std::span<const TimingSample> samples);

inline constexpr int kBundleFormatVersion = 1;
inline constexpr std::string_view kDeterministicTimestamp =
    "1970-01-01T00:00:00Z";

// Nine phase models (3 kinds x 3 phases) sharing a task and mode. Per-device
// bundles name their device; unseen bundles list the pooled training devices.
struct PredictorBundle {
  int format_version = kBundleFormatVersion;
  Task task = Task::kInference;
  Mode mode = Mode::kPerDevice;
  std::optional<DeviceSpec> device;
  std::vector<DeviceSpec> pool;
  std::string created_at{kDeterministicTimestamp};
  std::map<std::pair<LayerKind, Phase>, PhaseModel> models;

  const PhaseModel& Model(LayerKind kind, Phase phase) const;
  bool operator==(const PredictorBundle&) const = default;
};

// Throws kValidation unless the bundle has all nine models with layouts that
// agree with its task and mode.
void ValidateBundle(const PredictorBundle& bundle);

struct BundleTrainOptions {
  Architecture architecture = Architecture::kPerfNetV2;
  LossKind loss = LossKind::kMaple;
  TrainConfig config;
  ArchitectureConfig arch_config;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
  // Optional held-out data per kind, for the validation loss in training_meta.
  std::map<LayerKind, const Dataset*> validation;
};

// One dataset per layer kind, all with the same task and mode. The nine models
// train concurrently; each run is deterministic in (seed, kind, phase).
PredictorBundle TrainBundle(const std::map<LayerKind, Dataset>& data,
                            const BundleTrainOptions& options,
                            std::optional<DeviceSpec> device,
                            std::vector<DeviceSpec> pool);

// Binary archive:
//   "LATBNDL\0" | u32 version | u64 manifest bytes | JSON manifest |
//   f64 blobs (little endian) | u32 crc32 of everything before it
// Load checks magic, then version (kVersion), then checksum (kChecksum).
void SaveBundle(const PredictorBundle& bundle, const std::filesystem::path& path);
PredictorBundle LoadBundle(const std::filesystem::path& path);
std::string SerializeBundle(const PredictorBundle& bundle);
PredictorBundle DeserializeBundle(std::string_view bytes,
                                  const std::string& source = "<memory>");

// Human-readable summary of a bundle's manifest (no weights).
nlohmann::json BundleSummary(const PredictorBundle& bundle);

}  // namespace latency_atlas

#endif  // LATENCY_ATLAS_MODELS_HPP_
