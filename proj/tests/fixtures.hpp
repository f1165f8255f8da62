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

#ifndef LATENCY_ATLAS_TESTS_FIXTURES_HPP_
#define LATENCY_ATLAS_TESTS_FIXTURES_HPP_

// Shared by the unit tests and the acceptance binary (no gtest dependency).

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <string>

#include "latency_atlas/bench.hpp"
#include "latency_atlas/models.hpp"
#include "latency_atlas/netspec.hpp"

namespace latency_atlas::test {

inline std::filesystem::path DataPath(const std::string& rel) {
  return std::filesystem::path(LATENCY_ATLAS_SOURCE_DIR) / "data" / rel;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("latency_atlas_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline NetworkSpec LeNet5(int batch = 1) {
  NetworkSpec net;
  net.name = "LeNet-5";
  net.batch_size = batch;
  auto add = [&](LayerSpec l, const char* name) {
    l.name = name;
    net.layers.push_back(l);
  };
  add(MakeConv2D(batch, 32, 5, 1, 6), "Conv1");
  add(MakePooling(batch, 28, 6, 2, 2), "Pool1");
  add(MakeConv2D(batch, 14, 5, 6, 16), "Conv2");
  add(MakePooling(batch, 10, 16, 2, 2), "Pool2");
  add(MakeDense(batch, 400, 120), "Fc1");
  add(MakeDense(batch, 120, 84), "Fc2");
  add(MakeDense(batch, 84, 10, Activation::kNone), "Out");
  return net;
}

inline double SoftplusInverse(double c) { return std::log(std::expm1(c)); }

// A model whose prediction is `value` for every input.
inline PhaseModel ConstantModel(LayoutId layout, Phase phase, double value) {
  const std::size_t width = LayoutWidth(layout);
  PhaseModel m;
  m.architecture = Architecture::kPerfNet;
  m.loss = LossKind::kMaple;
  m.layout = layout;
  m.phase = phase;
  m.scaler.means.assign(width, 0.0);
  m.scaler.stds.assign(width, 1.0);
  m.scaler.constant.assign(width, false);
  nn::LayerParams out = nn::LayerParams::Dense(static_cast<int>(width), 1);
  std::fill(out.weights.begin(), out.weights.end(), 0.0);
  out.biases = {SoftplusInverse(value)};
  m.net = {out, nn::LayerParams::Softplus()};
  return m;
}

// values[kind][phase]; inference, per-device on P1000.
inline PredictorBundle StubBundle(const std::map<LayerKind, PhaseTimes>& values) {
  PredictorBundle b;
  b.task = Task::kInference;
  b.mode = Mode::kPerDevice;
  b.device = FindDevice("P1000");
  for (const auto& [kind, t] : values) {
    const LayoutId layout{kind, b.task, b.mode};
    b.models[{kind, Phase::kPre}] = ConstantModel(layout, Phase::kPre, t.pre);
    b.models[{kind, Phase::kExe}] = ConstantModel(layout, Phase::kExe, t.exe);
    b.models[{kind, Phase::kPost}] = ConstantModel(layout, Phase::kPost, t.post);
  }
  return b;
}

// Phase values whose LeNet-5 composition gives conv1 pre 0.145, total exe
// 0.340 and out post 0.051, i.e. 0.536 ms.
inline std::map<LayerKind, PhaseTimes> LeNetStubValues() {
  return {{LayerKind::kConv2D, {0.145, 0.069, 0.2}},
          {LayerKind::kPooling, {0.3, 0.035, 0.1}},
          {LayerKind::kDense, {0.25, 0.044, 0.051}}};
}

// Oracle dataset for one kind and scenario.
inline Dataset OracleDataset(LayerKind kind, const Scenario& scenario, int count,
                             std::uint64_t seed, const DeviceSpec& device,
                             double noise_cv = 0.0, int repeats = 1) {
  Dataset ds;
  ds.layout = LayoutId::For(kind, scenario);
  ds.device_names = {device.name};
  const auto suite = GenerateSuite(kind, scenario, count, seed);
  ds.samples = MeasureSuite(suite, device, OracleProfile{}, seed + 1, noise_cv, repeats, 1);
  return ds;
}

}  // namespace latency_atlas::test

#endif  // LATENCY_ATLAS_TESTS_FIXTURES_HPP_
