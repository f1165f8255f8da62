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

#include "latency_atlas/compose.hpp"

#include <cstdio>

#include "latency_atlas/error.hpp"
#include "latency_atlas/features.hpp"

namespace latency_atlas {

using nlohmann::json;

LayerTimer BundleTimer(const PredictorBundle& bundle, const Scenario& scenario,
                       const std::optional<DeviceSpec>& device) {
  ValidateScenario(scenario);
  if (bundle.task != scenario.task) {
    Fail(ErrorCode::kUsage, "bundle was trained for " +
                                std::string(ToString(bundle.task)) +
                                " but the request is " +
                                std::string(ToString(scenario.task)));
  }
  if (bundle.mode != scenario.mode) {
    Fail(ErrorCode::kUsage, "bundle mode is " + std::string(ToString(bundle.mode)) +
                                ", request mode is " +
                                std::string(ToString(scenario.mode)));
  }
  if (scenario.mode == Mode::kUnseen && !device) {
    Fail(ErrorCode::kUsage, "unseen-device bundle needs a target device");
  }
  std::optional<DeviceSpec> target;
  if (scenario.mode == Mode::kUnseen) {
    ValidateDevice(*device);
    target = device;
  }
  return [&bundle, scenario, target](std::size_t, const LayerSpec& layer) {
    const FeatureVector fv = Featurize(layer, scenario, target);
    PhaseTimes t;
    t.pre = PredictPhase(bundle.Model(layer.kind, Phase::kPre), fv);
    t.exe = PredictPhase(bundle.Model(layer.kind, Phase::kExe), fv);
    t.post = PredictPhase(bundle.Model(layer.kind, Phase::kPost), fv);
    return t;
  };
}

PhaseBreakdown PredictSingleBatch(const NetworkSpec& net, const LayerTimer& timer) {
  ValidateNetwork(net);
  PhaseBreakdown b;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& layer = net.layers[i];
    b.layers.push_back({i, layer.name, layer.kind, timer(i, layer)});
  }
  // Only the first layer pays the host-to-device copy and only the last one
  // returns its result; everything in between stays on the device.
  double exe = 0;
  for (const auto& l : b.layers) exe += l.times.exe;
  b.total_ms = b.layers.front().times.pre + exe + b.layers.back().times.post;
  return b;
}

PhaseBreakdown PredictSingleBatch(const NetworkSpec& net,
                                  const PredictorBundle& bundle,
                                  const Scenario& scenario,
                                  const std::optional<DeviceSpec>& device) {
  return PredictSingleBatch(net, BundleTimer(bundle, scenario, device));
}

double NaiveSum(const PhaseBreakdown& breakdown) {
  double sum = 0;
  for (const auto& l : breakdown.layers) sum += l.times.pre + l.times.exe + l.times.post;
  return sum;
}

double NaiveSum(const NetworkSpec& net, const LayerTimer& timer) {
  return NaiveSum(PredictSingleBatch(net, timer));
}

double EpochTime(std::int64_t n, int batch_size, double batch_ms) {
  if (n < 1) Fail(ErrorCode::kUsage, "total data size must be >= 1");
  if (batch_size < 1) Fail(ErrorCode::kValidation, "batch size must be >= 1");
  const std::int64_t batches = (n + batch_size - 1) / batch_size;
  return static_cast<double>(batches) * batch_ms;
}

double PredictEpoch(const NetworkSpec& net, const LayerTimer& timer, std::int64_t n) {
  if (n < 1) Fail(ErrorCode::kUsage, "total data size must be >= 1");
  return EpochTime(n, net.batch_size, PredictSingleBatch(net, timer).total_ms);
}

json BreakdownToJson(const PhaseBreakdown& b) {
  json layers = json::array();
  for (const auto& l : b.layers) {
    layers.push_back({{"index", l.index},
                      {"name", l.name},
                      {"kind", ToString(l.kind)},
                      {"t_pre", l.times.pre},
                      {"t_exe", l.times.exe},
                      {"t_post", l.times.post}});
  }
  return json{{"layers", std::move(layers)},
              {"total_ms", b.total_ms},
              {"naive_sum_ms", NaiveSum(b)}};
}

std::string RenderBreakdown(const PhaseBreakdown& b) {
  std::size_t name_width = 5;
  for (const auto& l : b.layers) name_width = std::max(name_width, l.name.size());
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%3s  %-*s  %-7s  %10s  %10s  %10s\n", "#",
                static_cast<int>(name_width), "layer", "kind", "pre ms", "exe ms",
                "post ms");
  out += line;
  for (const auto& l : b.layers) {
    std::snprintf(line, sizeof(line), "%3zu  %-*s  %-7s  %10.4f  %10.4f  %10.4f\n",
                  l.index, static_cast<int>(name_width), l.name.c_str(),
                  std::string(ToString(l.kind)).c_str(), l.times.pre, l.times.exe,
                  l.times.post);
    out += line;
  }
  std::snprintf(line, sizeof(line), "composed total: %.4f ms\nnaive sum:      %.4f ms\n",
                b.total_ms, NaiveSum(b));
  out += line;
  return out;
}

}  // namespace latency_atlas
