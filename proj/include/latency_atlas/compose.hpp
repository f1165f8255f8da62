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

#ifndef LATENCY_ATLAS_COMPOSE_HPP_
#define LATENCY_ATLAS_COMPOSE_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "latency_atlas/bench.hpp"
#include "latency_atlas/models.hpp"
#include "latency_atlas/netspec.hpp"

namespace latency_atlas {

// Supplies the three phase times of layer `index` of a network. Bundles are
// adapted with BundleTimer; tests plug in stubs.
using LayerTimer = std::function<PhaseTimes(std::size_t index, const LayerSpec& layer)>;

// Featurizes each layer for `scenario` and queries the bundle's models.
// Checks task, mode and device agreement up front (kUsage).
LayerTimer BundleTimer(const PredictorBundle& bundle, const Scenario& scenario,
                       const std::optional<DeviceSpec>& device);

struct LayerBreakdown {
  std::size_t index = 0;
  std::string name;
  LayerKind kind = LayerKind::kConv2D;
  PhaseTimes times;
};

struct PhaseBreakdown {
  std::vector<LayerBreakdown> layers;
  // t_pre(first) + sum t_exe + t_post(last)
  double total_ms = 0;
};

PhaseBreakdown PredictSingleBatch(const NetworkSpec& net, const LayerTimer& timer);
PhaseBreakdown PredictSingleBatch(const NetworkSpec& net,
                                  const PredictorBundle& bundle,
                                  const Scenario& scenario,
                                  const std::optional<DeviceSpec>& device);

// Sum of every layer's pre + exe + post. Comparison baseline only.
double NaiveSum(const PhaseBreakdown& breakdown);
double NaiveSum(const NetworkSpec& net, const LayerTimer& timer);

// ceil(n / net.batch_size) batches of `batch_ms`.
double EpochTime(std::int64_t n, int batch_size, double batch_ms);
double PredictEpoch(const NetworkSpec& net, const LayerTimer& timer, std::int64_t n);

nlohmann::json BreakdownToJson(const PhaseBreakdown& b);
// Aligned text table: one row per layer, then the composed and naive totals.
std::string RenderBreakdown(const PhaseBreakdown& b);

}  // namespace latency_atlas

#endif  // LATENCY_ATLAS_COMPOSE_HPP_
