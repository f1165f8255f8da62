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

#ifndef LATENCY_ATLAS_METRICS_HPP_
#define LATENCY_ATLAS_METRICS_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "latency_atlas/bench.hpp"
#include "latency_atlas/models.hpp"

namespace latency_atlas {

// All four need equal, non-zero lengths (kShapeMismatch / kEmptyInput).
// Mape fails with kDomain on a zero target, R2 on a constant target.
double Mape(std::span<const double> y_hat, std::span<const double> y);  // percent
double Mae(std::span<const double> y_hat, std::span<const double> y);
double Rmse(std::span<const double> y_hat, std::span<const double> y);
double R2(std::span<const double> y_hat, std::span<const double> y);

struct MetricSet {
  std::size_t n = 0;
  double mape_percent = 0;
  double mae_ms = 0;
  double rmse_ms = 0;
  // Empty when the target is constant; r_squared_note then says why.
  std::optional<double> r_squared;
  std::string r_squared_note;
};

MetricSet ComputeMetrics(std::span<const double> y_hat, std::span<const double> y);

struct PhaseRow {
  LayerKind kind = LayerKind::kConv2D;
  Phase phase = Phase::kExe;
  MetricSet metrics;
};

struct EvalReport {
  Task task = Task::kInference;
  Mode mode = Mode::kPerDevice;
  std::vector<PhaseRow> rows;             // one per (kind, phase) with data
  std::vector<LayerKind> absent;          // kinds without test data
  std::map<Phase, MetricSet> by_phase;    // pooled over kinds
  std::map<LayerKind, MetricSet> by_kind; // pooled over phases
  MetricSet overall;
};

// Scores every phase model whose kind appears in `test`. Datasets must match
// the bundle's task and mode; each kind may appear at most once.
EvalReport EvaluateBundle(const PredictorBundle& bundle,
                          std::span<const Dataset> test);

nlohmann::json MetricSetToJson(const MetricSet& m);
nlohmann::json EvalReportToJson(const EvalReport& r);
std::string RenderEvalReport(const EvalReport& r);

}  // namespace latency_atlas

#endif  // LATENCY_ATLAS_METRICS_HPP_
