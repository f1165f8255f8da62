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

#include "latency_atlas/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "latency_atlas/error.hpp"

namespace latency_atlas {

using nlohmann::json;

namespace {

void CheckPair(std::span<const double> y_hat, std::span<const double> y) {
  if (y_hat.size() != y.size()) {
    Fail(ErrorCode::kShapeMismatch, "prediction/target length mismatch: " +
                                        std::to_string(y_hat.size()) + " vs " +
                                        std::to_string(y.size()));
  }
  if (y.empty()) Fail(ErrorCode::kEmptyInput, "metrics need at least one sample");
}

bool IsConstant(std::span<const double> y) {
  for (double v : y) {
    if (v != y.front()) return false;
  }
  return true;
}

}  // namespace

double Mape(std::span<const double> y_hat, std::span<const double> y) {
  CheckPair(y_hat, y);
  double sum = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0) Fail(ErrorCode::kDomain, "MAPE undefined for a zero target");
    sum += std::abs((y_hat[i] - y[i]) / y[i]);
  }
  return 100.0 * sum / static_cast<double>(y.size());
}

double Mae(std::span<const double> y_hat, std::span<const double> y) {
  CheckPair(y_hat, y);
  double sum = 0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += std::abs(y_hat[i] - y[i]);
  return sum / static_cast<double>(y.size());
}

double Rmse(std::span<const double> y_hat, std::span<const double> y) {
  CheckPair(y_hat, y);
  double sum = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y_hat[i] - y[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(y.size()));
}

double R2(std::span<const double> y_hat, std::span<const double> y) {
  CheckPair(y_hat, y);
  if (IsConstant(y)) Fail(ErrorCode::kDomain, "R2 undefined for a constant target");
  double mean = 0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y_hat[i] - y[i]) * (y_hat[i] - y[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  return 1.0 - ss_res / ss_tot;
}

MetricSet ComputeMetrics(std::span<const double> y_hat, std::span<const double> y) {
  MetricSet m;
  m.n = y.size();
  m.mape_percent = Mape(y_hat, y);
  m.mae_ms = Mae(y_hat, y);
  m.rmse_ms = Rmse(y_hat, y);
  if (IsConstant(y)) {
    m.r_squared_note = "constant target";
  } else {
    m.r_squared = R2(y_hat, y);
  }
  return m;
}

EvalReport EvaluateBundle(const PredictorBundle& bundle,
                          std::span<const Dataset> test) {
  ValidateBundle(bundle);
  if (test.empty()) Fail(ErrorCode::kEmptyInput, "no test data");
  EvalReport report;
  report.task = bundle.task;
  report.mode = bundle.mode;

  struct Pool {
    std::vector<double> y_hat, y;
    void Add(const std::vector<double>& p, const std::vector<double>& t) {
      y_hat.insert(y_hat.end(), p.begin(), p.end());
      y.insert(y.end(), t.begin(), t.end());
    }
  };
  std::map<Phase, Pool> phase_pool;
  std::map<LayerKind, Pool> kind_pool;
  Pool all;
  std::map<LayerKind, bool> seen;

  for (const Dataset& ds : test) {
    const LayoutId want{ds.layout.kind, bundle.task, bundle.mode};
    if (ds.layout != want) {
      std::string expected, found;
      for (const auto& n : FeatureNames(want)) expected += (expected.empty() ? "" : ",") + n;
      for (const auto& n : FeatureNames(ds.layout)) found += (found.empty() ? "" : ",") + n;
      Fail(ErrorCode::kLayoutMismatch,
           "test data layout " + ds.layout.ToString() + " does not match bundle layout " +
               want.ToString() + "; expected columns [" + expected + "], found [" +
               found + "]");
    }
    if (ds.samples.empty()) {
      Fail(ErrorCode::kEmptyInput, "test dataset for " + want.ToString() + " is empty");
    }
    if (seen[ds.layout.kind]) {
      Fail(ErrorCode::kUsage, "more than one test dataset for " + ds.layout.ToString());
    }
    seen[ds.layout.kind] = true;
    for (Phase phase : kAllPhases) {
      const auto pred = PredictPhase(bundle.Model(ds.layout.kind, phase), ds.samples);
      std::vector<double> truth;
      truth.reserve(ds.samples.size());
      for (const auto& s : ds.samples) truth.push_back(PhaseValue(s.times, phase));
      report.rows.push_back({ds.layout.kind, phase, ComputeMetrics(pred, truth)});
      phase_pool[phase].Add(pred, truth);
      kind_pool[ds.layout.kind].Add(pred, truth);
      all.Add(pred, truth);
    }
  }
  for (LayerKind kind : kAllLayerKinds) {
    if (!seen[kind]) report.absent.push_back(kind);
  }
  for (auto& [phase, p] : phase_pool) report.by_phase[phase] = ComputeMetrics(p.y_hat, p.y);
  for (auto& [kind, p] : kind_pool) report.by_kind[kind] = ComputeMetrics(p.y_hat, p.y);
  report.overall = ComputeMetrics(all.y_hat, all.y);
  return report;
}

json MetricSetToJson(const MetricSet& m) {
  json j{{"n", m.n},
         {"mape_percent", m.mape_percent},
         {"mae_ms", m.mae_ms},
         {"rmse_ms", m.rmse_ms}};
  j["r_squared"] = m.r_squared ? json(*m.r_squared) : json(nullptr);
  if (!m.r_squared_note.empty()) j["r_squared_note"] = m.r_squared_note;
  return j;
}

json EvalReportToJson(const EvalReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json j = MetricSetToJson(row.metrics);
    j["kind"] = ToString(row.kind);
    j["phase"] = ToString(row.phase);
    rows.push_back(std::move(j));
  }
  json absent = json::array();
  for (LayerKind k : r.absent) absent.push_back(ToString(k));
  json by_phase = json::object();
  for (const auto& [p, m] : r.by_phase) by_phase[std::string(ToString(p))] = MetricSetToJson(m);
  json by_kind = json::object();
  for (const auto& [k, m] : r.by_kind) by_kind[std::string(ToString(k))] = MetricSetToJson(m);
  return json{{"task", ToString(r.task)},
              {"mode", ToString(r.mode)},
              {"rows", std::move(rows)},
              {"absent", std::move(absent)},
              {"by_phase", std::move(by_phase)},
              {"by_kind", std::move(by_kind)},
              {"overall", MetricSetToJson(r.overall)}};
}

std::string RenderEvalReport(const EvalReport& r) {
  std::string out;
  char line[256];
  auto row = [&](const std::string& label, const MetricSet& m) {
    char r2[32];
    if (m.r_squared) std::snprintf(r2, sizeof(r2), "%8.4f", *m.r_squared);
    else std::snprintf(r2, sizeof(r2), "%8s", "n/a");
    std::snprintf(line, sizeof(line), "%-16s %8zu %9.2f %11.5f %11.5f %s\n",
                  label.c_str(), m.n, m.mape_percent, m.mae_ms, m.rmse_ms, r2);
    out += line;
  };
  std::snprintf(line, sizeof(line), "%-16s %8s %9s %11s %11s %8s\n", "layer/phase", "n",
                "MAPE %", "MAE ms", "RMSE ms", "R2");
  out += line;
  for (const auto& r0 : r.rows) {
    row(std::string(ToString(r0.kind)) + "/" + std::string(ToString(r0.phase)), r0.metrics);
  }
  for (LayerKind k : r.absent) {
    std::snprintf(line, sizeof(line), "%-16s %8s\n", std::string(ToString(k)).c_str(),
                  "absent");
    out += line;
  }
  for (const auto& [p, m] : r.by_phase) row("all/" + std::string(ToString(p)), m);
  row("overall", r.overall);
  return out;
}

}  // namespace latency_atlas
