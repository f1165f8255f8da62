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

#include <gtest/gtest.h>

#include <random>

#include "latency_atlas/metrics.hpp"
#include "test_util.hpp"

namespace latency_atlas {
namespace {

using V = std::vector<double>;

TEST(MetricsTest, HandExamples) {
  const V y = {100, 100}, yh = {110, 90};
  EXPECT_DOUBLE_EQ(Mape(yh, y), 10.0);
  EXPECT_DOUBLE_EQ(Mae(yh, y), 10.0);
  EXPECT_DOUBLE_EQ(Rmse(yh, y), 10.0);
  const V t = {1, 2, 3};
  EXPECT_DOUBLE_EQ(R2(t, t), 1.0);
  EXPECT_DOUBLE_EQ(R2(V{2, 2, 2}, t), 0.0);
  EXPECT_DOUBLE_EQ(Rmse(V{1, 2, 7}, t), std::sqrt(16.0 / 3));
  EXPECT_DOUBLE_EQ(R2(V{1, 2, 7}, t), 1.0 - 16.0 / 2.0);
}

TEST(MetricsTest, Errors) {
  EXPECT_THROW_CODE(Mape(V{1}, V{0}), ErrorCode::kDomain);
  EXPECT_THROW_CODE(Mae(V{1, 2}, V{1}), ErrorCode::kShapeMismatch);
  EXPECT_THROW_CODE(Rmse(V{}, V{}), ErrorCode::kEmptyInput);
  EXPECT_THROW_CODE(R2(V{1, 2}, V{3, 3}), ErrorCode::kDomain);
}

TEST(MetricsTest, PerfectPredictionProperties) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 100);
  for (int trial = 0; trial < 50; ++trial) {
    V y(20);
    for (double& v : y) v = u(rng);
    EXPECT_EQ(Mape(y, y), 0.0);
    EXPECT_EQ(Mae(y, y), 0.0);
    EXPECT_EQ(Rmse(y, y), 0.0);
    EXPECT_EQ(R2(y, y), 1.0);
    V yh = y;
    for (double& v : yh) v *= 1.0 + (u(rng) - 50) / 500;
    EXPECT_LE(Mae(yh, y), Rmse(yh, y) + 1e-12);
    EXPECT_LE(R2(yh, y), 1.0);
  }
}

TEST(MetricsTest, ConstantTargetLeavesRSquaredEmpty) {
  const MetricSet m = ComputeMetrics(V{1, 2, 3}, V{2, 2, 2});
  EXPECT_FALSE(m.r_squared);
  EXPECT_EQ(m.r_squared_note, "constant target");
  EXPECT_EQ(m.n, 3u);
  EXPECT_DOUBLE_EQ(m.mae_ms, 2.0 / 3);
  const auto j = MetricSetToJson(m);
  EXPECT_TRUE(j["r_squared"].is_null());
}

TEST(MetricsTest, EvaluateStubBundleOnOracleData) {
  const PhaseTimes conv{0.145, 0.069, 0.2};
  const PredictorBundle b = test::StubBundle({{LayerKind::kConv2D, conv},
                                              {LayerKind::kPooling, {1, 1, 1}},
                                              {LayerKind::kDense, {1, 1, 1}}});
  Dataset ds = test::OracleDataset(LayerKind::kConv2D, Scenario::Inference(), 10, 1,
                                   FindDevice("P1000"));
  for (auto& s : ds.samples) s.times = {0.145 * 2, 0.069, 0.2};
  const EvalReport r = EvaluateBundle(b, std::vector<Dataset>{ds});
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.absent, (std::vector<LayerKind>{LayerKind::kPooling, LayerKind::kDense}));
  EXPECT_NEAR(r.rows[0].metrics.mape_percent, 50.0, 1e-6);
  EXPECT_NEAR(r.rows[1].metrics.mape_percent, 0.0, 1e-6);
  EXPECT_EQ(r.overall.n, 30u);
  EXPECT_NEAR(r.overall.mape_percent, 50.0 / 3, 1e-6);
  EXPECT_NE(RenderEvalReport(r).find("conv2d"), std::string::npos);
  EXPECT_EQ(EvalReportToJson(r)["rows"].size(), 3u);
}

TEST(MetricsTest, EvaluateRejectsWrongLayout) {
  const PredictorBundle b = test::StubBundle(test::LeNetStubValues());
  const Dataset ds = test::OracleDataset(LayerKind::kDense, Scenario::Training(Optimizer::kSgd), 5,
                                         1, FindDevice("P1000"));
  try {
    EvaluateBundle(b, std::vector<Dataset>{ds});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLayoutMismatch);
    EXPECT_NE(std::string(e.what()).find("sgd"), std::string::npos) << e.what();
  }
  const Dataset inf = test::OracleDataset(LayerKind::kDense, Scenario::Inference(), 5, 1,
                                          FindDevice("P1000"));
  EXPECT_THROW_CODE(EvaluateBundle(b, std::vector<Dataset>{inf, inf}), ErrorCode::kUsage);
}

}  // namespace
}  // namespace latency_atlas
