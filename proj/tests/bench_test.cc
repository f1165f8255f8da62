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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "latency_atlas/bench.hpp"
#include "test_util.hpp"

namespace latency_atlas {
namespace {

TEST(BenchTest, SuiteIsDeterministicAndValid) {
  const auto a = GenerateSuite(LayerKind::kConv2D, Scenario::Inference(), 500, 7);
  const auto b = GenerateSuite(LayerKind::kConv2D, Scenario::Inference(), 500, 7);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, GenerateSuite(LayerKind::kConv2D, Scenario::Inference(), 500, 8));
  for (const auto& m : a) EXPECT_NO_THROW(ValidateLayer(m.layer));
  EXPECT_EQ(a.front().id, 0);
  EXPECT_EQ(a.back().id, 499);
}

TEST(BenchTest, SuiteCoversRanges) {
  const auto s = GenerateSuite(LayerKind::kPooling, Scenario::Inference(), 3000, 1);
  int max_pool = 0, min_pool = 99, same = 0;
  for (const auto& m : s) {
    max_pool = std::max(max_pool, m.layer.pool_size);
    min_pool = std::min(min_pool, m.layer.pool_size);
    same += m.layer.padding == Padding::kSame;
  }
  EXPECT_EQ(min_pool, 1);
  EXPECT_EQ(max_pool, 7);
  EXPECT_GT(same, 1200);
  EXPECT_LT(same, 1800);
}

TEST(BenchTest, TrainingSuiteDrawsOptimizers) {
  const auto s = GenerateSuite(LayerKind::kDense, {Task::kTraining, Mode::kPerDevice, std::nullopt},
                               400, 3);
  std::array<int, 4> counts{};
  for (const auto& m : s) {
    ASSERT_TRUE(m.scenario.optimizer);
    ++counts[static_cast<int>(*m.scenario.optimizer)];
  }
  for (int c : counts) EXPECT_GT(c, 50);
  const auto fixed = GenerateSuite(LayerKind::kDense, Scenario::Training(Optimizer::kAdam), 20, 3);
  for (const auto& m : fixed) EXPECT_EQ(*m.scenario.optimizer, Optimizer::kAdam);
}

TEST(BenchTest, CountMustBePositive) {
  EXPECT_THROW_CODE(GenerateSuite(LayerKind::kDense, Scenario::Inference(), 0, 1),
                    ErrorCode::kUsage);
}

TEST(BenchTest, SuiteRoundTrip) {
  test::TempDir dir("suite");
  Suite s;
  s.kind = LayerKind::kDense;
  s.scenario = {Task::kTraining, Mode::kUnseen, std::nullopt};
  s.seed = 5;
  s.benchmarks = GenerateSuite(s.kind, s.scenario, 50, 5);
  SaveSuite(s, dir.path());
  const Suite back = LoadSuite(dir.path());
  EXPECT_EQ(back.benchmarks, s.benchmarks);
  EXPECT_EQ(back.seed, 5u);
  EXPECT_THROW_CODE(LoadSuite(dir / "missing"), ErrorCode::kIo);
}

TEST(BenchTest, CostCountsByHand) {
  // LeNet conv1: 28x28 outputs, 6 filters of 5x5x1.
  const LayerSpec conv = MakeConv2D(1, 32, 5, 1, 6);
  EXPECT_EQ(LayerFlops(conv), 2.0 * 25 * 6 * 28 * 28);
  EXPECT_EQ(LayerParameterCount(conv), 25.0 * 6 + 6);
  EXPECT_EQ(LayerInputElements(conv), 1024.0);
  EXPECT_EQ(LayerOutputElements(conv), 28.0 * 28 * 6);
  const LayerSpec dense = MakeDense(2, 400, 120, Activation::kRelu, false);
  EXPECT_EQ(LayerFlops(dense), 2.0 * 400 * 120 * 2);
  EXPECT_EQ(LayerParameterCount(dense), 48000.0);
  const LayerSpec pool = MakePooling(1, 28, 6, 2, 2);
  EXPECT_EQ(LayerFlops(pool), 4.0 * 6 * 14 * 14);
  EXPECT_EQ(LayerParameterCount(pool), 0.0);
}

TEST(BenchTest, OraclePhaseTimesByHand) {
  const LayerSpec dense = MakeDense(1, 400, 120);
  const DeviceSpec dev = FindDevice("P1000");
  const OracleProfile p;
  const PhaseTimes t = OraclePhaseTimes(dense, Scenario::Inference(), dev, p);
  const double flops = 2.0 * 400 * 120;
  const double bytes = 4.0 * (400 + 120 + 400 * 120 + 120);
  EXPECT_DOUBLE_EQ(t.exe, flops / (0.35 * 1.894 * 1e9) + bytes / (80.19 * 1e6) + 0.05);
  EXPECT_DOUBLE_EQ(t.pre, 4.0 * 400 / 12e6 + 0.08);
  EXPECT_DOUBLE_EQ(t.post, 4.0 * 120 / 12e6 + 0.03);
  const PhaseTimes tr =
      OraclePhaseTimes(dense, Scenario::Training(Optimizer::kAdam), dev, p);
  EXPECT_DOUBLE_EQ(tr.exe, 2.5 * t.exe);
}

TEST(BenchTest, OracleMonotoneInWork) {
  const DeviceSpec dev = FindDevice("P2000");
  const OracleProfile p;
  auto exe = [&](const LayerSpec& l) {
    return OraclePhaseTimes(l, Scenario::Inference(), dev, p).exe;
  };
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto base = GenerateSuite(LayerKind::kConv2D, Scenario::Inference(), 1, rng())[0].layer;
    LayerSpec more = base;
    more.channels_out = std::min(9999, base.channels_out + 1);
    EXPECT_LE(exe(base), exe(more));
    more = base;
    more.batch_size = std::min(64, base.batch_size + 1);
    EXPECT_LE(exe(base), exe(more));
    // Kernel growth only adds work when the output size is held fixed.
    LayerSpec same = base;
    same.padding = Padding::kSame;
    LayerSpec bigger = same;
    bigger.kernel_size = std::min(7, same.kernel_size + 1);
    EXPECT_LE(exe(same), exe(bigger));
  }
  // Faster hardware never makes the same layer slower.
  const LayerSpec l = MakeConv2D(8, 64, 3, 64, 64, 1, Padding::kSame);
  EXPECT_GT(exe(l), OraclePhaseTimes(l, Scenario::Inference(), FindDevice("GTX1080Ti"), p).exe);
}

TEST(BenchTest, NoiseHasUnitMeanAndRequestedSpread) {
  const auto bench = GenerateSuite(LayerKind::kDense, Scenario::Inference(), 1, 2)[0];
  const DeviceSpec dev = FindDevice("P4000");
  const double truth = OraclePhaseTimes(bench.layer, bench.scenario, dev, {}).exe;
  const int n = 20000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double r = SynthRepeat(bench, dev, {}, 1000 + i, 0.1).exe / truth;
    sum += r;
    sum2 += r * r;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  EXPECT_NEAR(mean, 1.0, 0.005);
  EXPECT_NEAR(sd, 0.1, 0.005);
  EXPECT_EQ(SynthRepeat(bench, dev, {}, 1, 0.0).exe, truth);
}

TEST(BenchTest, CleanOutliersExample) {
  std::vector<PhaseTimes> r;
  for (double v : {2.0, 2.1, 1.9, 2.0, 50.0}) r.push_back({v, v, v});
  const CleanedTimes c = CleanOutliers(r);
  EXPECT_DOUBLE_EQ(c.times.exe, 2.0);
  EXPECT_EQ(c.repeats_used, 4);
}

TEST(BenchTest, CleanOutliersEdgeCases) {
  std::vector<PhaseTimes> one = {{1.0, 2.0, 3.0}};
  EXPECT_EQ(CleanOutliers(one).times, (PhaseTimes{1.0, 2.0, 3.0}));
  EXPECT_EQ(CleanOutliers(one).repeats_used, 1);
  // MAD 0: only the values at the median survive.
  std::vector<PhaseTimes> flat;
  for (double v : {3.0, 3.0, 3.0, 9.0}) flat.push_back({v, v, v});
  EXPECT_EQ(CleanOutliers(flat).times.pre, 3.0);
  EXPECT_EQ(CleanOutliers(flat).repeats_used, 3);
  EXPECT_THROW_CODE(CleanOutliers(std::vector<PhaseTimes>{}), ErrorCode::kEmptyInput);
}

TEST(BenchTest, CleanOutliersPermutationInvariant) {
  std::mt19937_64 rng(12);
  std::lognormal_distribution<double> d(0.0, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PhaseTimes> r(7);
    for (auto& t : r) t = {d(rng), d(rng), d(rng)};
    const auto base = CleanOutliers(r);
    std::shuffle(r.begin(), r.end(), rng);
    const auto shuffled = CleanOutliers(r);
    EXPECT_EQ(base.times, shuffled.times);
    EXPECT_EQ(base.repeats_used, shuffled.repeats_used);
  }
}

TEST(BenchTest, MeasureSuiteIndependentOfThreads) {
  const auto suite = GenerateSuite(LayerKind::kConv2D, Scenario::Inference(), 64, 9);
  const auto dev = FindDevice("P1000");
  const auto a = MeasureSuite(suite, dev, {}, 3, 0.05, 5, 1);
  const auto b = MeasureSuite(suite, dev, {}, 3, 0.05, 5, 4);
  EXPECT_EQ(a, b);
  for (const auto& s : a) {
    EXPECT_LE(s.repeats_used, 5);
    EXPECT_GE(s.repeats_used, 1);
    EXPECT_GT(s.times.pre, 0);
  }
}

std::string ConvHeader(int repeats) {
  std::string h = "batch_size,matrix_size,kernel_size,channels_in,channels_out,strides,padding,"
                  "activation,bias,device";
  for (int r = 1; r <= repeats; ++r) {
    h += ",t_pre_" + std::to_string(r) + ",t_exe_" + std::to_string(r) + ",t_post_" +
         std::to_string(r);
  }
  return h + "\n";
}

const LayoutId kConvInference{LayerKind::kConv2D, Task::kInference, Mode::kPerDevice};

TEST(BenchTest, IngestCleansRepeats) {
  std::istringstream in(ConvHeader(3) +
                        "1,32,5,1,6,1,0,1,1,P1000,0.1,0.5,0.05,0.11,0.6,0.05,0.1,9.0,0.05\n");
  const Dataset ds = IngestProfileCsv(in, kConvInference);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.samples[0].features.values,
            (std::vector<double>{1, 32, 5, 1, 6, 1, 0, 1, 1}));
  EXPECT_DOUBLE_EQ(ds.samples[0].times.exe, 0.55);
  EXPECT_EQ(ds.samples[0].device, "P1000");
  EXPECT_EQ(ds.provenance, Provenance::kIngested);
}

TEST(BenchTest, IngestMissingColumnNamesIt) {
  std::string header = ConvHeader(1);
  header.erase(header.find("strides,"), 8);
  std::istringstream in(header + "1,32,5,1,6,0,1,1,P1000,0.1,0.5,0.05\n");
  try {
    IngestProfileCsv(in, kConvInference);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kHeaderMismatch);
    EXPECT_NE(std::string(e.what()).find("strides"), std::string::npos) << e.what();
  }
}

TEST(BenchTest, IngestRowErrors) {
  {
    std::istringstream in(ConvHeader(1) + "1,32,5,1,6,1,0,1,1,P1000,0.1,abc,0.05\n");
    EXPECT_THROW_CODE(IngestProfileCsv(in, kConvInference), ErrorCode::kParse);
  }
  {
    std::istringstream in(ConvHeader(1) + "1,32,5,1,6,1,0,1,1,P1000,0.1,0.2,0.05\n" +
                          "1,32,5,1,6,1,0,1,1,P1000,0.1,-0.2,0.05\n");
    try {
      IngestProfileCsv(in, kConvInference);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kRowInvalid);
      EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
    }
  }
  {
    std::istringstream in("");
    EXPECT_THROW_CODE(IngestProfileCsv(in, kConvInference), ErrorCode::kEmptyInput);
  }
  {
    std::istringstream in(ConvHeader(1));
    EXPECT_THROW_CODE(IngestProfileCsv(in, kConvInference), ErrorCode::kEmptyInput);
  }
}

TEST(BenchTest, SplitSizesAndDisjointness) {
  const Dataset ds = test::OracleDataset(LayerKind::kDense, Scenario::Inference(), 101, 4,
                                         FindDevice("P1000"));
  const auto [train, test_part] = SplitDataset(ds, 0.8, 6);
  EXPECT_EQ(train.size(), 81u);
  EXPECT_EQ(test_part.size(), 20u);
  auto key = [](const TimingSample& s) { return s.features.values; };
  std::vector<std::vector<double>> all;
  for (const auto& s : train.samples) all.push_back(key(s));
  for (const auto& s : test_part.samples) all.push_back(key(s));
  std::vector<std::vector<double>> orig;
  for (const auto& s : ds.samples) orig.push_back(key(s));
  std::sort(all.begin(), all.end());
  std::sort(orig.begin(), orig.end());
  EXPECT_EQ(all, orig);
  EXPECT_THROW_CODE(SplitDataset(ds, 1.0, 1), ErrorCode::kUsage);
  EXPECT_THROW_CODE(SplitDataset(ds, 0.0, 1), ErrorCode::kUsage);
}

TEST(BenchTest, MergeRequiresSameLayout) {
  const Dataset a = test::OracleDataset(LayerKind::kDense, Scenario::Inference(Mode::kUnseen),
                                        10, 1, FindDevice("P1000"));
  Dataset b = a;
  b.device_names = {"P2000"};
  const Dataset m = MergeDatasets(std::vector<Dataset>{a, b});
  EXPECT_EQ(m.size(), 20u);
  EXPECT_EQ(m.device_names, (std::vector<std::string>{"P1000", "P2000"}));
  const Dataset c = test::OracleDataset(LayerKind::kDense, Scenario::Inference(), 5, 1,
                                        FindDevice("P1000"));
  EXPECT_THROW_CODE(MergeDatasets(std::vector<Dataset>{a, c}), ErrorCode::kLayoutMismatch);
}

TEST(BenchTest, DatasetRoundTripIsExact) {
  test::TempDir dir("dataset");
  const Dataset ds = test::OracleDataset(LayerKind::kConv2D, Scenario::Training(Optimizer::kSgd),
                                         40, 2, FindDevice("P4000"), 0.05, 3);
  SaveDataset(ds, dir.path());
  const Dataset back = LoadDataset(dir.path());
  EXPECT_EQ(back.samples, ds.samples);
  EXPECT_EQ(back.layout, ds.layout);
  EXPECT_EQ(back.device_names, ds.device_names);
}

TEST(BenchTest, DatasetHeaderTamperingDetected) {
  test::TempDir dir("dataset_bad");
  const Dataset ds = test::OracleDataset(LayerKind::kDense, Scenario::Inference(), 5, 2,
                                         FindDevice("P1000"));
  SaveDataset(ds, dir.path());
  std::ifstream in(dir / "samples.csv");
  std::stringstream text;
  text << in.rdbuf();
  std::string s = text.str();
  s.replace(s.find("dim_input"), 9, "dim_inpux");
  std::ofstream(dir / "samples.csv") << s;
  EXPECT_THROW_CODE(LoadDataset(dir.path()), ErrorCode::kHeaderMismatch);
}

TEST(BenchTest, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    EXPECT_EQ(std::stod(FormatDouble(v)), v);
  }
}

}  // namespace
}  // namespace latency_atlas
