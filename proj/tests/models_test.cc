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

#include <cmath>
#include <cstring>

#include "latency_atlas/models.hpp"
#include "test_util.hpp"

namespace latency_atlas {
namespace {

TEST(ModelsTest, ParameterCounts) {
  // Hand counts: conv1 128, conv2 8320, dense tail after the first dense layer
  // 32896 + 8256 + 3120 + 1568 + 33; the first dense layer is flatten*256+256.
  EXPECT_EQ(nn::ParameterCount(BuildArchitecture(Architecture::kPerfNetV2, 5)), 120113u);
  EXPECT_EQ(nn::ParameterCount(BuildArchitecture(Architecture::kPerfNetV2, 7)), 185649u);
  EXPECT_EQ(nn::ParameterCount(BuildArchitecture(Architecture::kPerfNetV2, 9)), 251185u);
  EXPECT_EQ(nn::ParameterCount(BuildArchitecture(Architecture::kPerfNet, 5)), 44801u);
  EXPECT_EQ(nn::ParameterCount(BuildArchitecture(Architecture::kPerfNet, 9)), 45825u);
}

TEST(ModelsTest, PerfNetV2FlattensConvOutput) {
  const nn::Network net = BuildArchitecture(Architecture::kPerfNetV2, 9);
  // 9 -> 7 -> 6 positions, 128 filters.
  std::size_t flatten = 0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (net[i].type == nn::LayerType::kFlatten) flatten = i;
  }
  EXPECT_EQ(nn::OutputWidth(nn::Network(net.begin(), net.begin() + flatten + 1), 9), 768u);
  EXPECT_EQ(nn::OutputWidth(net, 9), 1u);
  EXPECT_EQ(net.back().type, nn::LayerType::kSoftplus);
}

TEST(ModelsTest, TooNarrowInputIsShapeMismatch) {
  EXPECT_THROW_CODE(BuildArchitecture(Architecture::kPerfNetV2, 3), ErrorCode::kShapeMismatch);
  EXPECT_NO_THROW(BuildArchitecture(Architecture::kPerfNetV2, 4));
  EXPECT_NO_THROW(BuildArchitecture(Architecture::kPerfNet, 1));
}

TEST(ModelsTest, LearningRateSchedule) {
  const TrainConfig c;
  EXPECT_EQ(c.LearningRate(0), 1e-3);
  EXPECT_EQ(c.LearningRate(79), 1e-3);
  EXPECT_EQ(c.LearningRate(80), 5e-4);
  EXPECT_EQ(c.LearningRate(199), 2.5e-4);
  const TrainConfig full = TrainConfig::Full();
  EXPECT_EQ(full.epochs, 1000);
  EXPECT_EQ(full.halve_every, 400);
  EXPECT_EQ(TrainConfigFromJson(TrainConfigToJson(full)), full);
}

Dataset ConvData(int n, std::uint64_t seed) {
  return test::OracleDataset(LayerKind::kConv2D, Scenario::Inference(), n, seed,
                             FindDevice("P1000"));
}

TEST(ModelsTest, InvalidConfigRejectedBeforeTraining) {
  const Dataset ds = ConvData(16, 1);
  TrainConfig c;
  c.epochs = 0;
  EXPECT_THROW_CODE(TrainPhaseModel(ds, Phase::kExe, Architecture::kPerfNet, LossKind::kMaple, c, 1),
                    ErrorCode::kValidation);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW_CODE(TrainPhaseModel(ds, Phase::kExe, Architecture::kPerfNet, LossKind::kMaple, c, 1),
                    ErrorCode::kValidation);
  Dataset empty = ds;
  empty.samples.clear();
  EXPECT_THROW_CODE(
      TrainPhaseModel(empty, Phase::kExe, Architecture::kPerfNet, LossKind::kMaple, {}, 1),
      ErrorCode::kEmptyInput);
}

TEST(ModelsTest, MapleRejectsZeroTarget) {
  Dataset ds = ConvData(16, 2);
  ds.samples[5].times.post = 0.0;
  TrainConfig c;
  c.epochs = 1;
  EXPECT_THROW_CODE(
      TrainPhaseModel(ds, Phase::kPost, Architecture::kPerfNet, LossKind::kMaple, c, 1),
      ErrorCode::kDomain);
  EXPECT_NO_THROW(
      TrainPhaseModel(ds, Phase::kPost, Architecture::kPerfNet, LossKind::kMsle, c, 1));
}

TEST(ModelsTest, TrainingIsDeterministicInSeed) {
  const Dataset ds = ConvData(64, 3);
  TrainConfig c;
  c.epochs = 3;
  c.batch_size = 16;
  const auto a = TrainPhaseModel(ds, Phase::kExe, Architecture::kPerfNetV2, LossKind::kMaple, c, 9);
  const auto b = TrainPhaseModel(ds, Phase::kExe, Architecture::kPerfNetV2, LossKind::kMaple, c, 9);
  const auto d = TrainPhaseModel(ds, Phase::kExe, Architecture::kPerfNetV2, LossKind::kMaple, c, 10);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.net, d.net);
  EXPECT_EQ(a.meta.epochs, 3);
}

TEST(ModelsTest, LearnsConstantTarget) {
  Dataset ds = ConvData(256, 4);
  for (auto& s : ds.samples) s.times.exe = 0.75;
  TrainConfig c;
  c.epochs = 100;
  c.batch_size = 32;
  c.lr0 = 1e-2;
  const auto m = TrainPhaseModel(ds, Phase::kExe, Architecture::kPerfNet, LossKind::kMaple, c, 5);
  for (double p : PredictPhase(m, ds.samples)) EXPECT_NEAR(p, 0.75, 0.05 * 0.75);
}

TEST(ModelsTest, LossMostlyDecreases) {
  const Dataset ds = ConvData(512, 6);
  std::vector<double> losses;
  TrainOptions opts;
  opts.on_epoch = [&](int, double l) { losses.push_back(l); };
  TrainConfig c;
  c.epochs = 6;
  c.batch_size = 32;
  TrainPhaseModel(ds, Phase::kExe, Architecture::kPerfNetV2, LossKind::kMaple, c, 7, opts);
  ASSERT_EQ(losses.size(), 6u);
  int drops = 0;
  for (std::size_t i = 1; i < losses.size(); ++i) drops += losses[i] <= losses[i - 1];
  EXPECT_GE(drops, 4);
  EXPECT_LT(losses.back(), losses.front());
}

TEST(ModelsTest, ValidationLossRecorded) {
  const Dataset ds = ConvData(64, 8);
  const Dataset val = ConvData(32, 9);
  TrainOptions opts;
  opts.validation = &val;
  TrainConfig c;
  c.epochs = 2;
  const auto m = TrainPhaseModel(ds, Phase::kPre, Architecture::kPerfNet, LossKind::kMsle, c, 1, opts);
  ASSERT_TRUE(m.meta.final_validation_loss);
  EXPECT_DOUBLE_EQ(*m.meta.final_validation_loss, EvaluateLoss(m, val));
}

TEST(ModelsTest, PredictChecksLayout) {
  const PhaseModel m = test::ConstantModel(
      {LayerKind::kDense, Task::kInference, Mode::kPerDevice}, Phase::kExe, 0.3);
  EXPECT_NEAR(PredictPhase(m, Featurize(MakeDense(1, 10, 10), Scenario::Inference())), 0.3,
              1e-12);
  EXPECT_THROW_CODE(
      PredictPhase(m, Featurize(MakeDense(1, 10, 10), Scenario::Training(Optimizer::kSgd))),
      ErrorCode::kLayoutMismatch);
}

PredictorBundle SmallBundle() {
  std::map<LayerKind, Dataset> data;
  for (LayerKind k : kAllLayerKinds) {
    data[k] = test::OracleDataset(k, Scenario::Inference(), 40, 11, FindDevice("P1000"));
  }
  BundleTrainOptions o;
  o.config.epochs = 2;
  o.config.batch_size = 16;
  o.seed = 3;
  return TrainBundle(data, o, FindDevice("P1000"), {});
}

TEST(ModelsTest, BundleTrainingIsThreadIndependent) {
  std::map<LayerKind, Dataset> data;
  for (LayerKind k : kAllLayerKinds) {
    data[k] = test::OracleDataset(k, Scenario::Inference(), 40, 11, FindDevice("P1000"));
  }
  BundleTrainOptions o;
  o.config.epochs = 2;
  o.config.batch_size = 16;
  o.seed = 3;
  o.threads = 1;
  const auto a = TrainBundle(data, o, FindDevice("P1000"), {});
  o.threads = 9;
  const auto b = TrainBundle(data, o, FindDevice("P1000"), {});
  EXPECT_EQ(SerializeBundle(a), SerializeBundle(b));
  EXPECT_NO_THROW(ValidateBundle(a));
  data.erase(LayerKind::kPooling);
  EXPECT_THROW_CODE(TrainBundle(data, o, FindDevice("P1000"), {}), ErrorCode::kUsage);
}

TEST(ModelsTest, BundleRoundTripIsExact) {
  const PredictorBundle b = SmallBundle();
  test::TempDir dir("bundle");
  SaveBundle(b, dir / "b.latb");
  const PredictorBundle back = LoadBundle(dir / "b.latb");
  EXPECT_EQ(back, b);
  const auto fv = Featurize(MakeConv2D(4, 64, 3, 16, 32), Scenario::Inference());
  EXPECT_EQ(PredictPhase(back.Model(LayerKind::kConv2D, Phase::kExe), fv),
            PredictPhase(b.Model(LayerKind::kConv2D, Phase::kExe), fv));
}

TEST(ModelsTest, BundleCorruptionDetected) {
  const std::string bytes = SerializeBundle(test::StubBundle(test::LeNetStubValues()));
  EXPECT_NO_THROW(DeserializeBundle(bytes));

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW_CODE(DeserializeBundle(bad_magic), ErrorCode::kParse);

  std::string bumped = bytes;
  std::uint32_t version;
  std::memcpy(&version, bumped.data() + 8, 4);
  ++version;
  std::memcpy(bumped.data() + 8, &version, 4);
  EXPECT_THROW_CODE(DeserializeBundle(bumped), ErrorCode::kVersion);

  EXPECT_THROW_CODE(DeserializeBundle(bytes.substr(0, bytes.size() - 9)), ErrorCode::kChecksum);
  EXPECT_THROW_CODE(DeserializeBundle(bytes.substr(0, 10)), ErrorCode::kChecksum);

  std::string flipped = bytes;
  flipped[bytes.size() - 20] ^= 0x01;
  EXPECT_THROW_CODE(DeserializeBundle(flipped), ErrorCode::kChecksum);
}

TEST(ModelsTest, IncompleteBundleInvalid) {
  PredictorBundle b = test::StubBundle(test::LeNetStubValues());
  EXPECT_NO_THROW(ValidateBundle(b));
  b.models.erase({LayerKind::kDense, Phase::kPost});
  EXPECT_THROW_CODE(ValidateBundle(b), ErrorCode::kValidation);
  EXPECT_THROW_CODE(SerializeBundle(b), ErrorCode::kValidation);
}

}  // namespace
}  // namespace latency_atlas
