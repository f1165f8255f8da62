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

#include "latency_atlas/features.hpp"
#include "test_util.hpp"

namespace latency_atlas {
namespace {

TEST(FeaturesTest, LayoutWidths) {
  EXPECT_EQ(LayoutWidth({LayerKind::kConv2D, Task::kInference, Mode::kPerDevice}), 9u);
  EXPECT_EQ(LayoutWidth({LayerKind::kPooling, Task::kInference, Mode::kPerDevice}), 7u);
  EXPECT_EQ(LayoutWidth({LayerKind::kDense, Task::kInference, Mode::kPerDevice}), 5u);
  EXPECT_EQ(LayoutWidth({LayerKind::kConv2D, Task::kTraining, Mode::kPerDevice}), 13u);
  EXPECT_EQ(LayoutWidth({LayerKind::kDense, Task::kTraining, Mode::kUnseen}), 14u);
  for (LayerKind k : kAllLayerKinds) {
    for (Task t : {Task::kInference, Task::kTraining}) {
      for (Mode m : {Mode::kPerDevice, Mode::kUnseen}) {
        const LayoutId id{k, t, m};
        EXPECT_EQ(FeatureNames(id).size(), LayoutWidth(id));
        EXPECT_EQ(LayoutId::Parse(id.ToString()), id);
      }
    }
  }
}

TEST(FeaturesTest, ConvInferenceVector) {
  const auto fv = Featurize(MakeConv2D(1, 32, 5, 1, 6), Scenario::Inference());
  EXPECT_EQ(fv.values, (std::vector<double>{1, 32, 5, 1, 6, 1, 0, 1, 1}));
  EXPECT_EQ(fv.layout.ToString(), "conv2d-inference");
}

TEST(FeaturesTest, PoolingTrainingVector) {
  const auto fv = Featurize(MakePooling(8, 28, 6, 2, 2, Padding::kSame),
                            Scenario::Training(Optimizer::kRmsprop));
  EXPECT_EQ(fv.values, (std::vector<double>{8, 28, 6, 2, 1, 0, 2, 0, 0, 1, 0}));
}

TEST(FeaturesTest, DenseUnseenVectorCarriesHardware) {
  const auto fv = Featurize(MakeDense(1, 120, 84), Scenario::Inference(Mode::kUnseen),
                            FindDevice("P5000"));
  EXPECT_EQ(fv.values,
            (std::vector<double>{1, 120, 84, 1, 1, 1607, 2560, 1127, 288.5, 8.873}));
  EXPECT_EQ(FeatureNames(fv.layout).back(), "peak_tflops");
}

TEST(FeaturesTest, UnseenWithoutDeviceIsUsageError) {
  EXPECT_THROW_CODE(Featurize(MakeDense(1, 4, 4), Scenario::Inference(Mode::kUnseen)),
                    ErrorCode::kUsage);
}

TEST(FeaturesTest, OptimizerBlockIsOneHot) {
  for (Optimizer o : kAllOptimizers) {
    const auto fv = Featurize(MakeDense(1, 4, 4), Scenario::Training(o));
    double sum = 0;
    for (std::size_t i = 5; i < 9; ++i) sum += fv.values[i];
    EXPECT_EQ(sum, 1.0);
    EXPECT_EQ(fv.values[5 + static_cast<int>(o)], 1.0);
  }
}

TEST(FeaturesTest, CardinalityIsProductOfRangeSizes) {
  const long double batch = 64, matrix = 512, kernel = 7, ch = 9999, strides = 4, pool = 7,
                    dims = 4096;
  const long double conv = batch * matrix * kernel * ch * ch * strides * 2 * 2 * 2;
  const long double pooling = batch * matrix * ch * strides * 2 * 2 * pool;
  const long double dense = batch * dims * dims * 2 * 2;
  auto card = [](LayerKind k, Task t) {
    return DesignSpaceCardinality({k, t, Mode::kPerDevice});
  };
  EXPECT_DOUBLE_EQ(card(LayerKind::kConv2D, Task::kInference), static_cast<double>(conv));
  EXPECT_DOUBLE_EQ(card(LayerKind::kPooling, Task::kInference), static_cast<double>(pooling));
  EXPECT_DOUBLE_EQ(card(LayerKind::kDense, Task::kInference), static_cast<double>(dense));
  EXPECT_DOUBLE_EQ(card(LayerKind::kConv2D, Task::kTraining), static_cast<double>(4 * conv));
  // Order of magnitude quoted for the convolution design space: 7.34e14.
  EXPECT_NEAR(card(LayerKind::kConv2D, Task::kInference) / 1e14, 7.34, 0.005);
  EXPECT_NEAR(card(LayerKind::kConv2D, Task::kTraining) / 1e15, 2.935, 0.001);
}

}  // namespace
}  // namespace latency_atlas
