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

#ifndef LATENCY_ATLAS_BENCH_HPP_
#define LATENCY_ATLAS_BENCH_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "latency_atlas/features.hpp"
#include "latency_atlas/netspec.hpp"

namespace latency_atlas {

struct Microbenchmark {
  std::int64_t id = 0;
  LayerSpec layer;
  Scenario scenario;

  bool operator==(const Microbenchmark&) const = default;
};

// Draws `count` layers of `kind`, every feature uniform over its range.
// Combinations that fail validation are redrawn. Deterministic in `seed`.
std::vector<Microbenchmark> GenerateSuite(LayerKind kind,
                                          const Scenario& scenario, int count,
                                          std::uint64_t seed);

struct Suite {
  LayerKind kind = LayerKind::kConv2D;
  Scenario scenario;
  std::uint64_t seed = 0;
  std::vector<Microbenchmark> benchmarks;
};

inline constexpr int kSuiteFormatVersion = 1;

// <dir>/suite.json
void SaveSuite(const Suite& suite, const std::filesystem::path& dir);
Suite LoadSuite(const std::filesystem::path& dir);

// Phase durations in milliseconds.
struct PhaseTimes {
  double pre = 0;
  double exe = 0;
  double post = 0;

  bool operator==(const PhaseTimes&) const = default;
};

// Constants of the analytic timing model used in place of GPU profiling.
//   t_exe  = flops / (efficiency * peak_tflops * 1e9)
//            + bytes_moved / (memory_bandwidth_gbs * 1e6) + launch_ms
//   t_pre  = h2d_bytes / (pcie_gbs * 1e6) + sched_ms
//   t_post = d2h_bytes / (pcie_gbs * 1e6) + ret_ms
// Training multiplies t_exe by the optimizer factor (sgd, adagrad, rmsprop,
// adam order).
struct OracleProfile {
  double efficiency = 0.35;
  double launch_ms = 0.05;
  double sched_ms = 0.08;
  double ret_ms = 0.03;
  double pcie_gbs = 12.0;
  double bytes_per_element = 4.0;
  std::array<double, 4> optimizer_factor = {2.0, 2.2, 2.3, 2.5};

  bool operator==(const OracleProfile&) const = default;
};

nlohmann::json OracleProfileToJson(const OracleProfile& p);
// Missing keys keep their defaults; unknown keys are a parse error.
OracleProfile OracleProfileFromJson(const nlohmann::json& j);
OracleProfile LoadOracleProfile(const std::filesystem::path& path);

// Floating-point operation and traffic counts of one layer execution.
double LayerFlops(const LayerSpec& layer);
double LayerParameterCount(const LayerSpec& layer);
double LayerInputElements(const LayerSpec& layer);
double LayerOutputElements(const LayerSpec& layer);
// input + output + parameters, in bytes.
double LayerBytesMoved(const LayerSpec& layer, const OracleProfile& profile);

// Noise-free phase times of a layer on a device.
PhaseTimes OraclePhaseTimes(const LayerSpec& layer, const Scenario& scenario,
                            const DeviceSpec& device,
                            const OracleProfile& profile);

// One noisy observation: every phase is multiplied by an independent lognormal
// factor with mean 1 and coefficient of variation `noise_cv`.
PhaseTimes SynthRepeat(const Microbenchmark& bench, const DeviceSpec& device,
                       const OracleProfile& profile, std::uint64_t noise_seed,
                       double noise_cv);

struct TimingSample {
  FeatureVector features;
  PhaseTimes times;
  int repeats_used = 1;
  std::string device;

  bool operator==(const TimingSample&) const = default;
};

struct CleanedTimes {
  PhaseTimes times;
  int repeats_used = 0;
};

// Per phase: drop values more than 3 scaled MADs (MAD * 1.4826) from the
// median and return the median of the survivors. repeats_used is the minimum
// survivor count across phases. Throws kEmptyInput on an empty list.
CleanedTimes CleanOutliers(std::span<const PhaseTimes> repeats);

// `repeats` noisy observations of `bench`, cleaned into one sample.
TimingSample SynthOracle(const Microbenchmark& bench, const DeviceSpec& device,
                         const OracleProfile& profile,
                         std::uint64_t noise_seed, double noise_cv,
                         int repeats = 1);

// Runs SynthOracle over a suite on up to `threads` workers. The result is
// ordered like `suite` whatever the completion order.
std::vector<TimingSample> MeasureSuite(std::span<const Microbenchmark> suite,
                                       const DeviceSpec& device,
                                       const OracleProfile& profile,
                                       std::uint64_t noise_seed,
                                       double noise_cv, int repeats,
                                       unsigned threads = 0);

enum class Provenance { kSynthetic, kIngested };

struct Dataset {
  LayoutId layout;
  std::vector<TimingSample> samples;
  Provenance provenance = Provenance::kSynthetic;
  std::vector<std::string> device_names;
  // Generation metadata recorded in meta.json (oracle profile, seeds, ...).
  nlohmann::json generation = nlohmann::json::object();

  std::size_t size() const { return samples.size(); }
};

// Measurement CSV: header = FeatureNames(layout), "device", then
// t_pre_1,t_exe_1,t_post_1, t_pre_2,... for repeats 1..R (R >= 1). One row per
// microbenchmark; its repeats are cleaned with CleanOutliers.
Dataset IngestProfileCsv(const std::filesystem::path& path, LayoutId layout);
Dataset IngestProfileCsv(std::istream& in, LayoutId layout,
                         const std::string& source_name = "<stream>");

// Shuffles with `seed` and cuts at round(train_fraction * N).
std::pair<Dataset, Dataset> SplitDataset(const Dataset& ds,
                                         double train_fraction,
                                         std::uint64_t seed);

// Concatenates datasets sharing a layout; device_names is the sorted union.
Dataset MergeDatasets(std::span<const Dataset> parts);

inline constexpr int kDatasetFormatVersion = 1;

// Directory archive: meta.json + samples.csv.
void SaveDataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset LoadDataset(const std::filesystem::path& dir);

// Helpers shared by the CSV writers: shortest round-tripping decimal.
std::string FormatDouble(double v);

}  // namespace latency_atlas

#endif  // LATENCY_ATLAS_BENCH_HPP_
