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

#include "latency_atlas/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "latency_atlas/error.hpp"
#include "latency_atlas/seed.hpp"

namespace latency_atlas {

using nlohmann::json;

namespace {

int Draw(std::mt19937_64& rng, FeatureRange range) {
  return std::uniform_int_distribution<int>(range.lo, range.hi)(rng);
}

bool Coin(std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(0, 1)(rng) == 1;
}

LayerSpec DrawLayer(LayerKind kind, std::mt19937_64& rng) {
  const int batch = Draw(rng, ranges::kBatchSize);
  switch (kind) {
    case LayerKind::kConv2D: {
      const int matrix = Draw(rng, ranges::kMatrixSize);
      const int kernel = Draw(rng, ranges::kKernelSize);
      const int cin = Draw(rng, ranges::kChannels);
      const int cout = Draw(rng, ranges::kChannels);
      const int strides = Draw(rng, ranges::kStrides);
      const auto padding = Coin(rng) ? Padding::kSame : Padding::kValid;
      const auto act = Coin(rng) ? Activation::kRelu : Activation::kNone;
      const bool bias = Coin(rng);
      return MakeConv2D(batch, matrix, kernel, cin, cout, strides, padding,
                        act, bias);
    }
    case LayerKind::kPooling: {
      const int matrix = Draw(rng, ranges::kMatrixSize);
      const int cin = Draw(rng, ranges::kChannels);
      const int strides = Draw(rng, ranges::kStrides);
      const auto padding = Coin(rng) ? Padding::kSame : Padding::kValid;
      const auto act = Coin(rng) ? Activation::kRelu : Activation::kNone;
      const int pool = Draw(rng, ranges::kPoolSize);
      return MakePooling(batch, matrix, cin, pool, strides, padding, act);
    }
    case LayerKind::kDense: {
      const int din = Draw(rng, ranges::kDims);
      const int dout = Draw(rng, ranges::kDims);
      const auto act = Coin(rng) ? Activation::kRelu : Activation::kNone;
      const bool bias = Coin(rng);
      return MakeDense(batch, din, dout, act, bias);
    }
  }
  Fail(ErrorCode::kInternal, "unreachable layer kind");
}

bool IsValid(const LayerSpec& layer) {
  try {
    ValidateLayer(layer);
    return true;
  } catch (const Error&) {
    return false;
  }
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct PhaseClean {
  double value;
  int survivors;
};

PhaseClean CleanPhase(const std::vector<double>& raw) {
  const double med = Median(raw);
  std::vector<double> dev;
  dev.reserve(raw.size());
  for (double x : raw) dev.push_back(std::abs(x - med));
  const double scaled_mad = 1.4826 * Median(dev);
  std::vector<double> kept;
  for (double x : raw) {
    if (std::abs(x - med) <= 3.0 * scaled_mad) kept.push_back(x);
  }
  if (kept.empty()) return {med, static_cast<int>(raw.size())};
  return {Median(kept), static_cast<int>(kept.size())};
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  for (auto& s : cells) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return cells;
}

std::optional<double> ParseNumber(const std::string& s) {
  double v = 0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || begin == end) return std::nullopt;
  return v;
}

std::string RowLabel(const std::string& source, std::size_t row) {
  return source + ": row " + std::to_string(row) + " (line " +
         std::to_string(row + 1) + ")";
}

void CheckOneHot(const FeatureVector& fv, const std::string& where) {
  if (fv.layout.task != Task::kTraining) return;
  const std::size_t software =
      LayoutWidth({fv.layout.kind, Task::kInference, Mode::kPerDevice});
  double sum = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double v = fv.values[software + k];
    if (v != 0.0 && v != 1.0) {
      Fail(ErrorCode::kRowInvalid, where + ": optimizer flags must be 0/1");
    }
    sum += v;
  }
  if (sum != 1.0) {
    Fail(ErrorCode::kRowInvalid,
         where + ": exactly one optimizer flag must be set");
  }
}

json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

void EnsureDir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) Fail(ErrorCode::kInternal, "cannot format number");
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Suites

std::vector<Microbenchmark> GenerateSuite(LayerKind kind,
                                          const Scenario& scenario, int count,
                                          std::uint64_t seed) {
  if (count < 1) Fail(ErrorCode::kUsage, "suite count must be >= 1");
  if (scenario.task == Task::kInference && scenario.optimizer) {
    Fail(ErrorCode::kUsage, "inference suites carry no optimizer");
  }
  std::mt19937_64 rng(seed);
  std::vector<Microbenchmark> suite;
  suite.reserve(count);
  for (int id = 0; id < count; ++id) {
    LayerSpec layer;
    do {
      layer = DrawLayer(kind, rng);
    } while (!IsValid(layer));
    layer.name = "bench" + std::to_string(id);
    Scenario s = scenario;
    // Training suites without a fixed optimizer draw one per benchmark.
    if (s.task == Task::kTraining && !s.optimizer) {
      s.optimizer = kAllOptimizers[std::uniform_int_distribution<int>(0, 3)(rng)];
    }
    suite.push_back({id, std::move(layer), s});
  }
  return suite;
}

void SaveSuite(const Suite& suite, const std::filesystem::path& dir) {
  EnsureDir(dir);
  json benches = json::array();
  for (const auto& b : suite.benchmarks) {
    json j{{"id", b.id}, {"layer", LayerToJson(b.layer)}};
    if (b.scenario.optimizer) j["optimizer"] = ToString(*b.scenario.optimizer);
    benches.push_back(std::move(j));
  }
  json doc{{"format_version", kSuiteFormatVersion},
           {"kind", ToString(suite.kind)},
           {"task", ToString(suite.scenario.task)},
           {"mode", ToString(suite.scenario.mode)},
           {"seed", suite.seed},
           {"count", suite.benchmarks.size()},
           {"benchmarks", std::move(benches)}};
  WriteTextFile(dir / "suite.json", doc.dump(1) + "\n");
}

Suite LoadSuite(const std::filesystem::path& dir) {
  const auto path = dir / "suite.json";
  if (!std::filesystem::exists(path)) {
    Fail(ErrorCode::kIo, "no suite manifest at " + path.string());
  }
  const json doc = ReadJsonFile(path);
  try {
    if (doc.at("format_version").get<int>() != kSuiteFormatVersion) {
      Fail(ErrorCode::kVersion, path.string() + ": unsupported format_version");
    }
    Suite suite;
    suite.kind = ParseLayerKind(doc.at("kind").get<std::string>());
    suite.scenario.task = ParseTask(doc.at("task").get<std::string>());
    suite.scenario.mode = ParseMode(doc.at("mode").get<std::string>());
    suite.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& j : doc.at("benchmarks")) {
      Microbenchmark b;
      b.id = j.at("id").get<std::int64_t>();
      b.layer = LayerFromJson(j.at("layer"));
      b.scenario = suite.scenario;
      if (j.contains("optimizer")) {
        b.scenario.optimizer = ParseOptimizer(j["optimizer"].get<std::string>());
      }
      ValidateScenario(b.scenario);
      if (b.layer.kind != suite.kind) {
        Fail(ErrorCode::kParse, path.string() + ": benchmark " +
                                    std::to_string(b.id) + " has wrong kind");
      }
      suite.benchmarks.push_back(std::move(b));
    }
    return suite;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Oracle

json OracleProfileToJson(const OracleProfile& p) {
  return json{{"efficiency", p.efficiency},
              {"launch_ms", p.launch_ms},
              {"sched_ms", p.sched_ms},
              {"ret_ms", p.ret_ms},
              {"pcie_gbs", p.pcie_gbs},
              {"bytes_per_element", p.bytes_per_element},
              {"optimizer_factor",
               {{"sgd", p.optimizer_factor[0]},
                {"adagrad", p.optimizer_factor[1]},
                {"rmsprop", p.optimizer_factor[2]},
                {"adam", p.optimizer_factor[3]}}}};
}

OracleProfile OracleProfileFromJson(const json& j) {
  OracleProfile p;
  if (!j.is_object()) Fail(ErrorCode::kParse, "oracle profile must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "efficiency") p.efficiency = value.get<double>();
      else if (key == "launch_ms") p.launch_ms = value.get<double>();
      else if (key == "sched_ms") p.sched_ms = value.get<double>();
      else if (key == "ret_ms") p.ret_ms = value.get<double>();
      else if (key == "pcie_gbs") p.pcie_gbs = value.get<double>();
      else if (key == "bytes_per_element") p.bytes_per_element = value.get<double>();
      else if (key == "optimizer_factor") {
        for (Optimizer o : kAllOptimizers) {
          const std::string name(ToString(o));
          if (value.contains(name)) {
            p.optimizer_factor[static_cast<int>(o)] = value[name].get<double>();
          }
        }
      } else {
        Fail(ErrorCode::kParse, "unknown oracle profile key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("oracle profile: ") + e.what());
  }
  if (!(p.efficiency > 0) || !(p.pcie_gbs > 0) || p.launch_ms < 0 ||
      p.sched_ms < 0 || p.ret_ms < 0 || !(p.bytes_per_element > 0)) {
    Fail(ErrorCode::kValidation, "oracle profile constants out of range");
  }
  return p;
}

OracleProfile LoadOracleProfile(const std::filesystem::path& path) {
  return OracleProfileFromJson(ReadJsonFile(path));
}

namespace {

double OutputSpatial(const LayerSpec& layer) {
  return InferOutputShape(layer, InputShapeOf(layer)).spatial;
}

}  // namespace

double LayerFlops(const LayerSpec& l) {
  const double batch = l.batch_size;
  switch (l.kind) {
    case LayerKind::kConv2D: {
      const double out = OutputSpatial(l);
      return 2.0 * l.kernel_size * l.kernel_size * double(l.channels_in) *
             l.channels_out * out * out * batch;
    }
    case LayerKind::kPooling: {
      const double out = OutputSpatial(l);
      return double(l.pool_size) * l.pool_size * l.channels_in * out * out *
             batch;
    }
    case LayerKind::kDense:
      return 2.0 * l.dim_input * double(l.dim_output) * batch;
  }
  return 0;
}

double LayerParameterCount(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::kConv2D:
      return double(l.kernel_size) * l.kernel_size * l.channels_in *
                 double(l.channels_out) +
             (l.use_bias ? l.channels_out : 0);
    case LayerKind::kPooling:
      return 0;
    case LayerKind::kDense:
      return double(l.dim_input) * l.dim_output + (l.use_bias ? l.dim_output : 0);
  }
  return 0;
}

double LayerInputElements(const LayerSpec& l) {
  if (l.kind == LayerKind::kDense) return double(l.batch_size) * l.dim_input;
  return double(l.batch_size) * l.matrix_size * l.matrix_size * l.channels_in;
}

double LayerOutputElements(const LayerSpec& l) {
  if (l.kind == LayerKind::kDense) return double(l.batch_size) * l.dim_output;
  const double out = OutputSpatial(l);
  const double depth =
      l.kind == LayerKind::kConv2D ? l.channels_out : l.channels_in;
  return double(l.batch_size) * out * out * depth;
}

double LayerBytesMoved(const LayerSpec& l, const OracleProfile& profile) {
  return profile.bytes_per_element *
         (LayerInputElements(l) + LayerOutputElements(l) +
          LayerParameterCount(l));
}

PhaseTimes OraclePhaseTimes(const LayerSpec& layer, const Scenario& scenario,
                            const DeviceSpec& device,
                            const OracleProfile& profile) {
  ValidateScenario(scenario);
  const double pcie = profile.pcie_gbs * 1e6;  // bytes per ms
  PhaseTimes t;
  t.exe = LayerFlops(layer) /
              (profile.efficiency * device.peak_tflops * 1e9) +
          LayerBytesMoved(layer, profile) /
              (device.memory_bandwidth_gbs * 1e6) +
          profile.launch_ms;
  if (scenario.task == Task::kTraining) {
    t.exe *= profile.optimizer_factor[static_cast<int>(*scenario.optimizer)];
  }
  t.pre = profile.bytes_per_element * LayerInputElements(layer) / pcie +
          profile.sched_ms;
  t.post = profile.bytes_per_element * LayerOutputElements(layer) / pcie +
           profile.ret_ms;
  return t;
}

PhaseTimes SynthRepeat(const Microbenchmark& bench, const DeviceSpec& device,
                       const OracleProfile& profile, std::uint64_t noise_seed,
                       double noise_cv) {
  if (noise_cv < 0) Fail(ErrorCode::kUsage, "noise_cv must be >= 0");
  PhaseTimes t = OraclePhaseTimes(bench.layer, bench.scenario, device, profile);
  if (noise_cv == 0) return t;
  const double sigma2 = std::log1p(noise_cv * noise_cv);
  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> normal(-0.5 * sigma2, std::sqrt(sigma2));
  t.pre *= std::exp(normal(rng));
  t.exe *= std::exp(normal(rng));
  t.post *= std::exp(normal(rng));
  return t;
}

CleanedTimes CleanOutliers(std::span<const PhaseTimes> repeats) {
  if (repeats.empty()) Fail(ErrorCode::kEmptyInput, "no repeats to clean");
  std::vector<double> pre, exe, post;
  for (const auto& r : repeats) {
    pre.push_back(r.pre);
    exe.push_back(r.exe);
    post.push_back(r.post);
  }
  const auto a = CleanPhase(pre);
  const auto b = CleanPhase(exe);
  const auto c = CleanPhase(post);
  return {{a.value, b.value, c.value},
          std::min({a.survivors, b.survivors, c.survivors})};
}

TimingSample SynthOracle(const Microbenchmark& bench, const DeviceSpec& device,
                         const OracleProfile& profile,
                         std::uint64_t noise_seed, double noise_cv,
                         int repeats) {
  if (repeats < 1) Fail(ErrorCode::kUsage, "repeats must be >= 1");
  std::vector<PhaseTimes> raw;
  raw.reserve(repeats);
  for (int r = 0; r < repeats; ++r) {
    raw.push_back(SynthRepeat(bench, device, profile,
                              DeriveSeed(noise_seed, {std::uint64_t(bench.id), std::uint64_t(r)}), noise_cv));
  }
  const CleanedTimes cleaned = CleanOutliers(raw);
  TimingSample s;
  s.features = Featurize(bench.layer, bench.scenario, device);
  s.times = cleaned.times;
  s.repeats_used = cleaned.repeats_used;
  s.device = device.name;
  return s;
}

std::vector<TimingSample> MeasureSuite(std::span<const Microbenchmark> suite,
                                       const DeviceSpec& device,
                                       const OracleProfile& profile,
                                       std::uint64_t noise_seed,
                                       double noise_cv, int repeats,
                                       unsigned threads) {
  ValidateDevice(device);
  std::vector<TimingSample> out(suite.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<std::size_t>(suite.size(), 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < suite.size(); i = next++) {
      try {
        out[i] = SynthOracle(suite[i], device, profile, noise_seed, noise_cv,
                             repeats);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

// ---------------------------------------------------------------------------
// Datasets

Dataset IngestProfileCsv(std::istream& in, LayoutId layout,
                         const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || SplitCsvLine(line) == std::vector<std::string>{""}) {
    Fail(ErrorCode::kEmptyInput, source + ": empty file");
  }
  const auto header = SplitCsvLine(line);
  std::vector<std::string> expected = FeatureNames(layout);
  expected.push_back("device");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i >= header.size()) {
      Fail(ErrorCode::kHeaderMismatch,
           source + ": missing column '" + expected[i] + "' for layout " +
               layout.ToString());
    }
    if (header[i] != expected[i]) {
      Fail(ErrorCode::kHeaderMismatch,
           source + ": column " + std::to_string(i + 1) + " should be '" +
               expected[i] + "' but is '" + header[i] + "' (missing column '" +
               expected[i] + "' for layout " + layout.ToString() + ")");
    }
  }
  const std::size_t repeat_cols = header.size() - expected.size();
  if (repeat_cols == 0 || repeat_cols % 3 != 0) {
    Fail(ErrorCode::kHeaderMismatch,
         source + ": expected t_pre_r,t_exe_r,t_post_r column triples after "
                  "'device'");
  }
  const std::size_t repeats = repeat_cols / 3;
  static const char* kPhase[] = {"t_pre_", "t_exe_", "t_post_"};
  for (std::size_t r = 0; r < repeats; ++r) {
    for (std::size_t p = 0; p < 3; ++p) {
      const std::string want = kPhase[p] + std::to_string(r + 1);
      const std::size_t col = expected.size() + 3 * r + p;
      if (header[col] != want) {
        Fail(ErrorCode::kHeaderMismatch,
             source + ": column " + std::to_string(col + 1) + " should be '" +
                 want + "' but is '" + header[col] + "'");
      }
    }
  }

  Dataset ds;
  ds.layout = layout;
  ds.provenance = Provenance::kIngested;
  std::set<std::string> devices;
  const std::size_t width = LayoutWidth(layout);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = SplitCsvLine(line);
    const std::string where = RowLabel(source, row);
    if (cells.size() != header.size()) {
      Fail(ErrorCode::kRowInvalid, where + ": expected " +
                                       std::to_string(header.size()) +
                                       " cells, found " +
                                       std::to_string(cells.size()));
    }
    auto number = [&](std::size_t col) {
      auto v = ParseNumber(cells[col]);
      if (!v || !std::isfinite(*v)) {
        Fail(ErrorCode::kParse, where + ": column '" + header[col] +
                                    "' is not numeric: '" + cells[col] + "'");
      }
      return *v;
    };
    TimingSample s;
    s.features.layout = layout;
    for (std::size_t c = 0; c < width; ++c) s.features.values.push_back(number(c));
    CheckOneHot(s.features, where);
    s.device = cells[width];
    if (s.device.empty()) Fail(ErrorCode::kRowInvalid, where + ": empty device");
    std::vector<PhaseTimes> raw(repeats);
    for (std::size_t r = 0; r < repeats; ++r) {
      double* slots[] = {&raw[r].pre, &raw[r].exe, &raw[r].post};
      for (std::size_t p = 0; p < 3; ++p) {
        const std::size_t col = width + 1 + 3 * r + p;
        const double v = number(col);
        if (v < 0) {
          Fail(ErrorCode::kRowInvalid, where + ": " + header[col] + " = " +
                                           cells[col] + " is negative");
        }
        *slots[p] = v;
      }
    }
    const CleanedTimes cleaned = CleanOutliers(raw);
    s.times = cleaned.times;
    s.repeats_used = cleaned.repeats_used;
    devices.insert(s.device);
    ds.samples.push_back(std::move(s));
  }
  if (ds.samples.empty()) Fail(ErrorCode::kEmptyInput, source + ": no data rows");
  ds.device_names.assign(devices.begin(), devices.end());
  ds.generation = json{{"source", source}, {"repeats", repeats}};
  return ds;
}

Dataset IngestProfileCsv(const std::filesystem::path& path, LayoutId layout) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  return IngestProfileCsv(in, layout, path.string());
}

std::pair<Dataset, Dataset> SplitDataset(const Dataset& ds,
                                         double train_fraction,
                                         std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    Fail(ErrorCode::kUsage, "train fraction must lie in (0, 1)");
  }
  if (ds.samples.empty()) Fail(ErrorCode::kEmptyInput, "cannot split an empty dataset");
  std::vector<std::size_t> order(ds.samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(order.size())));

  auto make = [&](std::size_t begin, std::size_t end, const char* part) {
    Dataset out;
    out.layout = ds.layout;
    out.provenance = ds.provenance;
    out.device_names = ds.device_names;
    out.generation = ds.generation;
    out.generation["split"] = {{"part", part},
                               {"train_fraction", train_fraction},
                               {"seed", seed}};
    for (std::size_t i = begin; i < end; ++i) out.samples.push_back(ds.samples[order[i]]);
    return out;
  };
  return {make(0, n_train, "train"), make(n_train, order.size(), "test")};
}

Dataset MergeDatasets(std::span<const Dataset> parts) {
  if (parts.empty()) Fail(ErrorCode::kEmptyInput, "nothing to merge");
  Dataset out;
  out.layout = parts.front().layout;
  out.provenance = parts.front().provenance;
  std::set<std::string> devices;
  json sources = json::array();
  for (const auto& p : parts) {
    if (p.layout != out.layout) {
      Fail(ErrorCode::kLayoutMismatch,
           "cannot merge " + p.layout.ToString() + " into " +
               out.layout.ToString());
    }
    out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
    devices.insert(p.device_names.begin(), p.device_names.end());
    sources.push_back(p.generation);
  }
  out.device_names.assign(devices.begin(), devices.end());
  out.generation = json{{"merged", std::move(sources)}};
  return out;
}

void SaveDataset(const Dataset& ds, const std::filesystem::path& dir) {
  EnsureDir(dir);
  const auto names = FeatureNames(ds.layout);
  json meta{{"format_version", kDatasetFormatVersion},
            {"layout", ds.layout.ToString()},
            {"provenance",
             ds.provenance == Provenance::kSynthetic ? "synthetic" : "ingested"},
            {"devices", ds.device_names},
            {"sample_count", ds.samples.size()},
            {"feature_names", names},
            {"generation", ds.generation}};
  WriteTextFile(dir / "meta.json", meta.dump(2) + "\n");

  std::string csv;
  for (const auto& n : names) csv += n + ",";
  csv += "device,t_pre,t_exe,t_post,repeats_used\n";
  for (const auto& s : ds.samples) {
    if (s.features.layout != ds.layout) {
      Fail(ErrorCode::kLayoutMismatch, "sample layout differs from dataset");
    }
    for (double v : s.features.values) csv += FormatDouble(v) + ",";
    csv += s.device + "," + FormatDouble(s.times.pre) + "," +
           FormatDouble(s.times.exe) + "," + FormatDouble(s.times.post) + "," +
           std::to_string(s.repeats_used) + "\n";
  }
  WriteTextFile(dir / "samples.csv", csv);
}

Dataset LoadDataset(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "meta.json")) {
    Fail(ErrorCode::kIo, "no dataset at " + dir.string() + " (meta.json missing)");
  }
  const json meta = ReadJsonFile(dir / "meta.json");
  Dataset ds;
  try {
    if (meta.at("format_version").get<int>() != kDatasetFormatVersion) {
      Fail(ErrorCode::kVersion, dir.string() + ": unsupported dataset version");
    }
    ds.layout = LayoutId::Parse(meta.at("layout").get<std::string>());
    ds.provenance = meta.at("provenance").get<std::string>() == "ingested"
                        ? Provenance::kIngested
                        : Provenance::kSynthetic;
    ds.device_names = meta.at("devices").get<std::vector<std::string>>();
    if (meta.contains("generation")) ds.generation = meta["generation"];
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, dir.string() + "/meta.json: " + e.what());
  }

  const auto csv_path = dir / "samples.csv";
  std::ifstream in(csv_path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorCode::kEmptyInput, csv_path.string() + ": empty");
  auto expected = FeatureNames(ds.layout);
  for (const char* extra : {"device", "t_pre", "t_exe", "t_post", "repeats_used"}) {
    expected.push_back(extra);
  }
  const auto header = SplitCsvLine(line);
  if (header != expected) {
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i >= header.size() || header[i] != expected[i]) {
        Fail(ErrorCode::kHeaderMismatch,
             csv_path.string() + ": expected column '" + expected[i] +
                 "' at position " + std::to_string(i + 1));
      }
    }
    Fail(ErrorCode::kHeaderMismatch, csv_path.string() + ": unexpected extra columns");
  }
  const std::size_t width = LayoutWidth(ds.layout);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = SplitCsvLine(line);
    const std::string where = RowLabel(csv_path.string(), row);
    if (cells.size() != expected.size()) {
      Fail(ErrorCode::kRowInvalid, where + ": wrong cell count");
    }
    auto number = [&](std::size_t col) {
      auto v = ParseNumber(cells[col]);
      if (!v) {
        Fail(ErrorCode::kParse, where + ": column '" + expected[col] +
                                    "' is not numeric");
      }
      return *v;
    };
    TimingSample s;
    s.features.layout = ds.layout;
    for (std::size_t c = 0; c < width; ++c) s.features.values.push_back(number(c));
    s.device = cells[width];
    s.times = {number(width + 1), number(width + 2), number(width + 3)};
    s.repeats_used = static_cast<int>(number(width + 4));
    if (s.times.pre < 0 || s.times.exe < 0 || s.times.post < 0) {
      Fail(ErrorCode::kRowInvalid, where + ": negative phase time");
    }
    if (s.repeats_used < 1) Fail(ErrorCode::kRowInvalid, where + ": repeats_used < 1");
    ds.samples.push_back(std::move(s));
  }
  if (ds.device_names.empty()) {
    Fail(ErrorCode::kParse, dir.string() + ": dataset lists no devices");
  }
  return ds;
}

}  // namespace latency_atlas
