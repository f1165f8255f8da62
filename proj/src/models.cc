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

#include "latency_atlas/models.hpp"

#include <zlib.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "latency_atlas/error.hpp"
#include "latency_atlas/seed.hpp"

namespace latency_atlas {

using nlohmann::json;

std::string_view ToString(Architecture arch) {
  return arch == Architecture::kPerfNet ? "perfnet" : "perfnetv2";
}

std::string_view ToString(Phase phase) {
  switch (phase) {
    case Phase::kPre: return "pre";
    case Phase::kExe: return "exe";
    case Phase::kPost: return "post";
  }
  return "?";
}

std::string_view ToString(LossKind loss) {
  return loss == LossKind::kMaple ? "maple" : "msle";
}

Architecture ParseArchitecture(std::string_view text) {
  if (text == "perfnet") return Architecture::kPerfNet;
  if (text == "perfnetv2") return Architecture::kPerfNetV2;
  Fail(ErrorCode::kUsage, "unknown architecture '" + std::string(text) +
                              "' (expected perfnet or perfnetv2)");
}

Phase ParsePhase(std::string_view text) {
  for (Phase p : kAllPhases) {
    if (ToString(p) == text) return p;
  }
  Fail(ErrorCode::kUsage, "unknown phase '" + std::string(text) + "'");
}

LossKind ParseLossKind(std::string_view text) {
  if (text == "maple") return LossKind::kMaple;
  if (text == "msle") return LossKind::kMsle;
  Fail(ErrorCode::kUsage, "unknown loss '" + std::string(text) +
                              "' (expected maple or msle)");
}

double PhaseValue(const PhaseTimes& t, Phase phase) {
  switch (phase) {
    case Phase::kPre: return t.pre;
    case Phase::kExe: return t.exe;
    case Phase::kPost: return t.post;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Architectures

json ArchitectureConfigToJson(const ArchitectureConfig& c) {
  return json{{"perfnet_widths", c.perfnet_widths},
              {"perfnetv2_widths", c.perfnetv2_widths},
              {"conv1_filters", c.conv1_filters},
              {"conv1_kernel", c.conv1_kernel},
              {"conv2_filters", c.conv2_filters},
              {"conv2_kernel", c.conv2_kernel},
              {"dropout", c.dropout}};
}

ArchitectureConfig ArchitectureConfigFromJson(const json& j) {
  ArchitectureConfig c;
  if (!j.is_object()) Fail(ErrorCode::kParse, "architecture config must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "perfnet_widths") c.perfnet_widths = value.get<std::vector<int>>();
      else if (key == "perfnetv2_widths") c.perfnetv2_widths = value.get<std::vector<int>>();
      else if (key == "conv1_filters") c.conv1_filters = value.get<int>();
      else if (key == "conv1_kernel") c.conv1_kernel = value.get<int>();
      else if (key == "conv2_filters") c.conv2_filters = value.get<int>();
      else if (key == "conv2_kernel") c.conv2_kernel = value.get<int>();
      else if (key == "dropout") c.dropout = value.get<double>();
      else Fail(ErrorCode::kParse, "unknown architecture key '" + key + "'");
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("architecture config: ") + e.what());
  }
  auto positive = [](const std::vector<int>& v) {
    return std::all_of(v.begin(), v.end(), [](int w) { return w > 0; });
  };
  if (!positive(c.perfnet_widths) || !positive(c.perfnetv2_widths) ||
      c.conv1_filters < 1 || c.conv1_kernel < 1 || c.conv2_filters < 1 ||
      c.conv2_kernel < 1 || c.dropout < 0 || c.dropout >= 1) {
    Fail(ErrorCode::kValidation, "architecture config values out of range");
  }
  return c;
}

nn::Network BuildArchitecture(Architecture arch, std::size_t input_width,
                              const ArchitectureConfig& config) {
  if (input_width == 0) Fail(ErrorCode::kShapeMismatch, "input width must be >= 1");
  nn::Network net;
  std::size_t width = input_width;
  if (arch == Architecture::kPerfNetV2) {
    const std::size_t needed = config.conv1_kernel + config.conv2_kernel - 1;
    if (input_width < needed) {
      Fail(ErrorCode::kShapeMismatch,
           "PerfNetV2 needs at least " + std::to_string(needed) +
               " input features, got " + std::to_string(input_width));
    }
    net.push_back(nn::LayerParams::Conv1D(1, config.conv1_filters, config.conv1_kernel));
    net.push_back(nn::LayerParams::Relu());
    net.push_back(nn::LayerParams::Conv1D(config.conv1_filters, config.conv2_filters,
                                          config.conv2_kernel));
    net.push_back(nn::LayerParams::Relu());
    net.push_back(nn::LayerParams::Flatten());
    width = (input_width - needed + 1) * config.conv2_filters;
  }
  const auto& widths = arch == Architecture::kPerfNetV2 ? config.perfnetv2_widths
                                                        : config.perfnet_widths;
  for (int w : widths) {
    net.push_back(nn::LayerParams::Dense(static_cast<int>(width), w));
    net.push_back(nn::LayerParams::Relu());
    width = w;
  }
  net.push_back(nn::LayerParams::Dropout(config.dropout));
  net.push_back(nn::LayerParams::Dense(static_cast<int>(width), 1));
  net.push_back(nn::LayerParams::Softplus());
  return net;
}

// ---------------------------------------------------------------------------
// Training

TrainConfig TrainConfig::Full() {
  TrainConfig c;
  c.epochs = 1000;
  c.halve_every = 400;
  return c;
}

double TrainConfig::LearningRate(int epoch) const {
  return lr0 / std::exp2(static_cast<double>(epoch / halve_every));
}

json TrainConfigToJson(const TrainConfig& c) {
  return json{{"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"lr0", c.lr0},
              {"halve_every", c.halve_every}};
}

TrainConfig TrainConfigFromJson(const json& j, TrainConfig c) {
  if (!j.is_object()) Fail(ErrorCode::kParse, "schedule config must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "batch_size") c.batch_size = value.get<int>();
      else if (key == "lr0") c.lr0 = value.get<double>();
      else if (key == "halve_every") c.halve_every = value.get<int>();
      else Fail(ErrorCode::kParse, "unknown schedule key '" + key + "'");
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("schedule config: ") + e.what());
  }
  return c;
}

namespace {

void CheckConfig(const TrainConfig& c) {
  if (c.epochs < 1) Fail(ErrorCode::kValidation, "epochs must be >= 1");
  if (c.batch_size < 1) Fail(ErrorCode::kValidation, "batch size must be >= 1");
  if (!(c.lr0 > 0)) Fail(ErrorCode::kValidation, "lr0 must be > 0");
  if (c.halve_every < 1) Fail(ErrorCode::kValidation, "halve_every must be >= 1");
}

nn::Tensor2D FeatureMatrix(const Dataset& ds) {
  const std::size_t width = LayoutWidth(ds.layout);
  nn::Tensor2D x(ds.samples.size(), width);
  for (std::size_t r = 0; r < ds.samples.size(); ++r) {
    const auto& v = ds.samples[r].features.values;
    if (v.size() != width) {
      Fail(ErrorCode::kLayoutMismatch, "sample " + std::to_string(r) +
                                           " has " + std::to_string(v.size()) +
                                           " features, layout " +
                                           ds.layout.ToString() + " expects " +
                                           std::to_string(width));
    }
    std::copy(v.begin(), v.end(), x.row(r).begin());
  }
  return x;
}

std::vector<double> Targets(const Dataset& ds, Phase phase) {
  std::vector<double> y;
  y.reserve(ds.samples.size());
  for (const auto& s : ds.samples) y.push_back(PhaseValue(s.times, phase));
  return y;
}

nn::LossResult Loss(LossKind kind, std::span<const double> y_hat,
                    std::span<const double> y) {
  return kind == LossKind::kMaple ? nn::MapleLoss(y_hat, y)
                                  : nn::MsleLoss(y_hat, y);
}

constexpr std::size_t kPredictChunk = 4096;

std::vector<double> PredictScaled(const nn::Network& net, const nn::Tensor2D& x) {
  std::vector<double> out;
  out.reserve(x.rows);
  for (std::size_t begin = 0; begin < x.rows; begin += kPredictChunk) {
    const std::size_t end = std::min(x.rows, begin + kPredictChunk);
    nn::Tensor2D chunk(end - begin, x.cols);
    std::copy(x.data.begin() + begin * x.cols, x.data.begin() + end * x.cols,
              chunk.data.begin());
    const nn::Tensor2D y = nn::Forward(net, chunk, false);
    out.insert(out.end(), y.data.begin(), y.data.end());
  }
  return out;
}

void CheckDatasetLayout(const PhaseModel& model, const Dataset& ds) {
  if (ds.layout != model.layout) {
    Fail(ErrorCode::kLayoutMismatch,
         "dataset layout " + ds.layout.ToString() + " does not match model layout " +
             model.layout.ToString());
  }
}

}  // namespace

PhaseModel TrainPhaseModel(const Dataset& train, Phase phase,
                           Architecture arch, LossKind loss,
                           const TrainConfig& config, std::uint64_t seed,
                           const TrainOptions& options) {
  CheckConfig(config);
  if (train.samples.empty()) Fail(ErrorCode::kEmptyInput, "training set is empty");
  const nn::Tensor2D raw = FeatureMatrix(train);
  const std::vector<double> y = Targets(train, phase);
  if (loss == LossKind::kMaple) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (!(y[i] > 0)) {
        Fail(ErrorCode::kDomain,
             "MAPLE needs strictly positive targets; sample " + std::to_string(i) +
                 " has t_" + std::string(ToString(phase)) + " = " + FormatDouble(y[i]));
      }
    }
  }
  if (options.validation && options.validation->layout != train.layout) {
    Fail(ErrorCode::kLayoutMismatch, "validation layout " +
                                         options.validation->layout.ToString() +
                                         " differs from " + train.layout.ToString());
  }

  PhaseModel model;
  model.architecture = arch;
  model.loss = loss;
  model.layout = train.layout;
  model.phase = phase;
  model.scaler = nn::StandardScaler::Fit(raw);
  model.net = BuildArchitecture(arch, raw.cols, options.architecture);
  nn::InitializeWeights(model.net, DeriveSeed(seed, {1}));
  model.meta.seed = seed;
  model.meta.epochs = config.epochs;

  const nn::Tensor2D x = model.scaler.Transform(raw);
  const std::size_t n = x.rows;
  const std::size_t width = x.cols;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(DeriveSeed(seed, {2}));
  nn::AdamState adam = nn::AdamState::For(model.net);
  nn::ForwardCache cache;
  std::uint64_t step = 0;

  auto full_loss = [&] { return Loss(loss, PredictScaled(model.net, x), y).loss; };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.LearningRate(epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      nn::Tensor2D xb(end - begin, width);
      std::vector<double> yb(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t src = order[i];
        std::copy(x.data.begin() + src * width, x.data.begin() + (src + 1) * width,
                  xb.data.begin() + (i - begin) * width);
        yb[i - begin] = y[src];
      }
      const nn::Tensor2D out =
          nn::Forward(model.net, xb, true, DeriveSeed(seed, {3, step++}), &cache);
      const nn::LossResult l = Loss(loss, out.data, yb);
      nn::Tensor2D dy(out.rows, 1);
      dy.data = l.grad;
      const auto grads = nn::Backward(model.net, cache, dy);
      nn::AdamStep(model.net, grads, adam, lr);
    }
    if (options.on_epoch) options.on_epoch(epoch, full_loss());
  }

  model.meta.final_train_loss = full_loss();
  if (options.validation) {
    model.meta.final_validation_loss = EvaluateLoss(model, *options.validation);
  }
  return model;
}

double EvaluateLoss(const PhaseModel& model, const Dataset& ds) {
  CheckDatasetLayout(model, ds);
  if (ds.samples.empty()) Fail(ErrorCode::kEmptyInput, "cannot evaluate an empty dataset");
  const nn::Tensor2D x = model.scaler.Transform(FeatureMatrix(ds));
  return Loss(model.loss, PredictScaled(model.net, x), Targets(ds, model.phase)).loss;
}

double PredictPhase(const PhaseModel& model, const FeatureVector& fv) {
  if (fv.layout != model.layout || fv.values.size() != LayoutWidth(model.layout)) {
    Fail(ErrorCode::kLayoutMismatch, "feature layout " + fv.layout.ToString() +
                                         " does not match model layout " +
                                         model.layout.ToString());
  }
  nn::Tensor2D x(1, fv.values.size());
  model.scaler.TransformRow(fv.values, x.row(0));
  return nn::Forward(model.net, x, false).data[0];
}

std::vector<double> PredictPhase(const PhaseModel& model,
                                 std::span<const TimingSample> samples) {
  const std::size_t width = LayoutWidth(model.layout);
  nn::Tensor2D x(samples.size(), width);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const auto& fv = samples[r].features;
    if (fv.layout != model.layout || fv.values.size() != width) {
      Fail(ErrorCode::kLayoutMismatch, "sample " + std::to_string(r) + " layout " +
                                           fv.layout.ToString() +
                                           " does not match model layout " +
                                           model.layout.ToString());
    }
    model.scaler.TransformRow(fv.values, x.row(r));
  }
  return PredictScaled(model.net, x);
}

// ---------------------------------------------------------------------------
// Bundles

const PhaseModel& PredictorBundle::Model(LayerKind kind, Phase phase) const {
  const auto it = models.find({kind, phase});
  if (it == models.end()) {
    Fail(ErrorCode::kValidation, "bundle has no " + std::string(ToString(kind)) +
                                     "/" + std::string(ToString(phase)) + " model");
  }
  return it->second;
}

void ValidateBundle(const PredictorBundle& b) {
  if (b.mode == Mode::kPerDevice && !b.device) {
    Fail(ErrorCode::kValidation, "per-device bundle names no device");
  }
  if (b.mode == Mode::kUnseen && b.pool.empty()) {
    Fail(ErrorCode::kValidation, "unseen bundle lists no pooled devices");
  }
  for (LayerKind kind : kAllLayerKinds) {
    for (Phase phase : kAllPhases) {
      const PhaseModel& m = b.Model(kind, phase);
      const LayoutId want{kind, b.task, b.mode};
      if (m.layout != want || m.phase != phase) {
        Fail(ErrorCode::kValidation, "model under " + want.ToString() + "/" +
                                         std::string(ToString(phase)) + " has layout " +
                                         m.layout.ToString());
      }
      const std::size_t out = nn::OutputWidth(m.net, LayoutWidth(want));
      if (out != 1 || m.scaler.means.size() != LayoutWidth(want)) {
        Fail(ErrorCode::kValidation, "model " + want.ToString() + "/" +
                                         std::string(ToString(phase)) +
                                         " has inconsistent shapes");
      }
    }
  }
  if (b.models.size() != 9) Fail(ErrorCode::kValidation, "bundle must hold exactly 9 models");
}

PredictorBundle TrainBundle(const std::map<LayerKind, Dataset>& data,
                            const BundleTrainOptions& options,
                            std::optional<DeviceSpec> device,
                            std::vector<DeviceSpec> pool) {
  if (data.empty()) Fail(ErrorCode::kEmptyInput, "no training data");
  const LayoutId first = data.begin()->second.layout;
  for (LayerKind kind : kAllLayerKinds) {
    const auto it = data.find(kind);
    if (it == data.end()) {
      Fail(ErrorCode::kUsage, "no training data for layer kind " +
                                  std::string(ToString(kind)));
    }
    const LayoutId want{kind, first.task, first.mode};
    if (it->second.layout != want) {
      Fail(ErrorCode::kLayoutMismatch, "dataset for " + std::string(ToString(kind)) +
                                           " has layout " + it->second.layout.ToString() +
                                           ", expected " + want.ToString());
    }
  }

  PredictorBundle bundle;
  bundle.task = first.task;
  bundle.mode = first.mode;
  bundle.device = std::move(device);
  bundle.pool = std::move(pool);

  struct Job {
    LayerKind kind;
    Phase phase;
    PhaseModel model;
  };
  std::vector<Job> jobs;
  for (LayerKind kind : kAllLayerKinds) {
    for (Phase phase : kAllPhases) jobs.push_back({kind, phase, {}});
  }
  unsigned threads = options.threads ? options.threads
                                     : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, jobs.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      Job& job = jobs[i];
      try {
        TrainOptions to;
        to.architecture = options.arch_config;
        const auto v = options.validation.find(job.kind);
        if (v != options.validation.end()) to.validation = v->second;
        const std::uint64_t seed = DeriveSeed(
            options.seed, {static_cast<std::uint64_t>(job.kind),
                           static_cast<std::uint64_t>(job.phase)});
        job.model = TrainPhaseModel(data.at(job.kind), job.phase,
                                    options.architecture, options.loss,
                                    options.config, seed, to);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool_threads;
    for (unsigned t = 0; t < threads; ++t) pool_threads.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  for (auto& job : jobs) bundle.models[{job.kind, job.phase}] = std::move(job.model);
  ValidateBundle(bundle);
  return bundle;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[8] = {'L', 'A', 'T', 'B', 'N', 'D', 'L', '\0'};
constexpr std::size_t kHeaderBytes = 8 + 4 + 8;
constexpr std::size_t kTrailerBytes = 4;

template <typename T>
void PutLE(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

template <typename T>
T GetLE(std::string_view bytes, std::size_t offset) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

std::uint32_t Crc32(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large inputs in pieces.
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const std::size_t len = std::min<std::size_t>(bytes.size() - offset, 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + offset),
                static_cast<uInt>(len));
    offset += len;
  }
  return static_cast<std::uint32_t>(crc);
}

class BlobWriter {
 public:
  json Add(std::span<const double> values) {
    json ref{{"offset", blob_.size()}, {"count", values.size()}};
    blob_.insert(blob_.end(), values.begin(), values.end());
    return ref;
  }
  void AppendTo(std::string& out) const {
    for (double v : blob_) PutLE(out, std::bit_cast<std::uint64_t>(v));
  }

 private:
  std::vector<double> blob_;
};

class BlobReader {
 public:
  BlobReader(std::string_view bytes, std::string source)
      : bytes_(bytes), source_(std::move(source)) {}
  std::vector<double> Get(const json& ref, std::size_t expected) const {
    const auto offset = ref.at("offset").get<std::size_t>();
    const auto count = ref.at("count").get<std::size_t>();
    if (count != expected) {
      Fail(ErrorCode::kParse, source_ + ": blob has " + std::to_string(count) +
                                  " values, expected " + std::to_string(expected));
    }
    if (offset > bytes_.size() / 8 || count > bytes_.size() / 8 - offset) {
      Fail(ErrorCode::kParse, source_ + ": blob reference out of range");
    }
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
      out[i] = std::bit_cast<double>(GetLE<std::uint64_t>(bytes_, (offset + i) * 8));
    }
    return out;
  }
  std::size_t doubles() const { return bytes_.size() / 8; }

 private:
  std::string_view bytes_;
  std::string source_;
};

json ModelToJson(const PhaseModel& m, BlobWriter& blobs) {
  json layers = json::array();
  for (const auto& p : m.net) {
    json l{{"type", nn::ToString(p.type)}};
    switch (p.type) {
      case nn::LayerType::kDense:
      case nn::LayerType::kConv1D:
        l["in"] = p.in;
        l["out"] = p.out;
        if (p.type == nn::LayerType::kConv1D) {
          l["kernel"] = p.kernel;
          l["stride"] = p.stride;
        }
        l["weights"] = blobs.Add(p.weights);
        l["biases"] = blobs.Add(p.biases);
        break;
      case nn::LayerType::kDropout:
        l["rate"] = p.rate;
        break;
      default:
        break;
    }
    layers.push_back(std::move(l));
  }
  std::vector<double> constant(m.scaler.constant.begin(), m.scaler.constant.end());
  json meta{{"seed", m.meta.seed},
            {"epochs", m.meta.epochs},
            {"final_train_loss", m.meta.final_train_loss}};
  meta["final_validation_loss"] = m.meta.final_validation_loss
                                      ? json(*m.meta.final_validation_loss)
                                      : json(nullptr);
  return json{{"kind", ToString(m.layout.kind)},
              {"phase", ToString(m.phase)},
              {"layout", m.layout.ToString()},
              {"feature_names", FeatureNames(m.layout)},
              {"architecture", ToString(m.architecture)},
              {"loss", ToString(m.loss)},
              {"scaler",
               {{"means", blobs.Add(m.scaler.means)},
                {"stds", blobs.Add(m.scaler.stds)},
                {"constant", blobs.Add(constant)}}},
              {"layers", std::move(layers)},
              {"training_meta", std::move(meta)}};
}

nn::LayerType ParseLayerType(const std::string& s) {
  for (auto t : {nn::LayerType::kDense, nn::LayerType::kConv1D, nn::LayerType::kRelu,
                 nn::LayerType::kFlatten, nn::LayerType::kDropout,
                 nn::LayerType::kSoftplus}) {
    if (s == nn::ToString(t)) return t;
  }
  Fail(ErrorCode::kParse, "unknown network layer type '" + s + "'");
}

PhaseModel ModelFromJson(const json& j, const BlobReader& blobs) {
  PhaseModel m;
  m.layout = LayoutId::Parse(j.at("layout").get<std::string>());
  m.phase = ParsePhase(j.at("phase").get<std::string>());
  m.architecture = ParseArchitecture(j.at("architecture").get<std::string>());
  m.loss = ParseLossKind(j.at("loss").get<std::string>());
  if (j.at("feature_names").get<std::vector<std::string>>() != FeatureNames(m.layout)) {
    Fail(ErrorCode::kLayoutMismatch,
         "stored feature names differ from layout " + m.layout.ToString());
  }
  const std::size_t width = LayoutWidth(m.layout);
  const json& sc = j.at("scaler");
  m.scaler.means = blobs.Get(sc.at("means"), width);
  m.scaler.stds = blobs.Get(sc.at("stds"), width);
  for (double c : blobs.Get(sc.at("constant"), width)) m.scaler.constant.push_back(c != 0);
  for (const json& l : j.at("layers")) {
    const nn::LayerType type = ParseLayerType(l.at("type").get<std::string>());
    nn::LayerParams p;
    switch (type) {
      case nn::LayerType::kDense:
        p = nn::LayerParams::Dense(l.at("in").get<int>(), l.at("out").get<int>());
        break;
      case nn::LayerType::kConv1D:
        p = nn::LayerParams::Conv1D(l.at("in").get<int>(), l.at("out").get<int>(),
                                    l.at("kernel").get<int>(), l.at("stride").get<int>());
        break;
      case nn::LayerType::kDropout:
        p = nn::LayerParams::Dropout(l.at("rate").get<double>());
        break;
      default:
        p.type = type;
        break;
    }
    if (p.has_params()) {
      p.weights = blobs.Get(l.at("weights"), p.weights.size());
      p.biases = blobs.Get(l.at("biases"), p.biases.size());
    }
    m.net.push_back(std::move(p));
  }
  const json& meta = j.at("training_meta");
  m.meta.seed = meta.at("seed").get<std::uint64_t>();
  m.meta.epochs = meta.at("epochs").get<int>();
  m.meta.final_train_loss = meta.at("final_train_loss").get<double>();
  if (!meta.at("final_validation_loss").is_null()) {
    m.meta.final_validation_loss = meta["final_validation_loss"].get<double>();
  }
  return m;
}

}  // namespace

std::string SerializeBundle(const PredictorBundle& b) {
  ValidateBundle(b);
  BlobWriter blobs;
  json models = json::array();
  for (const auto& [key, model] : b.models) models.push_back(ModelToJson(model, blobs));
  json manifest{{"format_version", b.format_version},
                {"task", ToString(b.task)},
                {"mode", ToString(b.mode)},
                {"created_at", b.created_at}};
  manifest["device"] = b.device ? DeviceToJson(*b.device) : json(nullptr);
  json pool = json::array();
  for (const auto& d : b.pool) pool.push_back(DeviceToJson(d));
  manifest["pool"] = std::move(pool);
  manifest["models"] = std::move(models);
  const std::string text = manifest.dump();

  std::string out(kMagic, sizeof(kMagic));
  PutLE<std::uint32_t>(out, static_cast<std::uint32_t>(b.format_version));
  PutLE<std::uint64_t>(out, text.size());
  out += text;
  blobs.AppendTo(out);
  PutLE<std::uint32_t>(out, Crc32(out));
  return out;
}

PredictorBundle DeserializeBundle(std::string_view bytes, const std::string& source) {
  if (bytes.size() < sizeof(kMagic) ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    Fail(ErrorCode::kParse, source + ": not a predictor bundle");
  }
  if (bytes.size() < kHeaderBytes + kTrailerBytes) {
    Fail(ErrorCode::kChecksum, source + ": truncated bundle");
  }
  const auto version = GetLE<std::uint32_t>(bytes, 8);
  if (version != static_cast<std::uint32_t>(kBundleFormatVersion)) {
    Fail(ErrorCode::kVersion, source + ": bundle format_version " +
                                  std::to_string(version) + ", this build reads " +
                                  std::to_string(kBundleFormatVersion));
  }
  const std::size_t body = bytes.size() - kTrailerBytes;
  if (GetLE<std::uint32_t>(bytes, body) != Crc32(bytes.substr(0, body))) {
    Fail(ErrorCode::kChecksum, source + ": checksum mismatch (corrupt or truncated)");
  }
  const auto manifest_len = GetLE<std::uint64_t>(bytes, 12);
  if (manifest_len > body - kHeaderBytes ||
      (body - kHeaderBytes - manifest_len) % 8 != 0) {
    Fail(ErrorCode::kParse, source + ": inconsistent section sizes");
  }
  const std::string_view manifest_text = bytes.substr(kHeaderBytes, manifest_len);
  const BlobReader blobs(bytes.substr(kHeaderBytes + manifest_len,
                                      body - kHeaderBytes - manifest_len),
                         source);
  PredictorBundle b;
  try {
    const json m = json::parse(manifest_text);
    b.format_version = m.at("format_version").get<int>();
    if (b.format_version != kBundleFormatVersion) {
      Fail(ErrorCode::kVersion, source + ": manifest format_version mismatch");
    }
    b.task = ParseTask(m.at("task").get<std::string>());
    b.mode = ParseMode(m.at("mode").get<std::string>());
    b.created_at = m.at("created_at").get<std::string>();
    if (!m.at("device").is_null()) b.device = DeviceFromJson(m["device"]);
    for (const auto& d : m.at("pool")) b.pool.push_back(DeviceFromJson(d));
    for (const auto& mj : m.at("models")) {
      PhaseModel model = ModelFromJson(mj, blobs);
      const auto key = std::pair{model.layout.kind, model.phase};
      if (!b.models.emplace(key, std::move(model)).second) {
        Fail(ErrorCode::kParse, source + ": duplicate model entry");
      }
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, source + ": bad manifest: " + e.what());
  }
  ValidateBundle(b);
  return b;
}

void SaveBundle(const PredictorBundle& bundle, const std::filesystem::path& path) {
  const std::string bytes = SerializeBundle(bundle);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

PredictorBundle LoadBundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open bundle " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return DeserializeBundle(ss.str(), path.string());
}

json BundleSummary(const PredictorBundle& b) {
  json models = json::array();
  for (const auto& [key, m] : b.models) {
    json meta{{"seed", m.meta.seed},
              {"epochs", m.meta.epochs},
              {"final_train_loss", m.meta.final_train_loss}};
    meta["final_validation_loss"] = m.meta.final_validation_loss
                                        ? json(*m.meta.final_validation_loss)
                                        : json(nullptr);
    models.push_back({{"layout", m.layout.ToString()},
                      {"phase", ToString(m.phase)},
                      {"architecture", ToString(m.architecture)},
                      {"loss", ToString(m.loss)},
                      {"parameters", nn::ParameterCount(m.net)},
                      {"training_meta", std::move(meta)}});
  }
  json out{{"format_version", b.format_version},
           {"task", ToString(b.task)},
           {"mode", ToString(b.mode)},
           {"created_at", b.created_at},
           {"models", std::move(models)}};
  out["device"] = b.device ? json(b.device->name) : json(nullptr);
  json pool = json::array();
  for (const auto& d : b.pool) pool.push_back(d.name);
  out["pool"] = std::move(pool);
  return out;
}

}  // namespace latency_atlas
