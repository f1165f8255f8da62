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

#include "latency_atlas/netspec.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "latency_atlas/error.hpp"

namespace latency_atlas {

using nlohmann::json;

namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string LayerLabel(const LayerSpec& layer, std::size_t index) {
  std::ostringstream os;
  os << "layer " << index;
  if (!layer.name.empty()) os << " (" << layer.name << ")";
  return os.str();
}

void CheckRange(const LayerSpec& layer, std::size_t index,
                std::string_view field, std::int64_t value,
                FeatureRange range) {
  if (!range.Contains(value)) {
    std::ostringstream os;
    os << LayerLabel(layer, index) << ": field " << field << " = " << value
       << " outside [" << range.lo << ", " << range.hi << "]";
    Fail(ErrorCode::kValidation, os.str());
  }
}

// Window arithmetic shared by Conv2D and Pooling.
int WindowOutput(int in, int window, int stride, Padding padding) {
  if (padding == Padding::kSame) return (in + stride - 1) / stride;
  if (window > in) return 0;
  return (in - window) / stride + 1;
}

}  // namespace

std::string_view ToString(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2D: return "conv2d";
    case LayerKind::kPooling: return "pooling";
    case LayerKind::kDense: return "dense";
  }
  return "?";
}

std::string_view ToString(Padding padding) {
  return padding == Padding::kSame ? "same" : "valid";
}

std::string_view ToString(Activation activation) {
  return activation == Activation::kRelu ? "relu" : "none";
}

std::string_view ToString(Task task) {
  return task == Task::kTraining ? "training" : "inference";
}

std::string_view ToString(Mode mode) {
  return mode == Mode::kUnseen ? "unseen" : "per-device";
}

std::string_view ToString(Optimizer optimizer) {
  switch (optimizer) {
    case Optimizer::kSgd: return "sgd";
    case Optimizer::kAdagrad: return "adagrad";
    case Optimizer::kRmsprop: return "rmsprop";
    case Optimizer::kAdam: return "adam";
  }
  return "?";
}

LayerKind ParseLayerKind(std::string_view text) {
  const std::string t = Lower(text);
  if (t == "conv2d" || t == "conv") return LayerKind::kConv2D;
  if (t == "pooling" || t == "pool" || t == "maxpool") return LayerKind::kPooling;
  if (t == "dense" || t == "fc") return LayerKind::kDense;
  Fail(ErrorCode::kUsage, "unknown layer kind '" + std::string(text) + "'");
}

Task ParseTask(std::string_view text) {
  const std::string t = Lower(text);
  if (t == "inference") return Task::kInference;
  if (t == "training") return Task::kTraining;
  Fail(ErrorCode::kUsage, "unknown task '" + std::string(text) + "'");
}

Mode ParseMode(std::string_view text) {
  const std::string t = Lower(text);
  if (t == "per-device" || t == "perdevice") return Mode::kPerDevice;
  if (t == "unseen") return Mode::kUnseen;
  Fail(ErrorCode::kUsage, "unknown mode '" + std::string(text) + "'");
}

Optimizer ParseOptimizer(std::string_view text) {
  const std::string t = Lower(text);
  for (Optimizer o : kAllOptimizers) {
    if (ToString(o) == t) return o;
  }
  Fail(ErrorCode::kUsage, "unknown optimizer '" + std::string(text) + "'");
}

LayerSpec MakeConv2D(int batch, int matrix, int kernel, int channels_in,
                     int channels_out, int strides, Padding padding,
                     Activation activation, bool use_bias) {
  LayerSpec l;
  l.kind = LayerKind::kConv2D;
  l.batch_size = batch;
  l.matrix_size = matrix;
  l.kernel_size = kernel;
  l.channels_in = channels_in;
  l.channels_out = channels_out;
  l.strides = strides;
  l.padding = padding;
  l.activation = activation;
  l.use_bias = use_bias;
  return l;
}

LayerSpec MakePooling(int batch, int matrix, int channels, int pool_size,
                      int strides, Padding padding, Activation activation) {
  LayerSpec l;
  l.kind = LayerKind::kPooling;
  l.batch_size = batch;
  l.matrix_size = matrix;
  l.channels_in = channels;
  l.pool_size = pool_size;
  l.strides = strides;
  l.padding = padding;
  l.activation = activation;
  return l;
}

LayerSpec MakeDense(int batch, int dim_input, int dim_output,
                    Activation activation, bool use_bias) {
  LayerSpec l;
  l.kind = LayerKind::kDense;
  l.batch_size = batch;
  l.dim_input = dim_input;
  l.dim_output = dim_output;
  l.activation = activation;
  l.use_bias = use_bias;
  return l;
}

std::string Shape::ToString() const {
  if (flat()) return std::to_string(depth);
  return std::to_string(spatial) + "x" + std::to_string(spatial) + "x" +
         std::to_string(depth);
}

Shape InputShapeOf(const LayerSpec& layer) {
  if (layer.kind == LayerKind::kDense) return Shape::Flat(layer.dim_input);
  return Shape::Spatial(layer.matrix_size, layer.channels_in);
}

Shape InferOutputShape(const LayerSpec& layer, const Shape& input) {
  switch (layer.kind) {
    case LayerKind::kDense: {
      if (input.elements() != layer.dim_input) {
        Fail(ErrorCode::kShapeMismatch,
             "dense layer expects " + std::to_string(layer.dim_input) +
                 " inputs but receives " + input.ToString());
      }
      if (layer.dim_output <= 0) {
        Fail(ErrorCode::kInvalidGeometry, "dense layer has no outputs");
      }
      return Shape::Flat(layer.dim_output);
    }
    case LayerKind::kConv2D:
    case LayerKind::kPooling: {
      if (input.flat()) {
        Fail(ErrorCode::kShapeMismatch,
             std::string(ToString(layer.kind)) +
                 " layer cannot consume flat input " + input.ToString());
      }
      const bool conv = layer.kind == LayerKind::kConv2D;
      const int window = conv ? layer.kernel_size : layer.pool_size;
      if (window <= 0 || layer.strides <= 0 || input.spatial <= 0) {
        Fail(ErrorCode::kInvalidGeometry,
             "non-positive window, stride or input size");
      }
      const int out = WindowOutput(input.spatial, window, layer.strides,
                                   layer.padding);
      if (out <= 0) {
        Fail(ErrorCode::kInvalidGeometry,
             "window " + std::to_string(window) + " exceeds input " +
                 std::to_string(input.spatial) + " with valid padding");
      }
      return Shape::Spatial(out, conv ? layer.channels_out : input.depth);
    }
  }
  Fail(ErrorCode::kInternal, "unreachable layer kind");
}

void ValidateLayer(const LayerSpec& layer, std::size_t index) {
  CheckRange(layer, index, "batch_size", layer.batch_size, ranges::kBatchSize);
  switch (layer.kind) {
    case LayerKind::kConv2D:
      CheckRange(layer, index, "matrix_size", layer.matrix_size,
                 ranges::kMatrixSize);
      CheckRange(layer, index, "kernel_size", layer.kernel_size,
                 ranges::kKernelSize);
      CheckRange(layer, index, "channels_in", layer.channels_in,
                 ranges::kChannels);
      CheckRange(layer, index, "channels_out", layer.channels_out,
                 ranges::kChannels);
      CheckRange(layer, index, "strides", layer.strides, ranges::kStrides);
      if (layer.padding == Padding::kValid &&
          layer.kernel_size > layer.matrix_size) {
        Fail(ErrorCode::kInvalidGeometry,
             LayerLabel(layer, index) + ": kernel_size " +
                 std::to_string(layer.kernel_size) + " exceeds matrix_size " +
                 std::to_string(layer.matrix_size) + " with valid padding");
      }
      break;
    case LayerKind::kPooling:
      CheckRange(layer, index, "matrix_size", layer.matrix_size,
                 ranges::kMatrixSize);
      CheckRange(layer, index, "channels_in", layer.channels_in,
                 ranges::kChannels);
      CheckRange(layer, index, "strides", layer.strides, ranges::kStrides);
      CheckRange(layer, index, "pool_size", layer.pool_size,
                 ranges::kPoolSize);
      if (layer.padding == Padding::kValid &&
          layer.pool_size > layer.matrix_size) {
        Fail(ErrorCode::kInvalidGeometry,
             LayerLabel(layer, index) + ": pool_size " +
                 std::to_string(layer.pool_size) + " exceeds matrix_size " +
                 std::to_string(layer.matrix_size) + " with valid padding");
      }
      break;
    case LayerKind::kDense:
      CheckRange(layer, index, "dim_input", layer.dim_input, ranges::kDims);
      CheckRange(layer, index, "dim_output", layer.dim_output, ranges::kDims);
      break;
  }
}

// ---------------------------------------------------------------------------
// Devices

void ValidateDevice(const DeviceSpec& d) {
  const std::pair<const char*, double> fields[] = {
      {"basic_clock_mhz", d.basic_clock_mhz},
      {"cuda_cores", d.cuda_cores},
      {"memory_clock_mhz", d.memory_clock_mhz},
      {"memory_bandwidth_gbs", d.memory_bandwidth_gbs},
      {"peak_tflops", d.peak_tflops}};
  for (const auto& [name, value] : fields) {
    if (!(value > 0)) {
      Fail(ErrorCode::kValidation, "device '" + d.name + "': " + name +
                                       " must be positive");
    }
  }
}

std::vector<std::string> DeviceRangeWarnings(const DeviceSpec& d) {
  struct Bound {
    const char* name;
    double value, lo, hi;
  };
  const Bound bounds[] = {
      {"basic_clock_mhz", d.basic_clock_mhz, 1076, 1607},
      {"cuda_cores", d.cuda_cores, 640, 3584},
      {"memory_clock_mhz", d.memory_clock_mhz, 1127, 1901},
      {"memory_bandwidth_gbs", d.memory_bandwidth_gbs, 80.19, 484.4},
      {"peak_tflops", d.peak_tflops, 1.894, 11.34}};
  std::vector<std::string> out;
  for (const auto& b : bounds) {
    if (b.value < b.lo || b.value > b.hi) {
      std::ostringstream os;
      os << "device '" << d.name << "': " << b.name << " = " << b.value
         << " is outside the reference range [" << b.lo << ", " << b.hi
         << "]; prediction extrapolates";
      out.push_back(os.str());
    }
  }
  return out;
}

const std::vector<DeviceSpec>& ReferenceDevices() {
  static const std::vector<DeviceSpec> kDevices = {
      {"P1000", 1266, 640, 1253, 80.19, 1.894},
      {"P2000", 1076, 1024, 1752, 140.2, 3.031},
      {"P4000", 1202, 1792, 1901, 243.3, 5.304},
      {"P5000", 1607, 2560, 1127, 288.5, 8.873},
      {"GTX1080Ti", 1481, 3584, 1376, 484.4, 11.34},
  };
  return kDevices;
}

DeviceSpec FindDevice(std::string_view name,
                      const std::vector<DeviceSpec>& devices) {
  const std::string wanted = Lower(name);
  for (const auto& d : devices) {
    if (Lower(d.name) == wanted) return d;
  }
  Fail(ErrorCode::kUsage, "unknown device '" + std::string(name) + "'");
}

json DeviceToJson(const DeviceSpec& d) {
  return json{{"name", d.name},
              {"basic_clock_mhz", d.basic_clock_mhz},
              {"cuda_cores", d.cuda_cores},
              {"memory_clock_mhz", d.memory_clock_mhz},
              {"memory_bandwidth_gbs", d.memory_bandwidth_gbs},
              {"peak_tflops", d.peak_tflops}};
}

DeviceSpec DeviceFromJson(const json& j) {
  try {
    DeviceSpec d;
    d.name = j.at("name").get<std::string>();
    d.basic_clock_mhz = j.at("basic_clock_mhz").get<double>();
    d.cuda_cores = j.at("cuda_cores").get<double>();
    d.memory_clock_mhz = j.at("memory_clock_mhz").get<double>();
    d.memory_bandwidth_gbs = j.at("memory_bandwidth_gbs").get<double>();
    d.peak_tflops = j.at("peak_tflops").get<double>();
    ValidateDevice(d);
    return d;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("device entry: ") + e.what());
  }
}

std::vector<DeviceSpec> LoadDeviceFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open device file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("devices") ||
      !doc["devices"].is_array()) {
    Fail(ErrorCode::kParse, path.string() + ": expected {\"devices\": [...]}");
  }
  std::vector<DeviceSpec> out;
  for (const auto& entry : doc["devices"]) out.push_back(DeviceFromJson(entry));
  return out;
}

void SaveDeviceFile(const std::vector<DeviceSpec>& devices,
                    const std::filesystem::path& path) {
  json doc{{"format_version", 1}, {"devices", json::array()}};
  for (const auto& d : devices) doc["devices"].push_back(DeviceToJson(d));
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Scenario

void ValidateScenario(const Scenario& s) {
  if (s.task == Task::kTraining && !s.optimizer) {
    Fail(ErrorCode::kUsage, "training scenario requires an optimizer");
  }
  if (s.task == Task::kInference && s.optimizer) {
    Fail(ErrorCode::kUsage, "inference scenario must not carry an optimizer");
  }
}

// ---------------------------------------------------------------------------
// Networks

std::vector<Shape> ShapeChain(const NetworkSpec& net) {
  std::vector<Shape> chain;
  if (net.layers.empty()) return chain;
  chain.push_back(InputShapeOf(net.layers.front()));
  for (const auto& layer : net.layers) {
    chain.push_back(InferOutputShape(layer, chain.back()));
  }
  return chain;
}

void ValidateNetwork(const NetworkSpec& net) {
  if (net.layers.empty()) {
    Fail(ErrorCode::kValidation, "network '" + net.name + "' has no layers");
  }
  if (!ranges::kBatchSize.Contains(net.batch_size)) {
    Fail(ErrorCode::kValidation, "network batch_size " +
                                     std::to_string(net.batch_size) +
                                     " outside [1, 64]");
  }
  Shape previous_out;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& layer = net.layers[i];
    ValidateLayer(layer, i);
    const Shape in = InputShapeOf(layer);
    if (i > 0) {
      const bool compatible =
          layer.kind == LayerKind::kDense
              ? previous_out.elements() == in.elements()
              : previous_out == in;
      if (!compatible) {
        Fail(ErrorCode::kShapeMismatch,
             LayerLabel(net.layers[i - 1], i - 1) + " produces " +
                 previous_out.ToString() + " but " + LayerLabel(layer, i) +
                 " expects " + in.ToString());
      }
    }
    try {
      previous_out = InferOutputShape(layer, in);
    } catch (const Error& e) {
      Fail(e.code(), LayerLabel(layer, i) + ": " + e.what());
    }
  }
}

NetworkSpec WithBatchSize(const NetworkSpec& net, int batch_size) {
  NetworkSpec out = net;
  out.batch_size = batch_size;
  for (auto& layer : out.layers) layer.batch_size = batch_size;
  return out;
}

namespace {

const std::set<std::string>& AllowedKeys(LayerKind kind) {
  static const std::set<std::string> kConv = {
      "type", "name", "matrix_size", "kernel_size", "channels_in",
      "channels_out", "strides", "padding", "activation", "use_bias"};
  static const std::set<std::string> kPool = {
      "type", "name", "matrix_size", "channels_in", "pool_size",
      "strides", "padding", "activation"};
  static const std::set<std::string> kDense = {
      "type", "name", "dim_input", "dim_output", "activation", "use_bias"};
  switch (kind) {
    case LayerKind::kConv2D: return kConv;
    case LayerKind::kPooling: return kPool;
    case LayerKind::kDense: return kDense;
  }
  return kDense;
}

class LayerReader {
 public:
  LayerReader(const json& obj, std::size_t index) : obj_(obj), index_(index) {}

  std::optional<int> Int(const char* key) const {
    if (!obj_.contains(key)) return std::nullopt;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) Bad(key, "expected an integer");
    const auto value = v.get<std::int64_t>();
    if (value < std::numeric_limits<int>::min() ||
        value > std::numeric_limits<int>::max()) {
      Fail(ErrorCode::kValidation, Where(key) + ": value out of range");
    }
    return static_cast<int>(value);
  }

  int RequiredInt(const char* key) const {
    auto v = Int(key);
    if (!v) Bad(key, "missing required field");
    return *v;
  }

  std::optional<bool> Bool(const char* key) const {
    if (!obj_.contains(key)) return std::nullopt;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) Bad(key, "expected true/false");
    return v.get<bool>();
  }

  std::optional<std::string> String(const char* key) const {
    if (!obj_.contains(key)) return std::nullopt;
    const json& v = obj_.at(key);
    if (!v.is_string()) Bad(key, "expected a string");
    return v.get<std::string>();
  }

  [[noreturn]] void Bad(const char* key, const std::string& why) const {
    Fail(ErrorCode::kParse, Where(key) + ": " + why);
  }

  std::string Where(const char* key) const {
    return "layer " + std::to_string(index_) + " field " + key;
  }

 private:
  const json& obj_;
  std::size_t index_;
};

Padding ReadPadding(const LayerReader& r) {
  auto s = r.String("padding");
  if (!s) return Padding::kValid;
  const std::string t = Lower(*s);
  if (t == "valid") return Padding::kValid;
  if (t == "same") return Padding::kSame;
  r.Bad("padding", "expected \"valid\" or \"same\"");
}

Activation ReadActivation(const LayerReader& r) {
  auto s = r.String("activation");
  if (!s) return Activation::kRelu;
  const std::string t = Lower(*s);
  if (t == "relu") return Activation::kRelu;
  if (t == "none" || t == "linear") return Activation::kNone;
  r.Bad("activation", "expected \"relu\" or \"none\"");
}

}  // namespace

NetworkSpec ParseNetworkJson(const json& doc) {
  if (!doc.is_object()) Fail(ErrorCode::kParse, "network document must be an object");
  if (!doc.contains("format_version") ||
      !doc["format_version"].is_number_integer()) {
    Fail(ErrorCode::kParse, "missing integer format_version");
  }
  if (doc["format_version"].get<int>() != kNetworkFormatVersion) {
    Fail(ErrorCode::kVersion,
         "unsupported network format_version " +
             doc["format_version"].dump() + " (expected " +
             std::to_string(kNetworkFormatVersion) + ")");
  }
  for (const auto& [key, _] : doc.items()) {
    if (key != "format_version" && key != "name" && key != "batch_size" &&
        key != "layers" && key != "description") {
      Fail(ErrorCode::kParse, "unknown top-level key '" + key + "'");
    }
  }
  NetworkSpec net;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) Fail(ErrorCode::kParse, "name must be a string");
    net.name = doc["name"].get<std::string>();
  }
  if (!doc.contains("batch_size") || !doc["batch_size"].is_number_integer()) {
    Fail(ErrorCode::kParse, "missing integer batch_size");
  }
  net.batch_size = doc["batch_size"].get<int>();
  if (!doc.contains("layers") || !doc["layers"].is_array()) {
    Fail(ErrorCode::kParse, "missing layers array");
  }

  std::optional<Shape> previous_out;
  std::size_t index = 0;
  for (const json& obj : doc["layers"]) {
    if (!obj.is_object()) {
      Fail(ErrorCode::kParse, "layer " + std::to_string(index) +
                                  " must be an object");
    }
    LayerReader r(obj, index);
    auto type = r.String("type");
    if (!type) r.Bad("type", "missing required field");
    LayerSpec layer;
    try {
      layer.kind = ParseLayerKind(*type);
    } catch (const Error&) {
      r.Bad("type", "unknown layer type '" + *type + "'");
    }
    for (const auto& [key, _] : obj.items()) {
      if (!AllowedKeys(layer.kind).contains(key)) {
        r.Bad(key.c_str(), "not a " + std::string(ToString(layer.kind)) +
                               " field");
      }
    }
    layer.name = r.String("name").value_or(std::string(ToString(layer.kind)) +
                                           std::to_string(index));
    layer.batch_size = net.batch_size;
    layer.activation = ReadActivation(r);

    // The input geometry may be omitted after the first layer; it is then
    // taken from the previous layer's output.
    const auto need_input = [&](const char* key) -> int {
      r.Bad(key, "required on the first layer");
    };
    if (layer.kind == LayerKind::kDense) {
      auto dim_in = r.Int("dim_input");
      if (!dim_in) {
        if (!previous_out) need_input("dim_input");
        const auto e = previous_out->elements();
        dim_in = e > std::numeric_limits<int>::max()
                     ? std::numeric_limits<int>::max()
                     : static_cast<int>(e);
      }
      layer.dim_input = *dim_in;
      layer.dim_output = r.RequiredInt("dim_output");
      layer.use_bias = r.Bool("use_bias").value_or(true);
    } else {
      auto matrix = r.Int("matrix_size");
      auto channels = r.Int("channels_in");
      if (!matrix || !channels) {
        if (!previous_out) need_input(!matrix ? "matrix_size" : "channels_in");
        if (previous_out->flat()) {
          Fail(ErrorCode::kShapeMismatch,
               "layer " + std::to_string(index - 1) + " produces flat " +
                   previous_out->ToString() + " but layer " +
                   std::to_string(index) + " (" + layer.name +
                   ") is spatial");
        }
        if (!matrix) matrix = previous_out->spatial;
        if (!channels) channels = previous_out->depth;
      }
      layer.matrix_size = *matrix;
      layer.channels_in = *channels;
      layer.padding = ReadPadding(r);
      if (layer.kind == LayerKind::kConv2D) {
        layer.kernel_size = r.RequiredInt("kernel_size");
        layer.channels_out = r.RequiredInt("channels_out");
        layer.strides = r.Int("strides").value_or(1);
        layer.use_bias = r.Bool("use_bias").value_or(true);
      } else {
        layer.pool_size = r.RequiredInt("pool_size");
        layer.strides = r.Int("strides").value_or(layer.pool_size);
      }
    }
    ValidateLayer(layer, index);
    net.layers.push_back(std::move(layer));
    try {
      previous_out = InferOutputShape(net.layers.back(),
                                      InputShapeOf(net.layers.back()));
    } catch (const Error&) {
      previous_out.reset();
    }
    ++index;
  }
  ValidateNetwork(net);
  return net;
}

NetworkSpec ParseNetworkFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open network file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  try {
    return ParseNetworkJson(doc);
  } catch (const Error& e) {
    Fail(e.code(), path.string() + ": " + e.what());
  }
}

json LayerToJson(const LayerSpec& l) {
  json j{{"type", ToString(l.kind)}, {"name", l.name},
         {"batch_size", l.batch_size}};
  switch (l.kind) {
    case LayerKind::kConv2D:
      j["matrix_size"] = l.matrix_size;
      j["kernel_size"] = l.kernel_size;
      j["channels_in"] = l.channels_in;
      j["channels_out"] = l.channels_out;
      j["strides"] = l.strides;
      j["padding"] = ToString(l.padding);
      j["activation"] = ToString(l.activation);
      j["use_bias"] = l.use_bias;
      break;
    case LayerKind::kPooling:
      j["matrix_size"] = l.matrix_size;
      j["channels_in"] = l.channels_in;
      j["pool_size"] = l.pool_size;
      j["strides"] = l.strides;
      j["padding"] = ToString(l.padding);
      j["activation"] = ToString(l.activation);
      break;
    case LayerKind::kDense:
      j["dim_input"] = l.dim_input;
      j["dim_output"] = l.dim_output;
      j["activation"] = ToString(l.activation);
      j["use_bias"] = l.use_bias;
      break;
  }
  return j;
}

LayerSpec LayerFromJson(const json& j) {
  if (!j.is_object() || !j.contains("batch_size")) {
    Fail(ErrorCode::kParse, "layer entry needs batch_size");
  }
  json stripped = j;
  const int batch = j["batch_size"].get<int>();
  stripped.erase("batch_size");
  json doc{{"format_version", kNetworkFormatVersion},
           {"batch_size", batch},
           {"layers", json::array({stripped})}};
  return ParseNetworkJson(doc).layers.front();
}

json NetworkToJson(const NetworkSpec& net) {
  json layers = json::array();
  for (const auto& layer : net.layers) {
    json j = LayerToJson(layer);
    j.erase("batch_size");
    layers.push_back(std::move(j));
  }
  return json{{"format_version", kNetworkFormatVersion},
              {"name", net.name},
              {"batch_size", net.batch_size},
              {"layers", std::move(layers)}};
}

void WriteNetworkFile(const NetworkSpec& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << NetworkToJson(net).dump(2) << "\n";
}

}  // namespace latency_atlas
