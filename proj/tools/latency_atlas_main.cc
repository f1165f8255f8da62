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

// latency-atlas: generate microbenchmarks, measure them, train phase
// predictors, evaluate them and predict whole-network latency.

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "latency_atlas/bench.hpp"
#include "latency_atlas/compose.hpp"
#include "latency_atlas/error.hpp"
#include "latency_atlas/features.hpp"
#include "latency_atlas/metrics.hpp"
#include "latency_atlas/models.hpp"
#include "latency_atlas/netspec.hpp"

namespace la = latency_atlas;
using nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string config_path;
  std::string devices_path;
  bool json = false;
  bool quiet = false;
};

// Values pinned by the optional config file. Flags given on the command line
// win over these.
struct Config {
  la::OracleProfile oracle;
  la::ArchitectureConfig architecture;
  la::TrainConfig schedule;
  bool schedule_set = false;
  unsigned threads = 0;
};

Config LoadConfig(const Globals& g) {
  Config c;
  std::string path = g.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("LATENCY_ATLAS_CONFIG")) path = env;
  }
  if (path.empty()) return c;
  std::ifstream in(path);
  if (!in) la::Fail(la::ErrorCode::kIo, "cannot open config " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    la::Fail(la::ErrorCode::kParse, path + ": " + e.what());
  }
  if (!doc.is_object()) la::Fail(la::ErrorCode::kParse, path + ": config must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "oracle") {
      c.oracle = la::OracleProfileFromJson(value);
    } else if (key == "architecture") {
      c.architecture = la::ArchitectureConfigFromJson(value);
    } else if (key == "schedule") {
      c.schedule = la::TrainConfigFromJson(value);
      c.schedule_set = true;
    } else if (key == "threads") {
      if (!value.is_number_unsigned()) {
        la::Fail(la::ErrorCode::kParse, path + ": threads must be a non-negative integer");
      }
      c.threads = value.get<unsigned>();
    } else {
      la::Fail(la::ErrorCode::kParse, path + ": unknown config key '" + key + "'");
    }
  }
  return c;
}

std::vector<la::DeviceSpec> DeviceCatalog(const Globals& g) {
  std::vector<la::DeviceSpec> catalog = la::ReferenceDevices();
  if (g.devices_path.empty()) return catalog;
  for (const auto& d : la::LoadDeviceFile(g.devices_path)) {
    bool replaced = false;
    for (auto& existing : catalog) {
      if (existing.name == d.name) {
        existing = d;
        replaced = true;
      }
    }
    if (!replaced) catalog.push_back(d);
  }
  return catalog;
}

void Note(const Globals& g, const std::string& text) {
  if (!g.quiet) std::cerr << text << "\n";
}

void Emit(const Globals& g, const json& doc, const std::string& text) {
  if (g.json) {
    std::cout << doc.dump(2) << "\n";
  } else if (!g.quiet) {
    std::cout << text;
  }
}

std::string Utc() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string kind, task = "inference", mode = "per-device", optimizer, out;
  int count = 0;
};

int RunGen(const Globals& g, const GenArgs& a) {
  la::Suite suite;
  suite.kind = la::ParseLayerKind(a.kind);
  suite.scenario.task = la::ParseTask(a.task);
  suite.scenario.mode = la::ParseMode(a.mode);
  if (!a.optimizer.empty()) {
    if (suite.scenario.task != la::Task::kTraining) {
      la::Fail(la::ErrorCode::kUsage, "--optimizer only applies to training suites");
    }
    suite.scenario.optimizer = la::ParseOptimizer(a.optimizer);
  }
  if (a.count < 1) la::Fail(la::ErrorCode::kUsage, "--count must be >= 1");
  suite.seed = g.seed;
  suite.benchmarks = la::GenerateSuite(suite.kind, suite.scenario, a.count, g.seed);
  la::SaveSuite(suite, a.out);
  const json doc{{"suite", a.out},
                 {"kind", la::ToString(suite.kind)},
                 {"task", la::ToString(suite.scenario.task)},
                 {"mode", la::ToString(suite.scenario.mode)},
                 {"count", suite.benchmarks.size()},
                 {"seed", g.seed}};
  Emit(g, doc,
       "wrote " + std::to_string(suite.benchmarks.size()) + " " +
           std::string(la::ToString(suite.kind)) + " benchmarks to " + a.out + "\n");
  return 0;
}

struct MeasureArgs {
  std::string suite, oracle, ingest, device, out;
  int repeats = 1;
  double noise_cv = 0.0;
  unsigned threads = 0;
  bool threads_set = false;
};

int RunMeasure(const Globals& g, const Config& cfg, const MeasureArgs& a) {
  if (a.oracle.empty() == a.ingest.empty()) {
    la::Fail(la::ErrorCode::kUsage, "give exactly one of --oracle or --ingest");
  }
  if (a.repeats < 1) la::Fail(la::ErrorCode::kUsage, "--repeats must be >= 1");
  if (a.noise_cv < 0) la::Fail(la::ErrorCode::kUsage, "--noise-cv must be >= 0");
  const la::Suite suite = la::LoadSuite(a.suite);
  const la::LayoutId layout = la::LayoutId::For(suite.kind, suite.scenario);
  la::Dataset ds;
  if (!a.ingest.empty()) {
    ds = la::IngestProfileCsv(std::filesystem::path(a.ingest), layout);
    // File names only: recorded paths would make artifacts depend on the
    // working directory.
    ds.generation["suite_seed"] = suite.seed;
    ds.generation["source"] = std::filesystem::path(a.ingest).filename().string();
  } else {
    if (a.device.empty()) la::Fail(la::ErrorCode::kUsage, "--oracle needs --device");
    const la::DeviceSpec device = la::FindDevice(a.device, DeviceCatalog(g));
    for (const auto& w : la::DeviceRangeWarnings(device)) Note(g, "warning: " + w);
    la::OracleProfile profile = cfg.oracle;
    if (a.oracle != "default") profile = la::LoadOracleProfile(a.oracle);
    ds.layout = layout;
    ds.provenance = la::Provenance::kSynthetic;
    ds.device_names = {device.name};
    ds.samples = la::MeasureSuite(suite.benchmarks, device, profile, g.seed, a.noise_cv,
                                  a.repeats, a.threads_set ? a.threads : cfg.threads);
    ds.generation = json{{"suite_seed", suite.seed},
                         {"suite_count", suite.benchmarks.size()},
                         {"device", la::DeviceToJson(device)},
                         {"oracle", la::OracleProfileToJson(profile)},
                         {"noise_seed", g.seed},
                         {"noise_cv", a.noise_cv},
                         {"repeats", a.repeats}};
  }
  la::SaveDataset(ds, a.out);
  json devices = ds.device_names;
  const json doc{{"dataset", a.out},
                 {"layout", ds.layout.ToString()},
                 {"samples", ds.samples.size()},
                 {"devices", devices}};
  Emit(g, doc,
       "wrote " + std::to_string(ds.samples.size()) + " samples (" +
           ds.layout.ToString() + ") to " + a.out + "\n");
  return 0;
}

struct SplitArgs {
  std::string data, train_out, test_out;
  double fraction = 0.8;
};

int RunSplit(const Globals& g, const SplitArgs& a) {
  const la::Dataset ds = la::LoadDataset(a.data);
  const auto [train, test] = la::SplitDataset(ds, a.fraction, g.seed);
  la::SaveDataset(train, a.train_out);
  la::SaveDataset(test, a.test_out);
  const json doc{{"train", {{"path", a.train_out}, {"samples", train.size()}}},
                 {"test", {{"path", a.test_out}, {"samples", test.size()}}}};
  Emit(g, doc,
       "train: " + std::to_string(train.size()) + " samples -> " + a.train_out +
           "\ntest:  " + std::to_string(test.size()) + " samples -> " + a.test_out + "\n");
  return 0;
}

struct TrainArgs {
  std::vector<std::string> data, validation;
  std::string arch, loss, device, out;
  bool unseen = false, full = false, timestamp = false;
  int epochs = -1, batch_size = -1, halve_every = -1;
  double lr = -1;
  unsigned threads = 0;
  bool threads_set = false;
};

std::map<la::LayerKind, la::Dataset> GroupByKind(const std::vector<std::string>& dirs) {
  std::map<la::LayerKind, std::vector<la::Dataset>> parts;
  for (const auto& dir : dirs) {
    la::Dataset ds = la::LoadDataset(dir);
    parts[ds.layout.kind].push_back(std::move(ds));
  }
  std::map<la::LayerKind, la::Dataset> out;
  for (auto& [kind, list] : parts) {
    out[kind] = list.size() == 1 ? std::move(list.front()) : la::MergeDatasets(list);
  }
  return out;
}

int RunTrain(const Globals& g, const Config& cfg, const TrainArgs& a) {
  if (a.unseen && !a.device.empty()) {
    la::Fail(la::ErrorCode::kUsage, "--device and --unseen are mutually exclusive");
  }
  la::BundleTrainOptions opt;
  opt.architecture = a.arch.empty() ? (a.unseen ? la::Architecture::kPerfNet
                                                : la::Architecture::kPerfNetV2)
                                    : la::ParseArchitecture(a.arch);
  opt.loss = a.loss.empty() ? (a.unseen ? la::LossKind::kMsle : la::LossKind::kMaple)
                            : la::ParseLossKind(a.loss);
  opt.config = a.full ? la::TrainConfig::Full() : cfg.schedule;
  if (a.epochs >= 0) opt.config.epochs = a.epochs;
  if (a.batch_size >= 0) opt.config.batch_size = a.batch_size;
  if (a.halve_every >= 0) opt.config.halve_every = a.halve_every;
  if (a.lr >= 0) opt.config.lr0 = a.lr;
  opt.arch_config = cfg.architecture;
  opt.seed = g.seed;
  opt.threads = a.threads_set ? a.threads : cfg.threads;

  const auto data = GroupByKind(a.data);
  const auto catalog = DeviceCatalog(g);
  const la::Mode want_mode = a.unseen ? la::Mode::kUnseen : la::Mode::kPerDevice;
  for (const auto& [kind, ds] : data) {
    if (ds.layout.mode != want_mode) {
      la::Fail(la::ErrorCode::kUsage,
               "dataset layout " + ds.layout.ToString() + " does not fit " +
                   (a.unseen ? "--unseen training" : "per-device training"));
    }
  }
  for (la::LayerKind kind : la::kAllLayerKinds) {
    if (!data.contains(kind)) {
      la::Fail(la::ErrorCode::kUsage, "no --data directory holds " +
                                          std::string(la::ToString(kind)) + " samples");
    }
  }

  std::optional<la::DeviceSpec> device;
  std::vector<la::DeviceSpec> pool;
  std::set<std::string> all_devices;
  for (const auto& [kind, ds] : data) {
    std::set<std::string> names;
    for (const auto& s : ds.samples) names.insert(s.device);
    if (a.unseen && names.size() < 2) {
      la::Fail(la::ErrorCode::kUsage,
               "--unseen needs data from at least 2 devices; " +
                   std::string(la::ToString(kind)) + " data comes from " +
                   std::to_string(names.size()));
    }
    all_devices.insert(names.begin(), names.end());
  }
  if (a.unseen) {
    for (const auto& name : all_devices) pool.push_back(la::FindDevice(name, catalog));
  } else {
    if (all_devices.size() != 1) {
      la::Fail(la::ErrorCode::kUsage,
               "per-device training needs data from exactly one device, found " +
                   std::to_string(all_devices.size()));
    }
    const std::string name = *all_devices.begin();
    if (!a.device.empty() && la::FindDevice(a.device, catalog).name != name) {
      la::Fail(la::ErrorCode::kUsage, "--device " + a.device + " but the data comes from " + name);
    }
    device = la::FindDevice(name, catalog);
  }

  std::map<la::LayerKind, la::Dataset> validation;
  if (!a.validation.empty()) validation = GroupByKind(a.validation);
  for (const auto& [kind, ds] : validation) opt.validation[kind] = &ds;

  Note(g, "training 9 phase models (" + std::string(la::ToString(opt.architecture)) + ", " +
              std::string(la::ToString(opt.loss)) + ", " +
              std::to_string(opt.config.epochs) + " epochs)");
  la::PredictorBundle bundle = la::TrainBundle(data, opt, device, pool);
  if (a.timestamp) bundle.created_at = Utc();
  la::SaveBundle(bundle, a.out);
  json doc = la::BundleSummary(bundle);
  doc["bundle"] = a.out;
  std::string text = "wrote bundle " + a.out + "\n";
  for (const auto& m : doc["models"]) {
    char line[160];
    std::snprintf(line, sizeof(line), "  %-26s %-4s train loss %.5f\n",
                  m["layout"].get<std::string>().c_str(),
                  m["phase"].get<std::string>().c_str(),
                  m["training_meta"]["final_train_loss"].get<double>());
    text += line;
  }
  Emit(g, doc, text);
  return 0;
}

struct EvaluateArgs {
  std::string bundle, out;
  std::vector<std::string> data;
};

int RunEvaluate(const Globals& g, const EvaluateArgs& a) {
  const la::PredictorBundle bundle = la::LoadBundle(a.bundle);
  std::vector<la::Dataset> test;
  for (const auto& d : a.data) test.push_back(la::LoadDataset(d));
  const la::EvalReport report = la::EvaluateBundle(bundle, test);
  const json doc = la::EvalReportToJson(report);
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    if (!out) la::Fail(la::ErrorCode::kIo, "cannot write " + a.out);
    out << doc.dump(2) << "\n";
  }
  Emit(g, doc, la::RenderEvalReport(report));
  return 0;
}

struct PredictArgs {
  std::string bundle, network, task, optimizer, device, batch_sweep;
  std::int64_t epoch_n = 0;
};

std::vector<int> ParseSweep(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      la::Fail(la::ErrorCode::kUsage, "--batch-sweep entries must be positive integers, got '" +
                                          item + "'");
    }
  }
  if (out.empty()) la::Fail(la::ErrorCode::kUsage, "--batch-sweep is empty");
  return out;
}

int RunPredict(const Globals& g, const PredictArgs& a) {
  la::Scenario scenario;
  const la::PredictorBundle bundle = la::LoadBundle(a.bundle);
  scenario.task = a.task.empty() ? bundle.task : la::ParseTask(a.task);
  scenario.mode = bundle.mode;
  if (!a.optimizer.empty()) scenario.optimizer = la::ParseOptimizer(a.optimizer);
  if (scenario.task == la::Task::kTraining && !scenario.optimizer) {
    la::Fail(la::ErrorCode::kUsage, "training prediction needs --optimizer");
  }
  if (scenario.task == la::Task::kInference && scenario.optimizer) {
    la::Fail(la::ErrorCode::kUsage, "--optimizer only applies to training prediction");
  }
  if (a.epoch_n < 0) la::Fail(la::ErrorCode::kUsage, "--epoch-n must be >= 1");
  std::optional<la::DeviceSpec> device;
  if (!a.device.empty()) {
    device = la::FindDevice(a.device, DeviceCatalog(g));
    for (const auto& w : la::DeviceRangeWarnings(*device)) Note(g, "warning: " + w);
  }
  const la::NetworkSpec base = la::ParseNetworkFile(a.network);
  const la::LayerTimer timer = la::BundleTimer(bundle, scenario, device);

  std::vector<int> batches = {base.batch_size};
  if (!a.batch_sweep.empty()) batches = ParseSweep(a.batch_sweep);

  json predictions = json::array();
  std::string text;
  char line[200];
  for (int batch : batches) {
    const la::NetworkSpec net = la::WithBatchSize(base, batch);
    const la::PhaseBreakdown b = la::PredictSingleBatch(net, timer);
    json entry = la::BreakdownToJson(b);
    entry["batch_size"] = batch;
    if (a.epoch_n > 0) entry["epoch_ms"] = la::EpochTime(a.epoch_n, batch, b.total_ms);
    predictions.push_back(entry);
    if (batches.size() == 1) {
      text += la::RenderBreakdown(b);
      if (a.epoch_n > 0) {
        std::snprintf(line, sizeof(line), "epoch (n=%lld):  %.4f ms\n",
                      static_cast<long long>(a.epoch_n), entry["epoch_ms"].get<double>());
        text += line;
      }
    }
  }
  if (batches.size() > 1) {
    std::snprintf(line, sizeof(line), "%6s  %12s  %12s%s\n", "batch", "total ms", "naive ms",
                  a.epoch_n > 0 ? "      epoch ms" : "");
    text += line;
    for (const auto& e : predictions) {
      std::snprintf(line, sizeof(line), "%6d  %12.4f  %12.4f", e["batch_size"].get<int>(),
                    e["total_ms"].get<double>(), e["naive_sum_ms"].get<double>());
      text += line;
      if (a.epoch_n > 0) {
        std::snprintf(line, sizeof(line), "  %12.4f", e["epoch_ms"].get<double>());
        text += line;
      }
      text += "\n";
    }
  }
  json doc{{"network", base.name},
           {"task", la::ToString(scenario.task)},
           {"predictions", std::move(predictions)}};
  if (scenario.optimizer) doc["optimizer"] = la::ToString(*scenario.optimizer);
  if (a.epoch_n > 0) doc["epoch_n"] = a.epoch_n;
  Emit(g, doc, text);
  return 0;
}

int Dispatch(int argc, char** argv) {
  CLI::App app{"CNN layer latency prediction: microbenchmarks, phase models, composition"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random stream")->capture_default_str();
  app.add_option("--config", g.config_path,
                 "JSON config (oracle, architecture, schedule, threads); "
                 "falls back to $LATENCY_ATLAS_CONFIG");
  app.add_option("--devices", g.devices_path, "JSON device catalog extending the built-in one");
  app.add_flag("--json", g.json, "Machine-readable JSON on stdout");
  app.add_flag("--quiet", g.quiet, "Suppress progress and text reports");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a microbenchmark suite");
  gen_cmd->add_option("--kind", gen.kind, "conv2d, pooling or dense")->required();
  gen_cmd->add_option("--task", gen.task, "inference or training")->capture_default_str();
  gen_cmd->add_option("--mode", gen.mode, "per-device or unseen")->capture_default_str();
  gen_cmd->add_option("--optimizer", gen.optimizer,
                      "Fix the optimizer of a training suite (drawn per benchmark otherwise)");
  gen_cmd->add_option("--count", gen.count, "Number of benchmarks")->required();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  MeasureArgs measure;
  auto* measure_cmd = app.add_subcommand("measure", "Time a suite into a dataset");
  measure_cmd->add_option("--suite", measure.suite, "Suite directory")->required();
  measure_cmd->add_option("--oracle", measure.oracle,
                          "Synthetic oracle profile JSON, or 'default'");
  measure_cmd->add_option("--ingest", measure.ingest, "Measurement CSV to ingest");
  measure_cmd->add_option("--device", measure.device, "Device name (oracle mode)");
  measure_cmd->add_option("--repeats", measure.repeats, "Repeats per benchmark")
      ->capture_default_str();
  measure_cmd->add_option("--noise-cv", measure.noise_cv, "Lognormal noise CV")
      ->capture_default_str();
  auto* measure_threads = measure_cmd->add_option("--threads", measure.threads, "Workers (0: all)");
  measure_cmd->add_option("--out", measure.out, "Output dataset directory")->required();

  SplitArgs split;
  auto* split_cmd = app.add_subcommand("split", "Shuffle a dataset into train/test parts");
  split_cmd->add_option("--data", split.data, "Dataset directory")->required();
  split_cmd->add_option("--train-fraction", split.fraction, "Share kept for training")
      ->capture_default_str();
  split_cmd->add_option("--train-out", split.train_out, "Training part directory")->required();
  split_cmd->add_option("--test-out", split.test_out, "Test part directory")->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train the nine phase models into a bundle");
  train_cmd->add_option("--data", train.data, "Dataset directories")->required();
  train_cmd->add_option("--validation", train.validation, "Held-out dataset directories");
  train_cmd->add_option("--arch", train.arch, "perfnet or perfnetv2");
  train_cmd->add_option("--loss", train.loss, "maple or msle");
  train_cmd->add_option("--device", train.device, "Expected device of the data");
  train_cmd->add_flag("--unseen", train.unseen, "Pool several devices with hardware features");
  train_cmd->add_option("--epochs", train.epochs, "Epochs (default 200)");
  train_cmd->add_option("--batch-size", train.batch_size, "Mini-batch size (default 128)");
  train_cmd->add_option("--lr", train.lr, "Initial learning rate");
  train_cmd->add_option("--halve-every", train.halve_every, "Epochs between lr halvings");
  train_cmd->add_flag("--full", train.full, "1000 epochs, lr halved every 400");
  train_cmd->add_flag("--timestamp", train.timestamp,
                      "Record the wall-clock time in the bundle (breaks byte reproducibility)");
  auto* train_threads = train_cmd->add_option("--threads", train.threads, "Workers (0: all)");
  train_cmd->add_option("--out", train.out, "Bundle path")->required();

  EvaluateArgs evaluate;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a bundle on held-out datasets");
  eval_cmd->add_option("--bundle", evaluate.bundle, "Bundle path")->required();
  eval_cmd->add_option("--data", evaluate.data, "Dataset directories")->required();
  eval_cmd->add_option("--out", evaluate.out, "Write the JSON report here");

  PredictArgs predict;
  auto* predict_cmd = app.add_subcommand("predict", "Predict whole-network latency");
  predict_cmd->add_option("--bundle", predict.bundle, "Bundle path")->required();
  predict_cmd->add_option("--network", predict.network, "Network JSON")->required();
  predict_cmd->add_option("--task", predict.task, "inference or training");
  predict_cmd->add_option("--optimizer", predict.optimizer, "sgd, adagrad, rmsprop or adam");
  predict_cmd->add_option("--device", predict.device, "Target device (unseen bundles)");
  predict_cmd->add_option("--epoch-n", predict.epoch_n, "Total samples for an epoch estimate");
  predict_cmd->add_option("--batch-sweep", predict.batch_sweep, "Comma-separated batch sizes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const Config cfg = LoadConfig(g);
  measure.threads_set = measure_threads->count() > 0;
  train.threads_set = train_threads->count() > 0;
  if (*gen_cmd) return RunGen(g, gen);
  if (*measure_cmd) return RunMeasure(g, cfg, measure);
  if (*split_cmd) return RunSplit(g, split);
  if (*train_cmd) return RunTrain(g, cfg, train);
  if (*eval_cmd) return RunEvaluate(g, evaluate);
  if (*predict_cmd) return RunPredict(g, predict);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Dispatch(argc, argv);
  } catch (const la::Error& e) {
    std::cerr << "error [" << la::ErrorCodeName(e.code()) << "]: " << e.what() << "\n";
    return la::ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
