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

// Runs the latency-atlas binary end to end.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "latency_atlas/models.hpp"
#include "test_util.hpp"

namespace latency_atlas {
namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult RunCli(const std::string& args) {
  const std::string cmd = std::string(LATENCY_ATLAS_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {};
  RunResult r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    bundle_ = (dir_ / "stub.latb").string();
    SaveBundle(test::StubBundle(test::LeNetStubValues()), bundle_);
    lenet_ = test::DataPath("networks/lenet5.json").string();
  }
  test::TempDir dir_{"cli"};
  std::string bundle_;
  std::string lenet_;
};

TEST_F(CliTest, PredictLeNetJson) {
  const RunResult r = RunCli("predict --bundle " + bundle_ + " --network " + lenet_ + " --json");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["network"], "LeNet-5");
  EXPECT_NEAR(doc["predictions"][0]["total_ms"].get<double>(), 0.536, 1e-9);
}

TEST_F(CliTest, PredictTextAndEpoch) {
  const RunResult r =
      RunCli("predict --bundle " + bundle_ + " --network " + lenet_ + " --epoch-n 105");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("composed total: 0.5360 ms"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("epoch (n=105)"), std::string::npos) << r.out;
}

TEST_F(CliTest, BatchSweepGivesOneRowPerBatch) {
  const RunResult r = RunCli("--json predict --bundle " + bundle_ + " --network " + lenet_ +
                          " --batch-sweep 1,8,32");
  ASSERT_EQ(r.exit_code, 0);
  const auto doc = nlohmann::json::parse(r.out);
  ASSERT_EQ(doc["predictions"].size(), 3u);
  EXPECT_EQ(doc["predictions"][2]["batch_size"], 32);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(RunCli("predict --bundle " + bundle_ + " --network " + lenet_ + " --task training")
                .exit_code,
            1);
  EXPECT_EQ(RunCli("predict --bundle " + bundle_ + " --network " + lenet_ +
                " --optimizer adam")
                .exit_code,
            1);
  EXPECT_EQ(RunCli("frobnicate").exit_code, 1);
  EXPECT_EQ(RunCli("gen --kind conv2d --count 0 --out " + (dir_ / "g0").string()).exit_code, 1);
  EXPECT_EQ(RunCli("gen --kind conv2d --count 5 --out " + (dir_ / "g1").string()).exit_code, 0);
  EXPECT_EQ(RunCli("measure --suite " + (dir_ / "g1").string() + " --oracle default --ingest x.csv" +
                " --device P1000 --out " + (dir_ / "m").string())
                .exit_code,
            1);
}

TEST_F(CliTest, DataErrorsExitTwo) {
  std::string bytes = ReadFile(bundle_);
  bytes[bytes.size() / 2] ^= 0x10;
  const auto bad = dir_ / "bad.latb";
  std::ofstream(bad, std::ios::binary) << bytes;
  EXPECT_EQ(RunCli("predict --bundle " + bad.string() + " --network " + lenet_).exit_code, 2);
  EXPECT_EQ(RunCli("predict --bundle " + (dir_ / "none.latb").string() + " --network " + lenet_)
                .exit_code,
            2);
}

TEST_F(CliTest, GenIsByteReproducible) {
  const auto a = dir_ / "a", b = dir_ / "b";
  ASSERT_EQ(RunCli("--seed 4 gen --kind dense --task training --count 50 --out " + a.string())
                .exit_code,
            0);
  ASSERT_EQ(RunCli("--seed 4 gen --kind dense --task training --count 50 --out " + b.string())
                .exit_code,
            0);
  EXPECT_EQ(ReadFile(a / "suite.json"), ReadFile(b / "suite.json"));
}

TEST_F(CliTest, MeasureThenEvaluate) {
  const auto suite = dir_ / "s", data = dir_ / "d";
  ASSERT_EQ(RunCli("gen --kind conv2d --count 20 --out " + suite.string()).exit_code, 0);
  ASSERT_EQ(RunCli("measure --suite " + suite.string() + " --oracle default --device P1000" +
                " --repeats 3 --noise-cv 0.05 --out " + data.string())
                .exit_code,
            0);
  const RunResult r =
      RunCli("--json evaluate --bundle " + bundle_ + " --data " + data.string());
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["rows"].size(), 3u);
}

}  // namespace
}  // namespace latency_atlas
