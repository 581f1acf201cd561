// Copyright 2026 The circleflow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "circleflow/cli.hpp"

namespace circleflow {
namespace {

namespace fs = std::filesystem;

std::string fixture(const std::string& name) { return std::string(CIRCLEFLOW_FIXTURE_DIR) + "/" + name; }

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count(const std::string& text, const std::string& needle) {
  int n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("circleflow-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, CheckHyperbolicDiskCitesWholeVertexSet) {
  const auto r = run({"check", fixture("disk-hyperbolic-zero.json")});
  EXPECT_EQ(r.code, cli::kNotAttainable);
  EXPECT_NE(r.out.find("violation A=V gauss-bonnet"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("verdict: not-attainable"), std::string::npos);
}

TEST_F(CliTest, CheckAttainable) {
  for (const char* name : {"square.json", "fan.json", "torus.json", "obtuse-fan.json"}) {
    const auto r = run({"check", fixture(name)});
    EXPECT_EQ(r.code, cli::kOk) << name << '\n' << r.out << r.err;
    EXPECT_NE(r.out.find("verdict: attainable"), std::string::npos);
    EXPECT_NE(r.out.find("angle condition: ok"), std::string::npos);
  }
}

TEST_F(CliTest, SolveSquareWithNewton) {
  const auto r = run({"solve", fixture("square.json"), "--method", "newton", "--out", path("sol.json")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto rec = parse_solution(slurp(path("sol.json")));
  EXPECT_EQ(rec.status, "converged");
  ASSERT_EQ(rec.radii.size(), 5);
  EXPECT_NEAR(rec.radii[4] / rec.radii[0], std::sqrt(2.0) - 1.0, 1e-9);
  for (int v = 1; v < 4; ++v) EXPECT_NEAR(rec.radii[v] / rec.radii[0], 1.0, 1e-9);
}

TEST_F(CliTest, SolveToStdoutWithFlow) {
  const auto r = run({"solve", fixture("torus.json")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["status"], "converged");
  EXPECT_TRUE(doc["rate"].is_number());
  EXPECT_GT(doc["rate"].get<double>(), 0.0);
  EXPECT_LE(doc["conserved_drift"].get<double>(), 1e-8);
}

TEST_F(CliTest, SolveRefusesUnattainableUnlessForced) {
  const auto refused = run({"solve", fixture("disk-hyperbolic-zero.json")});
  EXPECT_EQ(refused.code, cli::kNotAttainable);
  EXPECT_NE(refused.err.find("--force"), std::string::npos);
  const auto forced = run({"solve", fixture("disk-hyperbolic-zero.json"), "--force", "--max-steps", "500"});
  EXPECT_EQ(forced.code, cli::kNotConverged);
  EXPECT_EQ(nlohmann::json::parse(forced.out)["status"], "not-attainable-suspected");
}

TEST_F(CliTest, LayoutSquare) {
  const auto r = run({"layout", fixture("square.json"), "--out", path("square.svg"), "--overlay"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto svg = slurp(path("square.svg"));
  EXPECT_EQ(count(svg, "<circle class=\"vertex\""), 5);
  EXPECT_EQ(count(svg, "<line"), 8);
}

TEST_F(CliTest, LayoutFromStoredSolution) {
  ASSERT_EQ(run({"solve", fixture("square.json"), "--out", path("sol.json")}).code, cli::kOk);
  const auto r = run({"layout", fixture("square.json"), "--solution", path("sol.json")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(count(r.out, "<circle class=\"vertex\""), 5);
  EXPECT_EQ(r.out, run({"layout", fixture("square.json")}).out);
}

TEST_F(CliTest, LayoutFailures) {
  EXPECT_EQ(run({"layout", fixture("torus.json")}).code, cli::kLayoutFailed);
  // Radii that leave the interior vertex curved.
  std::ofstream(path("bad.json")) << R"({"status": "converged", "geometry": "euclidean", "radii": [1, 1, 1, 1, 1],
    "curvature": [0, 0, 0, 0, 0], "residual": 0, "history": {"time": [0], "residual": [0]}})";
  const auto r = run({"layout", fixture("square.json"), "--solution", path("bad.json")});
  EXPECT_EQ(r.code, cli::kLayoutFailed);
  EXPECT_NE(r.err.find("interior vertex 4"), std::string::npos) << r.err;
}

TEST_F(CliTest, Rate) {
  ASSERT_EQ(run({"solve", fixture("torus.json"), "--out", path("torus.json")}).code, cli::kOk);
  const auto r = run({"rate", path("torus.json")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  std::istringstream in(r.out);
  std::string key;
  double rate = 0.0, r2 = 0.0;
  in >> key >> rate >> key >> r2;
  EXPECT_GT(rate, 0.0);
  EXPECT_GT(r2, 0.99);

  ASSERT_EQ(run({"solve", fixture("square.json"), "--out", path("square.json")}).code, cli::kOk);
  EXPECT_EQ(run({"rate", path("square.json")}).code, cli::kNotConverged);  // too few Newton samples
}

TEST_F(CliTest, Idempotence) {
  ASSERT_EQ(run({"solve", fixture("fan.json"), "--method", "newton", "--out", path("sol.json")}).code, cli::kOk);
  // Re-solve from the stored radii.
  auto inst = parse_instance(slurp(fixture("fan.json")));
  inst.initial_radii = parse_solution(slurp(path("sol.json"))).radii;
  inst.method = Method::Newton;
  std::ofstream(path("again.json")) << write_instance(inst);
  const auto r = run({"solve", path("again.json")});
  ASSERT_EQ(r.code, cli::kOk);
  EXPECT_LE(nlohmann::json::parse(r.out)["iterations"].get<int>(), 2);
}

TEST_F(CliTest, UsageAndInputErrors) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({"solve"}).code, cli::kUsage);
  EXPECT_EQ(run({"solve", fixture("square.json"), "--method", "gradient"}).code, cli::kUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
  EXPECT_EQ(run({"check", path("missing.json")}).code, cli::kInvalid);
  EXPECT_EQ(run({"solve", fixture("square.json"), "--tol", "-1"}).code, cli::kInvalid);
  EXPECT_EQ(run({"check", fixture("torus.json"), "--geometry", "hyperbolic"}).code, cli::kInvalid);
  std::ofstream(path("broken.json")) << "{\"geometry\": ";
  const auto r = run({"check", path("broken.json")});
  EXPECT_EQ(r.code, cli::kInvalid);
  EXPECT_NE(r.err.find("at byte"), std::string::npos);
}

TEST_F(CliTest, GeometryOverride) {
  // Corner turning angles summing to exactly 2π leave no room for hyperbolic area.
  const auto r = run({"check", fixture("square.json"), "--geometry", "hyperbolic"});
  EXPECT_EQ(r.code, cli::kNotAttainable);
  EXPECT_NE(r.out.find("geometry: hyperbolic"), std::string::npos);
  EXPECT_NE(r.out.find("violation A=V gauss-bonnet"), std::string::npos) << r.out;
}

}  // namespace
}  // namespace circleflow
