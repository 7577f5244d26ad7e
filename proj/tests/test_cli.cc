// Copyright 2026 The degradekit Authors
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

// End-to-end checks of the command-line tool, run as a subprocess.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "degradekit/image.h"
#include "oracles.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "stdout.txt";
  const std::string cmd = "env -u DEGRADEKIT_H264_CMD '" DEGRADEKIT_CLI_PATH "' " + args + " > '" +
                          out.string() + "' 2> '" + (scratch / "stderr.txt").string() + "'";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  r.out.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return r;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < s.size()) {
    const auto end = s.find('\n', start);
    out.push_back(s.substr(start, end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path make_inputs(const fs::path& dir, int count) {
  fs::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    degradekit::write_png(dir / ("hr" + std::to_string(i) + ".png"), oracle::test_image(96, 88, 50 + i));
  }
  return dir;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("selftest passes") {
  const fs::path s = oracle::scratch_dir("cli_selftest");
  const auto r = run("selftest --output " + q(s / "report.json"), s);
  CHECK(r.code == 0);
  const auto report = json::parse(slurp(s / "report.json"));
  CHECK(report["failures"] == 0);
  CHECK(report["passed"] == true);
  CHECK(report["suites"].size() == 4);
  fs::remove_all(s);
}

TEST_CASE("synth, label and metrics") {
  const fs::path s = oracle::scratch_dir("cli_pipeline");
  const fs::path in = make_inputs(s / "hr", 10);
  const auto r = run("synth --pipeline complex --per-hr 5 --seed 9 --input " + q(in) + " --output " +
                         q(s / "lr"),
                     s);
  REQUIRE(r.code == 0);
  const auto summary = json::parse(r.out);
  CHECK(summary["outputs"] == 50);
  int pngs = 0;
  for (const auto& e : fs::directory_iterator(s / "lr")) pngs += e.path().extension() == ".png";
  CHECK(pngs == 50);
  const auto manifest = lines_of(slurp(s / "lr" / "manifest.jsonl"));
  CHECK(manifest.size() == 51);
  CHECK(json::parse(manifest[0])["config_hash"] == summary["config_hash"]);

  // A config file layered under flags gives the same run.
  {
    std::ofstream cfg(s / "run.json");
    cfg << json{{"pipeline", "complex"}, {"master_seed", 1}, {"per_hr", 5}, {"input_dir", in.string()}}.dump();
  }
  const auto again = run("synth --config " + q(s / "run.json") + " --seed 9 --workers 3 --output " + q(s / "lr2"), s);
  REQUIRE(again.code == 0);
  CHECK(slurp(s / "lr" / "manifest.jsonl") == slurp(s / "lr2" / "manifest.jsonl"));
  CHECK(slurp(s / "lr" / "hr3_2.png") == slurp(s / "lr2" / "hr3_2.png"));

  const auto label = run("label --precision triple --manifest " + q(s / "lr" / "manifest.jsonl"), s);
  REQUIRE(label.code == 0);
  const auto labels = lines_of(label.out);
  CHECK(labels.size() == 50);
  CHECK(json::parse(labels[0])["precision"] == "triple");

  const auto same = run("metrics --ref " + q(s / "lr") + " --test " + q(s / "lr"), s);
  CHECK(same.code == 0);
  const auto report = json::parse(same.out);
  CHECK(report["count"] == 50);
  CHECK(report["mean_ssim"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report["mean_psnr"] == 100.0);

  fs::remove(s / "lr2" / "hr0_0.png");
  const auto partial = run("metrics --ref " + q(s / "lr") + " --test " + q(s / "lr2"), s);
  CHECK(partial.code == 2);
  CHECK(json::parse(partial.out)["missing"] == json::array({"hr0_0"}));
  fs::remove_all(s);
}

TEST_CASE("kernel and PCA tools") {
  const fs::path s = oracle::scratch_dir("cli_kernels");
  const auto k = run("kernels --shape aniso_gaussian --sigma-x 2 --sigma-y 1 --theta 0.5", s);
  REQUIRE(k.code == 0);
  const auto kj = json::parse(k.out);
  double sum = 0;
  for (double w : kj["kernel"]["weights"]) sum += w;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  const auto sampled = run("kernels --sample 7 --seed 3", s);
  CHECK(lines_of(sampled.out).size() == 7);

  REQUIRE(run("pca fit --pipeline complex --count 500 --output " + q(s / "basis.json"), s).code == 0);
  const auto proj = run("pca project --basis " + q(s / "basis.json") +
                            " --spec '{\"shape\":\"iso_gaussian\",\"sigma_x\":1.5,\"sigma_y\":1.5}'",
                        s);
  REQUIRE(proj.code == 0);
  CHECK(json::parse(proj.out)["code"].size() == 10);
  fs::remove_all(s);
}

TEST_CASE("exit codes") {
  const fs::path s = oracle::scratch_dir("cli_exit");
  CHECK(run("", s).code == 1);
  CHECK(run("synth --workers lots", s).code == 1);
  CHECK(run("metrics --ref " + q(s), s).code == 1);
  CHECK(run("synth --input " + q(s / "missing") + " --output " + q(s / "o"), s).code == 2);
  CHECK(run("label --manifest " + q(s / "none.jsonl"), s).code == 2);
  CHECK(run("kernels --shape iso_gaussian --sigma-x 9", s).code == 2);
  const fs::path in = make_inputs(s / "hr", 4);
  CHECK(run("synth --pipeline complex --h264-policy abort --seed 2 --input " + q(in) + " --output " + q(s / "o"), s)
            .code == 3);
  fs::remove_all(s);
}

}  // TEST_SUITE
