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

// degradekit command-line front-end.
//
// Exit codes: 0 success, 1 usage, 2 data error (including self-test or
// metric-pairing failures), 3 codec backend error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "degradekit/codec.h"
#include "degradekit/degrade.h"
#include "degradekit/error.h"
#include "degradekit/kernels.h"
#include "degradekit/metadata.h"
#include "degradekit/metrics.h"
#include "degradekit/parallel.h"
#include "degradekit/random.h"
#include "degradekit/selftest.h"
#include "degradekit/synth.h"

namespace dk = degradekit;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dk::DataError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw dk::DataError(path + ": " + e.what());
  }
}

void write_json_output(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw dk::DataError("cannot write " + path);
  out << j.dump(2) << '\n';
}

// Record lines of a manifest; the header line is skipped.
std::vector<json> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dk::DataError("cannot read manifest " + path);
  std::vector<json> lines;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw dk::DataError(path + ":" + std::to_string(number) + ": " + e.what());
    }
    if (j.contains("manifest_version")) continue;
    lines.push_back(std::move(j));
  }
  return lines;
}

struct SynthArgs {
  std::string config;
  std::string pipeline, input, output, scenario, h264_policy, meta, meta_format,
      pca_basis;
  std::uint64_t seed = 0;
  int per_hr = 0, crop_border = 0, workers = 0;
  double sigma = 0.0, meta_std = 0.0;
};

struct KernelArgs {
  std::string shape = "iso_gaussian";
  double sigma_x = 1.0, sigma_y = 0.0, theta = 0.0, beta = 0.0, cutoff = 0.0;
  int size = dk::KernelRanges::kDefaultSize;
  int sample = 0;
  std::string pipeline = "complex";
  std::uint64_t seed = 0;
};

struct PcaArgs {
  std::string pipeline = "complex";
  int count = 10000;
  int components = dk::kPcaComponents;
  std::uint64_t seed = 0;
  std::string basis, manifest, spec, output;
};

struct LabelArgs {
  std::string manifest, precision = "triple", output;
};

struct MetricArgs {
  std::string ref, test, swing = "studio", output;
  int crop_border = dk::kScale;
  int workers = 1;
};

int cmd_synth(const SynthArgs& a, CLI::App& sub) {
  dk::RunConfig config;
  if (!a.config.empty()) dk::merge_run_config(config, read_json_file(a.config));
  json flags = json::object();
  auto set = [&](const char* opt, const char* key, auto value) {
    if (sub.count(opt) > 0) flags[key] = value;
  };
  set("--pipeline", "pipeline", a.pipeline);
  set("--seed", "master_seed", a.seed);
  set("--per-hr", "per_hr", a.per_hr);
  set("--input", "input_dir", a.input);
  set("--output", "output_dir", a.output);
  set("--scenario", "scenario", a.scenario);
  set("--h264-policy", "h264_policy", a.h264_policy);
  set("--crop-border", "crop_border", a.crop_border);
  set("--sigma", "sigma", a.sigma);
  set("--meta", "meta", a.meta);
  set("--meta-format", "meta_format", a.meta_format);
  set("--meta-std", "meta_std", a.meta_std);
  set("--pca-basis", "pca_basis", a.pca_basis);
  set("--workers", "workers", a.workers);
  dk::merge_run_config(config, flags);

  const auto encoder = dk::ExternalEncoder::from_env();
  const dk::SynthSummary s =
      dk::synthesize(config, encoder ? &*encoder : nullptr);
  std::cout << json{{"sources", s.sources},
                    {"outputs", s.outputs},
                    {"substituted_compression", s.substituted},
                    {"manifest", s.manifest.string()},
                    {"config_hash", dk::config_hash(config)}}
                   .dump()
            << '\n';
  return kExitOk;
}

int cmd_kernels(const KernelArgs& a) {
  std::vector<dk::BlurKernelSpec> specs;
  if (a.sample > 0) {
    dk::Rng rng = dk::make_rng(a.seed);
    const dk::Pipeline pipeline = dk::pipeline_from_string(a.pipeline);
    for (int i = 0; i < a.sample; ++i) {
      specs.push_back(dk::sample_kernel_spec(rng, pipeline));
    }
  } else {
    dk::BlurKernelSpec spec;
    spec.shape = dk::kernel_shape_from_string(a.shape);
    spec.size = a.size;
    if (spec.shape == dk::KernelShape::kSinc) {
      spec.cutoff = a.cutoff;
    } else {
      spec.sigma_x = a.sigma_x;
      spec.sigma_y = dk::is_anisotropic(spec.shape) ? a.sigma_y : a.sigma_x;
      if (dk::is_anisotropic(spec.shape)) spec.theta = a.theta;
      if (dk::uses_beta(spec.shape)) spec.beta = a.beta;
    }
    specs.push_back(spec);
  }
  for (const auto& spec : specs) {
    std::cout << json{{"spec", dk::to_json(spec)},
                      {"kernel", dk::to_json(dk::synthesize_kernel(spec))}}
                     .dump()
              << '\n';
  }
  return kExitOk;
}

int cmd_pca_fit(const PcaArgs& a) {
  const dk::PcaBasis basis = dk::fit_pca_population(
      dk::pipeline_from_string(a.pipeline), a.count, a.seed, a.components);
  write_json_output(dk::to_json(basis), a.output);
  return kExitOk;
}

int cmd_pca_project(const PcaArgs& a) {
  const dk::PcaBasis basis = dk::pca_basis_from_json(read_json_file(a.basis));
  if (!a.spec.empty()) {
    json j;
    try {
      j = json::parse(a.spec);
    } catch (const json::parse_error& e) {
      throw dk::DataError(std::string("--spec: ") + e.what());
    }
    const auto code = dk::project_kernel(
        basis, dk::synthesize_kernel(dk::kernel_spec_from_json(j)));
    std::cout << json{{"code", code}}.dump() << '\n';
    return kExitOk;
  }
  for (const json& line : read_manifest(a.manifest)) {
    const dk::DegradationRecord record = dk::record_from_json(line);
    json out = {{"source_id", record.source_id},
                {"lr_path", line.value("lr_path", std::string())}};
    out["code"] = record.kernel
                      ? json(dk::project_kernel(
                            basis, dk::synthesize_kernel(*record.kernel)))
                      : json(nullptr);
    std::cout << out.dump() << '\n';
  }
  return kExitOk;
}

int cmd_label(const LabelArgs& a) {
  dk::SupMoCoLabelConfig config;
  config.precision = dk::label_precision_from_string(a.precision);
  std::ofstream file;
  if (!a.output.empty()) {
    file.open(a.output, std::ios::trunc);
    if (!file) throw dk::DataError("cannot write " + a.output);
  }
  std::ostream& out = a.output.empty() ? std::cout : file;
  for (const json& line : read_manifest(a.manifest)) {
    const dk::DegradationRecord record = dk::record_from_json(line);
    out << json{{"source_id", record.source_id},
                {"lr_path", line.value("lr_path", std::string())},
                {"label", dk::supmoco_label(record, config)},
                {"precision", dk::to_string(config.precision)}}
               .dump()
        << '\n';
  }
  return kExitOk;
}

int cmd_metrics(const MetricArgs& a) {
  dk::MetricOptions options;
  options.crop_border = a.crop_border;
  options.swing = dk::luma_swing_from_string(a.swing);
  const dk::MetricReport report =
      dk::evaluate_dirs(a.ref, a.test, options, a.workers);
  write_json_output(dk::to_json(report), a.output);
  if (!report.complete()) {
    std::cerr << "metrics: " << report.missing.size() << " missing, "
              << report.unexpected.size() << " unexpected, "
              << report.size_mismatch.size() << " size-mismatched files\n";
    return kExitData;
  }
  return kExitOk;
}

int cmd_selftest(std::uint64_t seed, const std::string& output) {
  const json report = dk::run_selftest(seed);
  write_json_output(report, output);
  return report.at("passed").get<bool>() ? kExitOk : kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"degradekit: blind super-resolution degradation toolkit"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* sub_synth = app.add_subcommand("synth", "synthesize LR images and a manifest");
  sub_synth->add_option("--config", synth.config, "JSON run config; flags override it");
  sub_synth->add_option("--pipeline", synth.pipeline, "simple | complex");
  sub_synth->add_option("--seed", synth.seed, "master seed");
  sub_synth->add_option("--per-hr", synth.per_hr, "LR images per HR image");
  sub_synth->add_option("--input", synth.input, "directory of HR PNGs");
  sub_synth->add_option("--output", synth.output, "output directory");
  sub_synth->add_option("--scenario", synth.scenario, "fixed test scenario name");
  sub_synth->add_option("--h264-policy", synth.h264_policy, "substitute | abort");
  sub_synth->add_option("--crop-border", synth.crop_border, "metric border crop");
  sub_synth->add_option("--sigma", synth.sigma, "fixed blur sigma (simple pipeline)");
  sub_synth->add_option("--meta", synth.meta, "none | oracle | noisy_oracle");
  sub_synth->add_option("--meta-format", synth.meta_format, "sigma | pca | complex15");
  sub_synth->add_option("--meta-std", synth.meta_std, "noisy oracle std");
  sub_synth->add_option("--pca-basis", synth.pca_basis, "basis JSON for pca meta");
  sub_synth->add_option("--workers", synth.workers, "worker threads");

  KernelArgs kernels;
  auto* sub_kernels = app.add_subcommand("kernels", "synthesize blur kernels as JSON lines");
  sub_kernels->add_option("--shape", kernels.shape, "kernel family");
  sub_kernels->add_option("--sigma-x", kernels.sigma_x);
  sub_kernels->add_option("--sigma-y", kernels.sigma_y);
  sub_kernels->add_option("--theta", kernels.theta);
  sub_kernels->add_option("--beta", kernels.beta);
  sub_kernels->add_option("--cutoff", kernels.cutoff);
  sub_kernels->add_option("--size", kernels.size);
  sub_kernels->add_option("--sample", kernels.sample, "draw N random specs instead");
  sub_kernels->add_option("--pipeline", kernels.pipeline, "sampling pipeline");
  sub_kernels->add_option("--seed", kernels.seed);

  PcaArgs pca;
  auto* sub_pca = app.add_subcommand("pca", "fit or apply a PCA kernel basis");
  sub_pca->require_subcommand(1);
  auto* sub_fit = sub_pca->add_subcommand("fit", "fit a basis on sampled kernels");
  sub_fit->add_option("--pipeline", pca.pipeline);
  sub_fit->add_option("--count", pca.count);
  sub_fit->add_option("--components", pca.components);
  sub_fit->add_option("--seed", pca.seed);
  sub_fit->add_option("--output", pca.output, "basis JSON path (default stdout)");
  auto* sub_project = sub_pca->add_subcommand("project", "project kernels onto a basis");
  sub_project->add_option("--basis", pca.basis)->required();
  auto* proj_src = sub_project->add_option_group("source");
  proj_src->add_option("--manifest", pca.manifest);
  proj_src->add_option("--spec", pca.spec, "kernel spec JSON");
  proj_src->require_option(1);

  LabelArgs label;
  auto* sub_label = app.add_subcommand("label", "SupMoCo labels for manifest records");
  sub_label->add_option("--manifest", label.manifest)->required();
  sub_label->add_option("--precision", label.precision, "double | triple");
  sub_label->add_option("--output", label.output, "JSONL path (default stdout)");

  MetricArgs metrics;
  auto* sub_metrics = app.add_subcommand("metrics", "Y-channel PSNR/SSIM between directories");
  sub_metrics->add_option("--ref", metrics.ref)->required();
  sub_metrics->add_option("--test", metrics.test)->required();
  sub_metrics->add_option("--crop-border", metrics.crop_border);
  sub_metrics->add_option("--swing", metrics.swing, "studio | full");
  sub_metrics->add_option("--workers", metrics.workers);
  sub_metrics->add_option("--output", metrics.output, "report path (default stdout)");

  std::uint64_t selftest_seed = 0;
  std::string selftest_output;
  auto* sub_selftest = app.add_subcommand("selftest", "run the built-in verification suites");
  sub_selftest->add_option("--seed", selftest_seed);
  sub_selftest->add_option("--output", selftest_output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sub_synth) return cmd_synth(synth, *sub_synth);
    if (*sub_kernels) return cmd_kernels(kernels);
    if (*sub_fit) return cmd_pca_fit(pca);
    if (*sub_project) return cmd_pca_project(pca);
    if (*sub_label) return cmd_label(label);
    if (*sub_metrics) return cmd_metrics(metrics);
    if (*sub_selftest) return cmd_selftest(selftest_seed, selftest_output);
  } catch (const dk::BackendUnavailable& e) {
    std::cerr << "backend unavailable: " << e.what() << '\n';
    return kExitBackend;
  } catch (const dk::BackendError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return kExitBackend;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
