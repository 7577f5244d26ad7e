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

#include "degradekit/synth.h"

#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

#include "degradekit/error.h"
#include "degradekit/image.h"
#include "degradekit/metrics.h"
#include "degradekit/parallel.h"
#include "degradekit/random.h"

namespace degradekit {
namespace {

namespace fs = std::filesystem;

constexpr int kManifestVersion = 1;

struct Output {
  std::string id;
  int replica = 0;
  std::string lr_path;
  DegradationRecord record;
  std::optional<MetaVector> meta;
};

std::string output_name(const std::string& id, int replica, int per_hr,
                        const ScenarioVariant* variant, int variant_replica) {
  std::string name = id;
  if (variant != nullptr) {
    name += "_" + variant->tag;
    if (per_hr > 1) name += "_" + std::to_string(variant_replica);
  } else if (per_hr > 1) {
    name += "_" + std::to_string(replica);
  }
  return name + ".png";
}

PcaBasis load_basis(const RunConfig& config) {
  if (config.pca_basis.empty()) return fit_pca_population(config.pipeline);
  std::ifstream in(config.pca_basis);
  if (!in) throw DataError("cannot read PCA basis " + config.pca_basis.string());
  try {
    return pca_basis_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("malformed PCA basis " + config.pca_basis.string() + ": " +
                    e.what());
  }
}

}  // namespace

std::string_view to_string(MetaMode mode) {
  switch (mode) {
    case MetaMode::kNone:
      return "none";
    case MetaMode::kOracle:
      return "oracle";
    case MetaMode::kNoisyOracle:
      return "noisy_oracle";
  }
  return "unknown";
}

MetaMode meta_mode_from_string(std::string_view name) {
  if (name == "none") return MetaMode::kNone;
  if (name == "oracle") return MetaMode::kOracle;
  if (name == "noisy_oracle") return MetaMode::kNoisyOracle;
  throw DataError("unknown meta mode '" + std::string(name) + "'");
}

int RunConfig::effective_per_hr() const {
  if (per_hr > 0) return per_hr;
  return pipeline == Pipeline::kComplex && scenario.empty() ? 5 : 1;
}

MetaFormat RunConfig::effective_meta_format() const {
  if (meta_format) return *meta_format;
  return pipeline == Pipeline::kSimple && scenario.empty() ? MetaFormat::kSigma
                                                           : MetaFormat::kComplex15;
}

void RunConfig::validate() const {
  if (per_hr < 0) throw DataError("per_hr must be >= 1");
  if (input_dir.empty()) throw DataError("input_dir is required");
  if (output_dir.empty()) throw DataError("output_dir is required");
  if (!fs::is_directory(input_dir)) {
    throw DataError("input_dir does not exist: " + input_dir.string());
  }
  if (crop_border < 0) throw DataError("crop_border must be >= 0");
  if (workers < 1) throw DataError("workers must be >= 1");
  if (!(meta_std >= 0.0)) throw DataError("meta_std must be >= 0");
  if (sigma) {
    if (pipeline != Pipeline::kSimple || !scenario.empty()) {
      throw DataError("sigma applies to the simple pipeline only");
    }
    BlurKernelSpec::iso_gaussian(*sigma).validate();
  }
  if (!scenario.empty()) scenario_variants(scenario);
}

void merge_run_config(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("config must be a JSON object");
  try {
    if (j.contains("pipeline")) {
      c.pipeline = pipeline_from_string(j["pipeline"].get<std::string>());
    }
    if (j.contains("master_seed")) c.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("per_hr")) c.per_hr = j["per_hr"].get<int>();
    if (j.contains("input_dir")) c.input_dir = j["input_dir"].get<std::string>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("scenario")) c.scenario = j["scenario"].get<std::string>();
    if (j.contains("h264_policy")) {
      c.h264_policy = h264_policy_from_string(j["h264_policy"].get<std::string>());
    }
    if (j.contains("crop_border")) c.crop_border = j["crop_border"].get<int>();
    if (j.contains("sigma")) {
      if (j["sigma"].is_null()) {
        c.sigma.reset();
      } else {
        c.sigma = j["sigma"].get<double>();
      }
    }
    if (j.contains("meta")) c.meta = meta_mode_from_string(j["meta"].get<std::string>());
    if (j.contains("meta_format")) {
      c.meta_format = meta_format_from_string(j["meta_format"].get<std::string>());
    }
    if (j.contains("meta_std")) c.meta_std = j["meta_std"].get<double>();
    if (j.contains("pca_basis")) c.pca_basis = j["pca_basis"].get<std::string>();
    if (j.contains("workers")) c.workers = j["workers"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed config: ") + e.what());
  }
}

nlohmann::json canonical_config(const RunConfig& c) {
  nlohmann::json j = {
      {"pipeline", to_string(c.pipeline)},
      {"master_seed", c.master_seed},
      {"per_hr", c.effective_per_hr()},
      {"scenario", c.scenario},
      {"h264_policy", to_string(c.h264_policy)},
      {"crop_border", c.crop_border},
      {"sigma", c.sigma ? nlohmann::json(*c.sigma) : nlohmann::json(nullptr)},
      {"meta", to_string(c.meta)},
      {"scale", kScale},
  };
  if (c.meta != MetaMode::kNone) {
    j["meta_format"] = to_string(c.effective_meta_format());
    if (c.meta == MetaMode::kNoisyOracle) j["meta_std"] = c.meta_std;
  }
  return j;
}

std::string config_hash(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    fnv1a64(canonical_config(config).dump())));
  return buf;
}

SynthSummary synthesize(const RunConfig& config, const ExternalEncoder* h264) {
  config.validate();
  const auto sources = list_png_ids(config.input_dir);
  const int per_hr = config.effective_per_hr();
  const std::vector<ScenarioVariant> variants =
      config.scenario.empty() ? std::vector<ScenarioVariant>{}
                              : scenario_variants(config.scenario);
  const int outputs_per_source =
      variants.empty() ? per_hr : static_cast<int>(variants.size()) * per_hr;

  std::unique_ptr<PcaBasis> basis;
  const MetaFormat meta_format = config.effective_meta_format();
  if (config.meta != MetaMode::kNone && meta_format == MetaFormat::kPca) {
    basis = std::make_unique<PcaBasis>(load_basis(config));
  }

  DegradeOptions options;
  options.h264 = h264;
  options.h264_policy = config.h264_policy;

  fs::create_directories(config.output_dir);
  std::vector<std::pair<std::string, fs::path>> items(sources.begin(),
                                                      sources.end());
  std::vector<std::vector<Output>> results(items.size());

  parallel_for(items.size(), config.workers, [&](std::size_t i) {
    const auto& [id, path] = items[i];
    ImageBuffer hr;
    try {
      hr = modcrop(read_png(path), kScale);
    } catch (const DataError& e) {
      throw DataError(id + ": " + e.what());
    }
    auto& out = results[i];
    out.reserve(static_cast<std::size_t>(outputs_per_source));
    for (int r = 0; r < outputs_per_source; ++r) {
      const std::uint64_t seed =
          derive_seed(config.master_seed, id, static_cast<std::uint64_t>(r));
      std::pair<ImageBuffer, DegradationRecord> result;
      const ScenarioVariant* variant = nullptr;
      if (!variants.empty()) {
        variant = &variants[static_cast<std::size_t>(r / per_hr)];
        result = apply_scenario(hr, *variant, seed, options);
      } else if (config.pipeline == Pipeline::kComplex) {
        result = degrade_complex(hr, seed, options);
      } else if (config.sigma) {
        result = degrade_simple(hr, *config.sigma, seed);
      } else {
        result = degrade_simple_random(hr, seed);
      }
      auto& [lr, record] = result;
      record.source_id = id;

      Output o;
      o.id = id;
      o.replica = r;
      o.lr_path = output_name(id, r, per_hr, variant, r % per_hr);
      if (config.meta == MetaMode::kOracle) {
        o.meta = oracle_encoding(record, meta_format, basis.get());
      } else if (config.meta == MetaMode::kNoisyOracle) {
        o.meta = NoisyOraclePredictor(record, meta_format,
                                      substream(record.seed, "meta"),
                                      config.meta_std, basis.get())
                     .predict(lr);
      }
      const fs::path dest = config.output_dir / o.lr_path;
      fs::create_directories(dest.parent_path());
      write_png(dest, lr);
      o.record = std::move(record);
      out.push_back(std::move(o));
    }
  });

  SynthSummary summary;
  summary.sources = items.size();
  summary.manifest = config.output_dir / kManifestName;
  std::ofstream manifest(summary.manifest, std::ios::binary | std::ios::trunc);
  if (!manifest) throw DataError("cannot write " + summary.manifest.string());
  const nlohmann::json header = {{"manifest_version", kManifestVersion},
                                 {"config", canonical_config(config)},
                                 {"config_hash", config_hash(config)}};
  manifest << header.dump() << '\n';
  for (const auto& per_source : results) {
    for (const auto& o : per_source) {
      nlohmann::json line = to_json(o.record);
      line["lr_path"] = o.lr_path;
      line["replica"] = o.replica;
      if (o.meta) {
        line["meta"] = *o.meta;
        line["meta_format"] = to_string(meta_format);
      }
      manifest << line.dump() << '\n';
      ++summary.outputs;
      if (o.record.substituted_compression) ++summary.substituted;
    }
  }
  if (!manifest) throw DataError("failed writing " + summary.manifest.string());
  return summary;
}

}  // namespace degradekit
