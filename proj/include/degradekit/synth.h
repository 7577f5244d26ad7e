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

#ifndef DEGRADEKIT_SYNTH_H_
#define DEGRADEKIT_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "degradekit/codec.h"
#include "degradekit/degrade.h"
#include "degradekit/framework.h"
#include "degradekit/kernels.h"

namespace degradekit {

enum class MetaMode { kNone, kOracle, kNoisyOracle };

std::string_view to_string(MetaMode mode);
MetaMode meta_mode_from_string(std::string_view name);

struct RunConfig {
  Pipeline pipeline = Pipeline::kSimple;
  std::uint64_t master_seed = 0;
  int per_hr = 0;  // 0: 1 for simple and scenarios, 5 for complex
  std::filesystem::path input_dir;
  std::filesystem::path output_dir;
  std::string scenario;  // empty: no preset
  H264Policy h264_policy = H264Policy::kSubstitute;
  int crop_border = kScale;
  std::optional<double> sigma;  // fixed simple-pipeline blur width
  MetaMode meta = MetaMode::kNone;
  std::optional<MetaFormat> meta_format;  // default: sigma (simple), complex15
  double meta_std = kMetaNoiseStd;
  std::filesystem::path pca_basis;  // empty: fit a fresh population
  int workers = 1;

  int effective_per_hr() const;
  MetaFormat effective_meta_format() const;
  void validate() const;
};

// Fields not listed are left at their current values, so a config file can be
// layered over defaults and flags over the file.
void merge_run_config(RunConfig& config, const nlohmann::json& j);

// Everything that determines the synthesized bytes. Paths and the worker
// count are excluded so relocated or parallel runs share a header.
nlohmann::json canonical_config(const RunConfig& config);
std::string config_hash(const RunConfig& config);

inline constexpr const char* kManifestName = "manifest.jsonl";

struct SynthSummary {
  std::size_t sources = 0;
  std::size_t outputs = 0;
  std::size_t substituted = 0;
  std::filesystem::path manifest;
};

// Reads every PNG under input_dir, writes LR PNGs and manifest.jsonl under
// output_dir. The manifest starts with a header line and lists records sorted
// by (source id, replica).
SynthSummary synthesize(const RunConfig& config,
                        const ExternalEncoder* h264 = nullptr);

}  // namespace degradekit

#endif  // DEGRADEKIT_SYNTH_H_
