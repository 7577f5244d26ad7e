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

#ifndef DEGRADEKIT_METRICS_H_
#define DEGRADEKIT_METRICS_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "degradekit/image.h"

namespace degradekit {

// BT.601 luma. Studio: 16..235 on a [0,1] scale; full: 0.299 R + 0.587 G +
// 0.114 B.
enum class LumaSwing { kStudio, kFull };

std::string_view to_string(LumaSwing swing);
LumaSwing luma_swing_from_string(std::string_view name);

Plane rgb_to_y(const ImageBuffer& image, LumaSwing swing = LumaSwing::kStudio);

// Reported for identical inputs and as an upper bound.
inline constexpr double kPsnrCap = 100.0;

double psnr(const Plane& ref, const Plane& test);

// Mean SSIM, 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
// dynamic range 1, valid positions only.
double ssim(const Plane& ref, const Plane& test);

Plane crop_border(const Plane& plane, int border);

struct MetricOptions {
  int crop_border = 0;
  LumaSwing swing = LumaSwing::kStudio;
};

double psnr_y(const ImageBuffer& ref, const ImageBuffer& test,
              const MetricOptions& options = {});
double ssim_y(const ImageBuffer& ref, const ImageBuffer& test,
              const MetricOptions& options = {});

struct PairMetrics {
  std::string id;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct MetricReport {
  std::vector<PairMetrics> pairs;        // sorted by id
  std::vector<std::string> missing;      // in ref, absent from test
  std::vector<std::string> unexpected;   // in test, absent from ref
  std::vector<std::string> size_mismatch;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  MetricOptions options;

  std::size_t count() const { return pairs.size(); }
  bool complete() const {
    return missing.empty() && unexpected.empty() && size_mismatch.empty();
  }
};

// PNG files under `dir`, keyed by relative path without extension.
std::map<std::string, std::filesystem::path> list_png_ids(
    const std::filesystem::path& dir);

MetricReport evaluate_dirs(const std::filesystem::path& ref_dir,
                           const std::filesystem::path& test_dir,
                           const MetricOptions& options = {}, int workers = 1);

nlohmann::json to_json(const MetricReport& report);

}  // namespace degradekit

#endif  // DEGRADEKIT_METRICS_H_
