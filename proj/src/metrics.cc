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

#include "degradekit/metrics.h"

#include <algorithm>
#include <cmath>
#include <optional>

#include "degradekit/error.h"
#include "degradekit/parallel.h"

namespace degradekit {
namespace {

namespace fs = std::filesystem;

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void require_same(const Plane& a, const Plane& b) {
  if (a.height != b.height || a.width != b.width) {
    throw DataError("metric inputs differ in size: " + std::to_string(a.height) +
                    "x" + std::to_string(a.width) + " vs " +
                    std::to_string(b.height) + "x" + std::to_string(b.width));
  }
  if (a.values.empty()) throw DataError("metric inputs are empty");
}

std::vector<double> gaussian_taps() {
  std::vector<double> taps(kWindow);
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    taps[i] = std::exp(-d * d / (2.0 * kWindowSigma * kWindowSigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable valid-mode filtering with the SSIM window.
Plane filter_valid(const Plane& p, const std::vector<double>& taps) {
  const int oh = p.height - kWindow + 1;
  const int ow = p.width - kWindow + 1;
  Plane rows(p.height, ow);
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * p.at(y, x + k);
      rows.at(y, x) = acc;
    }
  }
  Plane out(oh, ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * rows.at(y + k, x);
      out.at(y, x) = acc;
    }
  }
  return out;
}

Plane product(const Plane& a, const Plane& b) {
  Plane out(a.height, a.width);
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    out.values[i] = a.values[i] * b.values[i];
  }
  return out;
}

}  // namespace

std::string_view to_string(LumaSwing swing) {
  return swing == LumaSwing::kStudio ? "studio" : "full";
}

LumaSwing luma_swing_from_string(std::string_view name) {
  if (name == "studio") return LumaSwing::kStudio;
  if (name == "full") return LumaSwing::kFull;
  throw DataError("unknown luma swing '" + std::string(name) + "'");
}

Plane rgb_to_y(const ImageBuffer& image, LumaSwing swing) {
  Plane y(image.height(), image.width());
  const auto& d = image.data();
  for (std::size_t i = 0; i < y.values.size(); ++i) {
    const double r = d[3 * i], g = d[3 * i + 1], b = d[3 * i + 2];
    y.values[i] = swing == LumaSwing::kStudio
                      ? (16.0 + 65.481 * r + 128.553 * g + 24.966 * b) / 255.0
                      : 0.299 * r + 0.587 * g + 0.114 * b;
  }
  return y;
}

double psnr(const Plane& ref, const Plane& test) {
  require_same(ref, test);
  double sse = 0.0;
  for (std::size_t i = 0; i < ref.values.size(); ++i) {
    const double d = ref.values[i] - test.values[i];
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(ref.values.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Plane& ref, const Plane& test) {
  require_same(ref, test);
  if (ref.height < kWindow || ref.width < kWindow) {
    throw DataError("ssim needs both sides >= 11, got " +
                    std::to_string(ref.height) + "x" + std::to_string(ref.width));
  }
  const auto taps = gaussian_taps();
  const Plane mu1 = filter_valid(ref, taps);
  const Plane mu2 = filter_valid(test, taps);
  const Plane s11 = filter_valid(product(ref, ref), taps);
  const Plane s22 = filter_valid(product(test, test), taps);
  const Plane s12 = filter_valid(product(ref, test), taps);
  double acc = 0.0;
  for (std::size_t i = 0; i < mu1.values.size(); ++i) {
    const double m1 = mu1.values[i], m2 = mu2.values[i];
    const double v1 = s11.values[i] - m1 * m1;
    const double v2 = s22.values[i] - m2 * m2;
    const double cov = s12.values[i] - m1 * m2;
    acc += ((2.0 * m1 * m2 + kC1) * (2.0 * cov + kC2)) /
           ((m1 * m1 + m2 * m2 + kC1) * (v1 + v2 + kC2));
  }
  return acc / static_cast<double>(mu1.values.size());
}

Plane crop_border(const Plane& plane, int border) {
  if (border < 0) throw DataError("crop border must be non-negative");
  if (border == 0) return plane;
  const int h = plane.height - 2 * border;
  const int w = plane.width - 2 * border;
  if (h < 1 || w < 1) {
    throw DataError("crop border " + std::to_string(border) +
                    " leaves nothing of a " + std::to_string(plane.height) + "x" +
                    std::to_string(plane.width) + " image");
  }
  Plane out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.at(y, x) = plane.at(y + border, x + border);
  }
  return out;
}

double psnr_y(const ImageBuffer& ref, const ImageBuffer& test,
              const MetricOptions& options) {
  return psnr(crop_border(rgb_to_y(ref, options.swing), options.crop_border),
              crop_border(rgb_to_y(test, options.swing), options.crop_border));
}

double ssim_y(const ImageBuffer& ref, const ImageBuffer& test,
              const MetricOptions& options) {
  return ssim(crop_border(rgb_to_y(ref, options.swing), options.crop_border),
              crop_border(rgb_to_y(test, options.swing), options.crop_border));
}

std::map<std::string, fs::path> list_png_ids(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw DataError("not a directory: " + dir.string());
  }
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext != ".png") continue;
    fs::path rel = fs::relative(entry.path(), dir);
    rel.replace_extension();
    out.emplace(rel.generic_string(), entry.path());
  }
  return out;
}

MetricReport evaluate_dirs(const fs::path& ref_dir, const fs::path& test_dir,
                           const MetricOptions& options, int workers) {
  const auto refs = list_png_ids(ref_dir);
  const auto tests = list_png_ids(test_dir);
  MetricReport report;
  report.options = options;
  std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> jobs;
  for (const auto& [id, path] : refs) {
    auto it = tests.find(id);
    if (it == tests.end()) {
      report.missing.push_back(id);
    } else {
      jobs.push_back({id, {path, it->second}});
    }
  }
  for (const auto& [id, path] : tests) {
    if (!refs.count(id)) report.unexpected.push_back(id);
  }

  std::vector<std::optional<PairMetrics>> results(jobs.size());
  parallel_for(jobs.size(), workers, [&](std::size_t i) {
    const auto& [id, paths] = jobs[i];
    const ImageBuffer ref = read_png(paths.first);
    const ImageBuffer test = read_png(paths.second);
    if (!ref.same_shape(test)) return;
    results[i] = PairMetrics{id, psnr_y(ref, test, options),
                             ssim_y(ref, test, options)};
  });
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (results[i]) {
      report.pairs.push_back(*results[i]);
    } else {
      report.size_mismatch.push_back(jobs[i].first);
    }
  }
  if (!report.pairs.empty()) {
    double sp = 0.0, ss = 0.0;
    for (const auto& p : report.pairs) {
      sp += p.psnr_db;
      ss += p.ssim;
    }
    report.mean_psnr = sp / static_cast<double>(report.pairs.size());
    report.mean_ssim = ss / static_cast<double>(report.pairs.size());
  }
  return report;
}

nlohmann::json to_json(const MetricReport& report) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : report.pairs) {
    pairs.push_back({{"id", p.id}, {"psnr_db", p.psnr_db}, {"ssim", p.ssim}});
  }
  return {{"pairs", pairs},
          {"mean_psnr", report.mean_psnr},
          {"mean_ssim", report.mean_ssim},
          {"crop_border", report.options.crop_border},
          {"swing", to_string(report.options.swing)},
          {"count", report.count()},
          {"missing", report.missing},
          {"unexpected", report.unexpected},
          {"size_mismatch", report.size_mismatch}};
}

}  // namespace degradekit
