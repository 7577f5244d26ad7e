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

#include "degradekit/resample.h"

#include <cmath>
#include <numbers>
#include <string>

#include "degradekit/error.h"

namespace degradekit {
namespace {

// Half-sample symmetric: -1 -> 0, n -> n-1.
int reflect_symmetric(int i, int n) {
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

double cubic_kernel(double x) {
  const double ax = std::abs(x);
  const double ax2 = ax * ax;
  const double ax3 = ax2 * ax;
  if (ax <= 1.0) return 1.5 * ax3 - 2.5 * ax2 + 1.0;
  if (ax <= 2.0) return -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0;
  return 0.0;
}

double lanczos3_kernel(double x) {
  if (std::abs(x) >= 3.0) return 0.0;
  return sinc(x) * sinc(x / 3.0);
}

AxisWeights axis_weights(int in_size, int out_size, ResampleFilter filter,
                         bool antialias) {
  const double scale = static_cast<double>(out_size) / in_size;
  const double support = filter == ResampleFilter::kCubic ? 2.0 : 3.0;
  const bool stretch = antialias && scale < 1.0;
  const double kernel_width = stretch ? 2.0 * support / scale : 2.0 * support;
  const int taps = static_cast<int>(std::ceil(kernel_width)) + 2;
  auto kernel = [&](double x) {
    const double arg = stretch ? x * scale : x;
    const double v = filter == ResampleFilter::kCubic ? cubic_kernel(arg)
                                                      : lanczos3_kernel(arg);
    return stretch ? v * scale : v;
  };

  AxisWeights out;
  out.indices.resize(out_size);
  out.weights.resize(out_size);
  for (int i = 0; i < out_size; ++i) {
    const double center = (i + 0.5) / scale - 0.5;
    const int left = static_cast<int>(std::floor(center - kernel_width / 2.0));
    std::vector<int> idx;
    std::vector<double> w;
    double total = 0.0;
    for (int t = 0; t < taps; ++t) {
      const int src = left + t;
      const double weight = kernel(center - src);
      if (weight == 0.0) continue;
      idx.push_back(reflect_symmetric(src, in_size));
      w.push_back(weight);
      total += weight;
    }
    for (double& v : w) v /= total;
    out.indices[i] = std::move(idx);
    out.weights[i] = std::move(w);
  }
  return out;
}

ImageBuffer resize(const ImageBuffer& image, int out_height, int out_width,
                   ResampleFilter filter, bool antialias) {
  constexpr int C = ImageBuffer::kChannels;
  const AxisWeights rows =
      axis_weights(image.height(), out_height, filter, antialias);
  const AxisWeights cols =
      axis_weights(image.width(), out_width, filter, antialias);

  ImageBuffer tmp(out_height, image.width());
  for (int y = 0; y < out_height; ++y) {
    const auto& idx = rows.indices[y];
    const auto& w = rows.weights[y];
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        for (std::size_t t = 0; t < idx.size(); ++t) {
          acc += w[t] * image.at(idx[t], x, c);
        }
        tmp.at(y, x, c) = acc;
      }
    }
  }

  ImageBuffer out(out_height, out_width);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const auto& idx = cols.indices[x];
      const auto& w = cols.weights[x];
      for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        for (std::size_t t = 0; t < idx.size(); ++t) {
          acc += w[t] * tmp.at(y, idx[t], c);
        }
        out.at(y, x, c) = acc;
      }
    }
  }
  return out;
}

ImageBuffer downsample_bicubic(const ImageBuffer& image, int scale) {
  if (scale < 1 || image.height() % scale != 0 || image.width() % scale != 0) {
    throw DataError("downsample_bicubic: " + std::to_string(image.height()) +
                    "x" + std::to_string(image.width()) +
                    " is not divisible by scale " + std::to_string(scale));
  }
  ImageBuffer out = resize(image, image.height() / scale, image.width() / scale,
                           ResampleFilter::kCubic, true);
  clamp01(out);
  return out;
}

ImageBuffer upsample_bicubic(const ImageBuffer& image, int scale) {
  ImageBuffer out = resize(image, image.height() * scale, image.width() * scale,
                           ResampleFilter::kCubic, false);
  clamp01(out);
  return out;
}

ImageBuffer upsample_lanczos(const ImageBuffer& image, int scale) {
  ImageBuffer out = resize(image, image.height() * scale, image.width() * scale,
                           ResampleFilter::kLanczos3, false);
  clamp01(out);
  return out;
}

}  // namespace degradekit
