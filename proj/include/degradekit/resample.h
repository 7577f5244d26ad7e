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

#ifndef DEGRADEKIT_RESAMPLE_H_
#define DEGRADEKIT_RESAMPLE_H_

#include <vector>

#include "degradekit/image.h"

namespace degradekit {

enum class ResampleFilter {
  kCubic,     // Keys cubic, a = -0.5, support 2
  kLanczos3,  // windowed sinc, support 3
};

double cubic_kernel(double x);
double lanczos3_kernel(double x);

// Per-output-sample taps along one axis, MATLAB imresize-compatible:
// half-sample symmetric borders, and on minification (antialias == true)
// the kernel is stretched by 1/scale.
struct AxisWeights {
  std::vector<std::vector<int>> indices;   // already boundary-mapped
  std::vector<std::vector<double>> weights;
};

AxisWeights axis_weights(int in_size, int out_size, ResampleFilter filter,
                         bool antialias);

// Separable resize, no clamping.
ImageBuffer resize(const ImageBuffer& image, int out_height, int out_width,
                   ResampleFilter filter, bool antialias = true);

// Antialiased bicubic minification; throws DataError unless both sides are
// divisible by `scale`. Output clamped to [0,1].
ImageBuffer downsample_bicubic(const ImageBuffer& image, int scale);

// Plain interpolation (no antialias stretch), clamped to [0,1].
ImageBuffer upsample_bicubic(const ImageBuffer& image, int scale);
ImageBuffer upsample_lanczos(const ImageBuffer& image, int scale);

}  // namespace degradekit

#endif  // DEGRADEKIT_RESAMPLE_H_
