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

#ifndef DEGRADEKIT_INSERTION_H_
#define DEGRADEKIT_INSERTION_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "degradekit/image.h"

namespace degradekit {

// C x H x W feature tensor, channel-major.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w, double fill = 0.0);

  double& at(int c, int y, int x) {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height) * width;
  }
  bool same_shape(const FeatureMap& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

FeatureMap feature_map_from_image(const ImageBuffer& image);

using MetaVector = std::vector<double>;

// Fully connected layer: y = W x + b, W is out x in row-major.
struct Dense {
  int out = 0;
  int in = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  Dense() = default;
  Dense(int out_features, int in_features);
  std::vector<double> apply(std::span<const double> x) const;
};

// 3x3 convolution (cross-correlation), reflect-101 borders, same size.
// Weight layout: [out][in][ky][kx].
struct Conv3x3 {
  int out = 0;
  int in = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  Conv3x3() = default;
  Conv3x3(int out_channels, int in_channels);
  FeatureMap apply(const FeatureMap& x) const;
};

struct MaWeights {
  Dense fc1;  // hidden x M
  Dense fc2;  // C x hidden
};

struct SftWeights {
  Conv3x3 gamma1;  // C x (C + M)
  Conv3x3 gamma2;  // C x C
  Conv3x3 beta1;
  Conv3x3 beta2;
};

struct DaWeights {
  MaWeights gate;    // channel-scaling path
  Dense kernel_fc;   // (C * 9) x M, one 3x3 depthwise kernel per channel
};

struct DgfmbWeights {
  Dense meta_fc;  // M x M, linear
  Dense fc1;      // hidden x (C + M)
  Dense fc2;      // C x hidden
};

// Hidden width of the two-layer gates: max(M, C / 8).
int gate_hidden_width(int meta_dim, int channels);

// Deterministic uniform [-0.1, 0.1] initialization.
MaWeights make_ma_weights(int meta_dim, int channels, std::uint64_t seed);
SftWeights make_sft_weights(int meta_dim, int channels, std::uint64_t seed);
DaWeights make_da_weights(int meta_dim, int channels, std::uint64_t seed);
DgfmbWeights make_dgfmb_weights(int meta_dim, int channels, std::uint64_t seed);

// sigmoid(fc2(relu(fc1(v)))), one factor per channel.
std::vector<double> ma_gate(const MetaVector& v, const MaWeights& w);

FeatureMap ma_forward(const FeatureMap& f, const MetaVector& v,
                      const MaWeights& w);

// Constant planes, channel m filled with v[m].
FeatureMap srmd_channels(const MetaVector& v, int height, int width);
FeatureMap srmd_concat(const FeatureMap& image, const MetaVector& v);

FeatureMap sft_forward(const FeatureMap& f, const MetaVector& v,
                       const SftWeights& w);

FeatureMap da_forward(const FeatureMap& f, const MetaVector& v,
                      const DaWeights& w);

FeatureMap dgfmb_forward(const FeatureMap& f, const MetaVector& v,
                         const DgfmbWeights& w, bool use_meta_fc);

// Vector-Jacobian products for a scalar objective with upstream gradient
// `grad_out` (same shape as the block output).
struct BlockGradients {
  FeatureMap grad_f;
  std::vector<double> grad_v;
};

BlockGradients ma_backward(const FeatureMap& f, const MetaVector& v,
                           const MaWeights& w, const FeatureMap& grad_out);

BlockGradients dgfmb_backward(const FeatureMap& f, const MetaVector& v,
                              const DgfmbWeights& w, bool use_meta_fc,
                              const FeatureMap& grad_out);

// Same vector for every insertion point of an "(all)" network variant.
std::vector<MetaVector> broadcast_meta(const MetaVector& v, int points);

// JSON with explicit shapes:
// {"block": "ma", "meta_dim": M, "channels": C,
//  "tensors": {"fc1.weight": {"shape": [h, M], "data": [...]}, ...}}
nlohmann::json to_json(const MaWeights& w);
nlohmann::json to_json(const SftWeights& w);
nlohmann::json to_json(const DaWeights& w);
nlohmann::json to_json(const DgfmbWeights& w);
MaWeights ma_weights_from_json(const nlohmann::json& j);
SftWeights sft_weights_from_json(const nlohmann::json& j);
DaWeights da_weights_from_json(const nlohmann::json& j);
DgfmbWeights dgfmb_weights_from_json(const nlohmann::json& j);

}  // namespace degradekit

#endif  // DEGRADEKIT_INSERTION_H_
