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

#ifndef DEGRADEKIT_DEGRADE_H_
#define DEGRADEKIT_DEGRADE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "degradekit/codec.h"
#include "degradekit/image.h"
#include "degradekit/kernels.h"
#include "degradekit/random.h"

namespace degradekit {

inline constexpr int kScale = 4;

enum class NoiseKind { kNone, kGaussian, kPoisson };
enum class CompressionKind { kNone, kJpeg, kH264 };

std::string_view to_string(NoiseKind kind);
std::string_view to_string(CompressionKind kind);
NoiseKind noise_kind_from_string(std::string_view name);
CompressionKind compression_kind_from_string(std::string_view name);

struct NoiseRanges {
  static constexpr double kGaussianMin = 1.0;  // 8-bit units
  static constexpr double kGaussianMax = 30.0;
  static constexpr double kPoissonMin = 0.05;
  static constexpr double kPoissonMax = 3.0;
  static constexpr double kGreyProbability = 0.4;
  static constexpr double kPhotonCount = 255.0;
};

struct CompressionRanges {
  static constexpr int kJpegMin = 30;
  static constexpr int kJpegMax = 95;
  static constexpr int kQpiMin = 20;
  static constexpr int kQpiMax = 40;
};

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kNone;
  double magnitude = 0.0;  // Gaussian sigma (8-bit) or Poisson scale
  bool grey = false;

  void validate() const;
  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

struct CompressionSpec {
  CompressionKind kind = CompressionKind::kNone;
  int level = 0;  // JPEG quality or H.264 QPI

  void validate() const;
  friend bool operator==(const CompressionSpec&, const CompressionSpec&) = default;
};

// Everything needed to regenerate one LR image from its HR source.
struct DegradationRecord {
  Pipeline pipeline = Pipeline::kSimple;
  std::optional<BlurKernelSpec> kernel;
  int scale = kScale;
  NoiseSpec noise;
  CompressionSpec compression;
  std::uint64_t seed = 0;
  std::string source_id;
  bool substituted_compression = false;
  std::string scenario;  // empty unless produced by a preset

  friend bool operator==(const DegradationRecord&,
                         const DegradationRecord&) = default;
};

nlohmann::json to_json(const DegradationRecord& record);
DegradationRecord record_from_json(const nlohmann::json& j);

enum class H264Policy { kSubstitute, kAbort };

std::string_view to_string(H264Policy policy);
H264Policy h264_policy_from_string(std::string_view name);

struct DegradeOptions {
  const ExternalEncoder* h264 = nullptr;
  H264Policy h264_policy = H264Policy::kSubstitute;
};

// 2-D correlation per channel, reflect-101 borders, same output size.
ImageBuffer blur(const ImageBuffer& image, const Kernel2D& kernel);

// Adds N(0, (sigma_8bit/255)^2); `grey` shares one plane across channels.
ImageBuffer add_gaussian_noise(const ImageBuffer& image, double sigma_8bit,
                               bool grey, Rng& rng);

// x + scale * (Poisson(x L)/L - x) with L = 255; `grey` draws one plane from
// BT.601 luminance and adds it to every channel.
ImageBuffer add_poisson_noise(const ImageBuffer& image, double scale, bool grey,
                              Rng& rng);

// Runs blur -> downsample -> noise -> compression exactly as recorded. Noise
// draws come from the "noise" sub-stream of record.seed, so this is also the
// replay path.
ImageBuffer apply_record(const ImageBuffer& hr, const DegradationRecord& record,
                         const DegradeOptions& options = {});

std::pair<ImageBuffer, DegradationRecord> degrade_simple(
    const ImageBuffer& hr, double sigma, std::uint64_t seed);

// Samples sigma ~ U[0.2, 3] from the seed's "params" sub-stream.
std::pair<ImageBuffer, DegradationRecord> degrade_simple_random(
    const ImageBuffer& hr, std::uint64_t seed);

DegradationRecord sample_complex_record(std::uint64_t seed,
                                        const DegradeOptions& options = {});

std::pair<ImageBuffer, DegradationRecord> degrade_complex(
    const ImageBuffer& hr, std::uint64_t seed,
    const DegradeOptions& options = {});

enum class BlurPreset { kNone, kIso, kAniso };

// One concrete member of a fixed test scenario.
struct ScenarioVariant {
  std::string scenario;
  std::string tag;  // file-name friendly, unique within the scenario
  BlurPreset blur = BlurPreset::kNone;
  NoiseKind noise = NoiseKind::kNone;
  bool grey = false;
  CompressionKind compression = CompressionKind::kNone;
};

struct ScenarioPresets {
  static constexpr double kIsoSigma = 2.0;
  static constexpr double kAnisoSigmaX = 2.0;  // horizontal
  static constexpr double kAnisoSigmaY = 1.0;  // vertical
  static constexpr double kGaussianSigma = 20.0;
  static constexpr double kPoissonScale = 2.0;
  static constexpr int kJpegQuality = 60;
  static constexpr int kQpi = 30;
};

const std::vector<std::string>& scenario_names();

// Expands a preset; scenarios with noise yield a colour and a grey variant.
std::vector<ScenarioVariant> scenario_variants(std::string_view name);

DegradationRecord scenario_record(const ScenarioVariant& variant,
                                  std::uint64_t seed,
                                  const DegradeOptions& options = {});

std::pair<ImageBuffer, DegradationRecord> apply_scenario(
    const ImageBuffer& hr, const ScenarioVariant& variant, std::uint64_t seed,
    const DegradeOptions& options = {});

}  // namespace degradekit

#endif  // DEGRADEKIT_DEGRADE_H_
