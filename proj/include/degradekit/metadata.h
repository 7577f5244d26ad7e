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

#ifndef DEGRADEKIT_METADATA_H_
#define DEGRADEKIT_METADATA_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "degradekit/degrade.h"
#include "degradekit/random.h"

namespace degradekit {

// Normalized blur width of the simple pipeline, (sigma - 0.2) / 2.8.
struct SimpleSigmaMeta {
  double value = 0.0;
};

// Fixed-order 15-element degradation vector. Every continuous entry is
// normalized to [0,1] by its sampling range; entries that do not apply to the
// record are exactly 0.
struct ComplexMetaVector {
  enum Index : int {
    kSigmaV = 0,
    kSigmaH,
    kTheta,
    kBetaGeneralised,
    kBetaPlateau,
    kSincCutoff,
    kIsAniso,
    kIsGeneralised,
    kIsPlateau,
    kIsSinc,
    kGaussianSigma,
    kPoissonScale,
    kIsGrey,
    kH264Qpi,
    kJpegQuality,
  };
  static constexpr int kSize = 15;

  std::array<double, kSize> values{};

  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
  std::vector<double> to_vector() const { return {values.begin(), values.end()}; }
};

double normalize_sigma(double sigma);

SimpleSigmaMeta encode_simple(const DegradationRecord& record);
ComplexMetaVector encode_complex(const DegradationRecord& record);

enum class LabelPrecision { kDouble = 2, kTriple = 3 };

std::string_view to_string(LabelPrecision precision);
LabelPrecision label_precision_from_string(std::string_view name);

struct SupMoCoLabelConfig {
  LabelPrecision precision = LabelPrecision::kTriple;
  int bins() const { return static_cast<int>(precision); }
};

// Equal-width bin of `value` over [lo, hi]; the upper edge falls in the last bin.
int equal_width_bin(double value, double lo, double hi, int bins);

// Mixed-radix digits of a label, most significant first:
//   kernel family (0 = none, 1..7), size bin A, size bin B, noise kind,
//   noise magnitude bin, grey flag, compression kind, compression bin.
// Size bin A is sigma_x (or the sinc cutoff), size bin B is sigma_y for
// anisotropic shapes. Inapplicable digits are 0.
std::vector<int> label_radices(const SupMoCoLabelConfig& config);
std::vector<int> label_digits(const DegradationRecord& record,
                              const SupMoCoLabelConfig& config);
std::int64_t label_count(const SupMoCoLabelConfig& config);

std::int64_t supmoco_label(const DegradationRecord& record,
                           const SupMoCoLabelConfig& config);

// [sigma_v, sigma_h, gaussian sigma, poisson scale, qpi, jpeg quality].
using WeakConDegVector = std::array<double, 6>;

WeakConDegVector weakcon_vector(const DegradationRecord& record);

// ||a - b|| / sqrt(len), in [0,1] for inputs in [0,1].
double weakcon_weight(std::span<const double> a, std::span<const double> b);

// Two simple-pipeline records use |delta normalized sigma|; anything else
// goes through the six-element vector.
double weakcon_weight(const DegradationRecord& query,
                      const DegradationRecord& negative);

inline constexpr double kMetaNoiseStd = 0.1;

// value + N(0, std^2), clamped to [0,1].
SimpleSigmaMeta corrupt_sigma(SimpleSigmaMeta meta, Rng& rng,
                              double std = kMetaNoiseStd);

struct PredictionError {
  double blur = 0.0;
  std::optional<double> noise;        // 15-element vectors only
  std::optional<double> compression;  // 15-element vectors only
  double overall = 0.0;
};

// Mean L1 error per parameter group. Accepts 15-element degradation vectors
// (blur 0..9, noise 10..12, compression 13..14) or 10-element PCA codes.
PredictionError prediction_error(std::span<const double> predicted,
                                 std::span<const double> truth);

}  // namespace degradekit

#endif  // DEGRADEKIT_METADATA_H_
