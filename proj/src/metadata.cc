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

#include "degradekit/metadata.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "degradekit/error.h"

namespace degradekit {
namespace {

double unit(double value, double lo, double hi) {
  return std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
}

int shape_digit(KernelShape shape) {
  for (std::size_t i = 0; i < kAllKernelShapes.size(); ++i) {
    if (kAllKernelShapes[i] == shape) return static_cast<int>(i) + 1;
  }
  return 0;
}

}  // namespace

double normalize_sigma(double sigma) {
  return unit(sigma, KernelRanges::kSigmaMin, KernelRanges::kSigmaMax);
}

SimpleSigmaMeta encode_simple(const DegradationRecord& record) {
  if (!record.kernel || record.kernel->shape != KernelShape::kIsoGaussian) {
    throw DataError("encode_simple: record '" + record.source_id +
                    "' has no isotropic Gaussian kernel");
  }
  return {normalize_sigma(record.kernel->sigma_x)};
}

ComplexMetaVector encode_complex(const DegradationRecord& record) {
  using V = ComplexMetaVector;
  using K = KernelRanges;
  ComplexMetaVector out;
  auto& v = out.values;
  if (record.kernel) {
    const BlurKernelSpec& k = *record.kernel;
    if (k.shape == KernelShape::kSinc) {
      v[V::kSincCutoff] = unit(k.cutoff, K::kCutoffMin, K::kCutoffMax);
      v[V::kIsSinc] = 1.0;
    } else {
      const bool aniso = is_anisotropic(k.shape);
      v[V::kSigmaH] = normalize_sigma(k.sigma_x);
      v[V::kSigmaV] = normalize_sigma(aniso ? k.sigma_y : k.sigma_x);
      if (aniso) {
        v[V::kTheta] = unit(k.theta, -std::numbers::pi, std::numbers::pi);
        v[V::kIsAniso] = 1.0;
      }
      if (is_generalised(k.shape)) {
        v[V::kBetaGeneralised] = unit(k.beta, K::kBetaMin, K::kBetaMax);
        v[V::kIsGeneralised] = 1.0;
      }
      if (is_plateau(k.shape)) {
        v[V::kBetaPlateau] = unit(k.beta, K::kBetaMin, K::kBetaMax);
        v[V::kIsPlateau] = 1.0;
      }
    }
  }
  switch (record.noise.kind) {
    case NoiseKind::kNone:
      break;
    case NoiseKind::kGaussian:
      v[V::kGaussianSigma] = unit(record.noise.magnitude, NoiseRanges::kGaussianMin,
                                  NoiseRanges::kGaussianMax);
      v[V::kIsGrey] = record.noise.grey ? 1.0 : 0.0;
      break;
    case NoiseKind::kPoisson:
      v[V::kPoissonScale] = unit(record.noise.magnitude, NoiseRanges::kPoissonMin,
                                 NoiseRanges::kPoissonMax);
      v[V::kIsGrey] = record.noise.grey ? 1.0 : 0.0;
      break;
  }
  switch (record.compression.kind) {
    case CompressionKind::kNone:
      break;
    case CompressionKind::kJpeg:
      v[V::kJpegQuality] = unit(record.compression.level, CompressionRanges::kJpegMin,
                                CompressionRanges::kJpegMax);
      break;
    case CompressionKind::kH264:
      v[V::kH264Qpi] = unit(record.compression.level, CompressionRanges::kQpiMin,
                            CompressionRanges::kQpiMax);
      break;
  }
  return out;
}

std::string_view to_string(LabelPrecision precision) {
  return precision == LabelPrecision::kDouble ? "double" : "triple";
}

LabelPrecision label_precision_from_string(std::string_view name) {
  if (name == "double") return LabelPrecision::kDouble;
  if (name == "triple") return LabelPrecision::kTriple;
  throw DataError("unknown label precision '" + std::string(name) + "'");
}

int equal_width_bin(double value, double lo, double hi, int bins) {
  const double t = (value - lo) / (hi - lo) * bins;
  return std::clamp(static_cast<int>(std::floor(t)), 0, bins - 1);
}

std::vector<int> label_radices(const SupMoCoLabelConfig& config) {
  const int n = config.bins();
  return {1 + static_cast<int>(kAllKernelShapes.size()), n, n, 3, n, 2, 3, n};
}

std::vector<int> label_digits(const DegradationRecord& record,
                              const SupMoCoLabelConfig& config) {
  using K = KernelRanges;
  const int n = config.bins();
  std::vector<int> d(8, 0);
  if (record.kernel) {
    const BlurKernelSpec& k = *record.kernel;
    d[0] = shape_digit(k.shape);
    if (k.shape == KernelShape::kSinc) {
      d[1] = equal_width_bin(k.cutoff, K::kCutoffMin, K::kCutoffMax, n);
    } else {
      d[1] = equal_width_bin(k.sigma_x, K::kSigmaMin, K::kSigmaMax, n);
      if (is_anisotropic(k.shape)) {
        d[2] = equal_width_bin(k.sigma_y, K::kSigmaMin, K::kSigmaMax, n);
      }
    }
  }
  switch (record.noise.kind) {
    case NoiseKind::kNone:
      break;
    case NoiseKind::kGaussian:
      d[3] = 1;
      d[4] = equal_width_bin(record.noise.magnitude, NoiseRanges::kGaussianMin,
                             NoiseRanges::kGaussianMax, n);
      d[5] = record.noise.grey ? 1 : 0;
      break;
    case NoiseKind::kPoisson:
      d[3] = 2;
      d[4] = equal_width_bin(record.noise.magnitude, NoiseRanges::kPoissonMin,
                             NoiseRanges::kPoissonMax, n);
      d[5] = record.noise.grey ? 1 : 0;
      break;
  }
  switch (record.compression.kind) {
    case CompressionKind::kNone:
      break;
    case CompressionKind::kJpeg:
      d[6] = 1;
      d[7] = equal_width_bin(record.compression.level, CompressionRanges::kJpegMin,
                             CompressionRanges::kJpegMax, n);
      break;
    case CompressionKind::kH264:
      d[6] = 2;
      d[7] = equal_width_bin(record.compression.level, CompressionRanges::kQpiMin,
                             CompressionRanges::kQpiMax, n);
      break;
  }
  return d;
}

std::int64_t label_count(const SupMoCoLabelConfig& config) {
  std::int64_t total = 1;
  for (int r : label_radices(config)) total *= r;
  return total;
}

std::int64_t supmoco_label(const DegradationRecord& record,
                           const SupMoCoLabelConfig& config) {
  const auto radices = label_radices(config);
  const auto digits = label_digits(record, config);
  std::int64_t label = 0;
  for (std::size_t i = 0; i < radices.size(); ++i) {
    label = label * radices[i] + digits[i];
  }
  return label;
}

WeakConDegVector weakcon_vector(const DegradationRecord& record) {
  using V = ComplexMetaVector;
  const ComplexMetaVector full = encode_complex(record);
  return {full[V::kSigmaV],        full[V::kSigmaH], full[V::kGaussianSigma],
          full[V::kPoissonScale],  full[V::kH264Qpi], full[V::kJpegQuality]};
}

double weakcon_weight(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw DataError("weakcon_weight: vector length mismatch");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sq / static_cast<double>(a.size()));
}

double weakcon_weight(const DegradationRecord& query,
                      const DegradationRecord& negative) {
  if (query.pipeline == Pipeline::kSimple &&
      negative.pipeline == Pipeline::kSimple) {
    const double a = encode_simple(query).value;
    const double b = encode_simple(negative).value;
    return std::abs(a - b);
  }
  const auto a = weakcon_vector(query);
  const auto b = weakcon_vector(negative);
  return weakcon_weight(a, b);
}

SimpleSigmaMeta corrupt_sigma(SimpleSigmaMeta meta, Rng& rng, double std) {
  if (std <= 0.0) return meta;
  return {std::clamp(meta.value + normal(rng, 0.0, std), 0.0, 1.0)};
}

PredictionError prediction_error(std::span<const double> predicted,
                                 std::span<const double> truth) {
  if (predicted.size() != truth.size()) {
    throw DataError("prediction_error: length mismatch (" +
                    std::to_string(predicted.size()) + " vs " +
                    std::to_string(truth.size()) + ")");
  }
  auto mean_abs = [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += std::abs(predicted[i] - truth[i]);
    return acc / static_cast<double>(hi - lo);
  };
  PredictionError err;
  if (predicted.size() == static_cast<std::size_t>(ComplexMetaVector::kSize)) {
    err.blur = mean_abs(0, 10);
    err.noise = mean_abs(10, 13);
    err.compression = mean_abs(13, 15);
    err.overall = mean_abs(0, 15);
  } else if (predicted.size() == static_cast<std::size_t>(kPcaComponents)) {
    err.blur = mean_abs(0, predicted.size());
    err.overall = err.blur;
  } else {
    throw DataError("prediction_error: expected 15 or 10 elements, got " +
                    std::to_string(predicted.size()));
  }
  return err;
}

}  // namespace degradekit
