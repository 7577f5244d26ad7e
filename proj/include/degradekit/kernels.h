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

#ifndef DEGRADEKIT_KERNELS_H_
#define DEGRADEKIT_KERNELS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "degradekit/random.h"

namespace degradekit {

enum class KernelShape {
  kIsoGaussian,
  kAnisoGaussian,
  kIsoGenGaussian,
  kAnisoGenGaussian,
  kIsoPlateau,
  kAnisoPlateau,
  kSinc,
};

inline constexpr std::array<KernelShape, 7> kAllKernelShapes = {
    KernelShape::kIsoGaussian,    KernelShape::kAnisoGaussian,
    KernelShape::kIsoGenGaussian, KernelShape::kAnisoGenGaussian,
    KernelShape::kIsoPlateau,     KernelShape::kAnisoPlateau,
    KernelShape::kSinc,
};

std::string_view to_string(KernelShape shape);
KernelShape kernel_shape_from_string(std::string_view name);

bool is_anisotropic(KernelShape shape);
bool is_generalised(KernelShape shape);
bool is_plateau(KernelShape shape);
bool uses_beta(KernelShape shape);

enum class Pipeline { kSimple, kComplex };

std::string_view to_string(Pipeline pipeline);
Pipeline pipeline_from_string(std::string_view name);

// Parameter ranges shared by both pipelines.
struct KernelRanges {
  static constexpr double kSigmaMin = 0.2;
  static constexpr double kSigmaMax = 3.0;
  static constexpr double kBetaMin = 0.5;
  static constexpr double kBetaMax = 8.0;
  static constexpr double kCutoffMin = 3.14159265358979323846 / 5.0;
  static constexpr double kCutoffMax = 3.14159265358979323846;
  static constexpr int kDefaultSize = 21;
};

// Parameters of one blur kernel. Fields that are inert for the shape are
// held at 0: theta for isotropic shapes and sinc, beta outside the
// generalised/plateau families, cutoff outside sinc, and both sigmas for
// sinc. Iso shapes keep sigma_y == sigma_x.
struct BlurKernelSpec {
  KernelShape shape = KernelShape::kIsoGaussian;
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double theta = 0.0;
  double beta = 0.0;
  double cutoff = 0.0;
  int size = KernelRanges::kDefaultSize;

  static BlurKernelSpec iso_gaussian(double sigma,
                                     int size = KernelRanges::kDefaultSize);

  // Throws DataError naming the first offending field.
  void validate() const;

  friend bool operator==(const BlurKernelSpec&, const BlurKernelSpec&) = default;
};

// Square, odd-sized, non-negative, sum-normalized stencil.
struct Kernel2D {
  int size = 0;
  std::vector<double> weights;  // row-major, size * size

  double at(int row, int col) const {
    return weights[static_cast<std::size_t>(row) * size + col];
  }
  double sum() const;
};

Kernel2D synthesize_kernel(const BlurKernelSpec& spec);

BlurKernelSpec sample_kernel_spec(Rng& rng, Pipeline pipeline);

// Order-1 Bessel function of the first kind.
double bessel_j1(double x);

struct PcaBasis {
  int dim = 0;
  std::vector<double> mean;
  std::vector<std::vector<double>> components;  // descending variance
  std::vector<double> explained_variance;
  std::uint64_t fit_seed = 0;
  std::int64_t fit_count = 0;
};

inline constexpr int kPcaComponents = 10;

// Mean-centred PCA over flattened kernels. Each component's largest-magnitude
// entry is made positive so bases are reproducible.
PcaBasis fit_pca(const std::vector<Kernel2D>& kernels, int k = kPcaComponents);

// Fits the basis on `count` kernels drawn from `pipeline` with `seed`.
PcaBasis fit_pca_population(Pipeline pipeline, int count = 10000,
                            std::uint64_t seed = 0, int k = kPcaComponents);

std::vector<double> project_kernel(const PcaBasis& basis, const Kernel2D& kernel);

// mean + sum(coeffs * components), negatives clamped and re-normalized.
Kernel2D reconstruct_kernel(const PcaBasis& basis,
                            const std::vector<double>& coeffs);

nlohmann::json to_json(const BlurKernelSpec& spec);
BlurKernelSpec kernel_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Kernel2D& kernel);
Kernel2D kernel_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PcaBasis& basis);
PcaBasis pca_basis_from_json(const nlohmann::json& j);

}  // namespace degradekit

#endif  // DEGRADEKIT_KERNELS_H_
