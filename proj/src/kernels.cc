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

#include "degradekit/kernels.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "degradekit/error.h"

namespace degradekit {
namespace {

constexpr double kPi = std::numbers::pi;

void require_range(double value, double lo, double hi, const char* field) {
  if (!(value >= lo && value <= hi)) {
    throw DataError(std::string("kernel spec field '") + field + "' = " +
                    std::to_string(value) + " outside [" + std::to_string(lo) +
                    ", " + std::to_string(hi) + "]");
  }
}

void normalize_in_place(std::vector<double>& w) {
  double total = 0.0;
  for (double& v : w) {
    v = std::max(v, 0.0);
    total += v;
  }
  if (!(total > 0.0)) throw DataError("kernel has no positive mass");
  for (double& v : w) v /= total;
}

}  // namespace

std::string_view to_string(KernelShape shape) {
  switch (shape) {
    case KernelShape::kIsoGaussian: return "iso_gaussian";
    case KernelShape::kAnisoGaussian: return "aniso_gaussian";
    case KernelShape::kIsoGenGaussian: return "iso_generalised_gaussian";
    case KernelShape::kAnisoGenGaussian: return "aniso_generalised_gaussian";
    case KernelShape::kIsoPlateau: return "iso_plateau";
    case KernelShape::kAnisoPlateau: return "aniso_plateau";
    case KernelShape::kSinc: return "sinc";
  }
  return "unknown";
}

KernelShape kernel_shape_from_string(std::string_view name) {
  for (KernelShape s : kAllKernelShapes) {
    if (to_string(s) == name) return s;
  }
  throw DataError("unknown kernel shape '" + std::string(name) + "'");
}

bool is_anisotropic(KernelShape shape) {
  return shape == KernelShape::kAnisoGaussian ||
         shape == KernelShape::kAnisoGenGaussian ||
         shape == KernelShape::kAnisoPlateau;
}

bool is_generalised(KernelShape shape) {
  return shape == KernelShape::kIsoGenGaussian ||
         shape == KernelShape::kAnisoGenGaussian;
}

bool is_plateau(KernelShape shape) {
  return shape == KernelShape::kIsoPlateau ||
         shape == KernelShape::kAnisoPlateau;
}

bool uses_beta(KernelShape shape) {
  return is_generalised(shape) || is_plateau(shape);
}

std::string_view to_string(Pipeline pipeline) {
  return pipeline == Pipeline::kSimple ? "simple" : "complex";
}

Pipeline pipeline_from_string(std::string_view name) {
  if (name == "simple") return Pipeline::kSimple;
  if (name == "complex") return Pipeline::kComplex;
  throw DataError("unknown pipeline '" + std::string(name) + "'");
}

BlurKernelSpec BlurKernelSpec::iso_gaussian(double sigma, int size) {
  BlurKernelSpec spec;
  spec.shape = KernelShape::kIsoGaussian;
  spec.sigma_x = sigma;
  spec.sigma_y = sigma;
  spec.size = size;
  return spec;
}

void BlurKernelSpec::validate() const {
  if (size < 3 || size % 2 == 0) {
    throw DataError("kernel spec field 'size' = " + std::to_string(size) +
                    " must be odd and >= 3");
  }
  if (shape == KernelShape::kSinc) {
    require_range(cutoff, KernelRanges::kCutoffMin, KernelRanges::kCutoffMax,
                  "cutoff");
    return;
  }
  require_range(sigma_x, KernelRanges::kSigmaMin, KernelRanges::kSigmaMax,
                "sigma_x");
  if (is_anisotropic(shape)) {
    require_range(sigma_y, KernelRanges::kSigmaMin, KernelRanges::kSigmaMax,
                  "sigma_y");
    require_range(theta, -kPi, kPi, "theta");
  }
  if (uses_beta(shape)) {
    require_range(beta, KernelRanges::kBetaMin, KernelRanges::kBetaMax, "beta");
  }
}

double Kernel2D::sum() const {
  double total = 0.0;
  for (double w : weights) total += w;
  return total;
}

double bessel_j1(double x) {
  if (x < 0.0) return -std::cyl_bessel_j(1.0, -x);
  return std::cyl_bessel_j(1.0, x);
}

Kernel2D synthesize_kernel(const BlurKernelSpec& spec) {
  spec.validate();
  const int n = spec.size;
  const int half = n / 2;
  Kernel2D kernel;
  kernel.size = n;
  kernel.weights.resize(static_cast<std::size_t>(n) * n);

  if (spec.shape == KernelShape::kSinc) {
    const double wc = spec.cutoff;
    for (int row = 0; row < n; ++row) {
      for (int col = 0; col < n; ++col) {
        const double dx = col - half;
        const double dy = row - half;
        const double r = std::sqrt(dx * dx + dy * dy);
        kernel.weights[static_cast<std::size_t>(row) * n + col] =
            r == 0.0 ? wc * wc / (4.0 * kPi)
                     : wc / (2.0 * kPi * r) * bessel_j1(wc * r);
      }
    }
    normalize_in_place(kernel.weights);
    return kernel;
  }

  // Inverse covariance of R diag(sx^2, sy^2) R^T.
  double a, b, c;  // [[a, b], [b, c]]
  if (is_anisotropic(spec.shape)) {
    const double cs = std::cos(spec.theta);
    const double sn = std::sin(spec.theta);
    const double ix = 1.0 / (spec.sigma_x * spec.sigma_x);
    const double iy = 1.0 / (spec.sigma_y * spec.sigma_y);
    a = cs * cs * ix + sn * sn * iy;
    b = cs * sn * (ix - iy);
    c = sn * sn * ix + cs * cs * iy;
  } else {
    a = c = 1.0 / (spec.sigma_x * spec.sigma_x);
    b = 0.0;
  }

  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      const double dx = col - half;
      const double dy = row - half;
      const double half_q = 0.5 * (a * dx * dx + 2.0 * b * dx * dy + c * dy * dy);
      double w;
      if (is_generalised(spec.shape)) {
        w = std::exp(-std::pow(half_q, spec.beta));
      } else if (is_plateau(spec.shape)) {
        w = 1.0 / (1.0 + std::pow(half_q, spec.beta));
      } else {
        w = std::exp(-half_q);
      }
      kernel.weights[static_cast<std::size_t>(row) * n + col] = w;
    }
  }
  normalize_in_place(kernel.weights);
  return kernel;
}

BlurKernelSpec sample_kernel_spec(Rng& rng, Pipeline pipeline) {
  using R = KernelRanges;
  if (pipeline == Pipeline::kSimple) {
    return BlurKernelSpec::iso_gaussian(uniform(rng, R::kSigmaMin, R::kSigmaMax));
  }
  BlurKernelSpec spec;
  spec.shape = kAllKernelShapes[uniform_int(rng, 0, 6)];
  // Fixed draw count regardless of shape keeps downstream draws aligned.
  const double sx = uniform(rng, R::kSigmaMin, R::kSigmaMax);
  const double sy = uniform(rng, R::kSigmaMin, R::kSigmaMax);
  const double theta = uniform(rng, -kPi, kPi);
  const double beta = uniform(rng, R::kBetaMin, R::kBetaMax);
  const double cutoff = uniform(rng, R::kCutoffMin, R::kCutoffMax);

  if (spec.shape == KernelShape::kSinc) {
    spec.cutoff = cutoff;
    return spec;
  }
  spec.sigma_x = sx;
  spec.sigma_y = is_anisotropic(spec.shape) ? sy : sx;
  if (is_anisotropic(spec.shape)) spec.theta = theta;
  if (uses_beta(spec.shape)) spec.beta = beta;
  return spec;
}

PcaBasis fit_pca(const std::vector<Kernel2D>& kernels, int k) {
  if (kernels.empty()) throw DataError("fit_pca: no kernels");
  const int size = kernels.front().size;
  const int dim = size * size;
  if (k < 1 || k > dim) {
    throw DataError("fit_pca: component count " + std::to_string(k) +
                    " invalid for dimension " + std::to_string(dim));
  }
  if (static_cast<int>(kernels.size()) < k + 1) {
    throw DataError("fit_pca: need at least " + std::to_string(k + 1) +
                    " kernels, got " + std::to_string(kernels.size()));
  }
  const Eigen::Index count = static_cast<Eigen::Index>(kernels.size());
  Eigen::MatrixXd samples(count, dim);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Kernel2D& kern = kernels[static_cast<std::size_t>(i)];
    if (kern.size != size) throw DataError("fit_pca: mixed kernel sizes");
    for (int d = 0; d < dim; ++d) samples(i, d) = kern.weights[d];
  }
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  samples.rowwise() -= mean;
  const Eigen::MatrixXd cov =
      (samples.transpose() * samples) / static_cast<double>(count - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw DataError("fit_pca: eigendecomposition failed");
  }

  PcaBasis basis;
  basis.dim = dim;
  basis.fit_count = count;
  basis.mean.assign(mean.data(), mean.data() + dim);
  for (int c = 0; c < k; ++c) {
    const Eigen::Index col = dim - 1 - c;  // eigenvalues ascend
    Eigen::VectorXd v = solver.eigenvectors().col(col);
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    basis.components.emplace_back(v.data(), v.data() + dim);
    basis.explained_variance.push_back(std::max(solver.eigenvalues()(col), 0.0));
  }
  return basis;
}

PcaBasis fit_pca_population(Pipeline pipeline, int count, std::uint64_t seed,
                            int k) {
  Rng rng = make_rng(seed);
  std::vector<Kernel2D> kernels;
  kernels.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    kernels.push_back(synthesize_kernel(sample_kernel_spec(rng, pipeline)));
  }
  PcaBasis basis = fit_pca(kernels, k);
  basis.fit_seed = seed;
  return basis;
}

std::vector<double> project_kernel(const PcaBasis& basis, const Kernel2D& kernel) {
  if (static_cast<int>(kernel.weights.size()) != basis.dim) {
    throw DataError("project_kernel: kernel has " +
                    std::to_string(kernel.weights.size()) +
                    " weights, basis dimension is " + std::to_string(basis.dim));
  }
  std::vector<double> coeffs;
  coeffs.reserve(basis.components.size());
  for (const auto& comp : basis.components) {
    double acc = 0.0;
    for (int d = 0; d < basis.dim; ++d) {
      acc += (kernel.weights[d] - basis.mean[d]) * comp[d];
    }
    coeffs.push_back(acc);
  }
  return coeffs;
}

Kernel2D reconstruct_kernel(const PcaBasis& basis,
                            const std::vector<double>& coeffs) {
  if (coeffs.size() != basis.components.size()) {
    throw DataError("reconstruct_kernel: expected " +
                    std::to_string(basis.components.size()) +
                    " coefficients, got " + std::to_string(coeffs.size()));
  }
  Kernel2D kernel;
  kernel.size = static_cast<int>(std::lround(std::sqrt(basis.dim)));
  kernel.weights = basis.mean;
  for (std::size_t c = 0; c < coeffs.size(); ++c) {
    for (int d = 0; d < basis.dim; ++d) {
      kernel.weights[d] += coeffs[c] * basis.components[c][d];
    }
  }
  normalize_in_place(kernel.weights);
  return kernel;
}

nlohmann::json to_json(const BlurKernelSpec& spec) {
  return {{"shape", std::string(to_string(spec.shape))},
          {"sigma_x", spec.sigma_x},
          {"sigma_y", spec.sigma_y},
          {"theta", spec.theta},
          {"beta", spec.beta},
          {"cutoff", spec.cutoff},
          {"size", spec.size}};
}

BlurKernelSpec kernel_spec_from_json(const nlohmann::json& j) {
  try {
    BlurKernelSpec spec;
    spec.shape = kernel_shape_from_string(j.at("shape").get<std::string>());
    spec.sigma_x = j.value("sigma_x", 0.0);
    spec.sigma_y = j.value("sigma_y", spec.sigma_x);
    spec.theta = j.value("theta", 0.0);
    spec.beta = j.value("beta", 0.0);
    spec.cutoff = j.value("cutoff", 0.0);
    spec.size = j.value("size", KernelRanges::kDefaultSize);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed kernel spec: ") + e.what());
  }
}

nlohmann::json to_json(const Kernel2D& kernel) {
  return {{"size", kernel.size}, {"weights", kernel.weights}};
}

Kernel2D kernel_from_json(const nlohmann::json& j) {
  try {
    Kernel2D kernel;
    kernel.size = j.at("size").get<int>();
    kernel.weights = j.at("weights").get<std::vector<double>>();
    if (kernel.weights.size() !=
        static_cast<std::size_t>(kernel.size) * kernel.size) {
      throw DataError("kernel weight count does not match size");
    }
    return kernel;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed kernel: ") + e.what());
  }
}

nlohmann::json to_json(const PcaBasis& basis) {
  return {{"dim", basis.dim},
          {"mean", basis.mean},
          {"components", basis.components},
          {"explained_variance", basis.explained_variance},
          {"fit_seed", basis.fit_seed},
          {"fit_count", basis.fit_count}};
}

PcaBasis pca_basis_from_json(const nlohmann::json& j) {
  try {
    PcaBasis basis;
    basis.dim = j.at("dim").get<int>();
    basis.mean = j.at("mean").get<std::vector<double>>();
    basis.components = j.at("components").get<std::vector<std::vector<double>>>();
    basis.explained_variance =
        j.value("explained_variance", std::vector<double>{});
    basis.fit_seed = j.value("fit_seed", std::uint64_t{0});
    basis.fit_count = j.value("fit_count", std::int64_t{0});
    if (static_cast<int>(basis.mean.size()) != basis.dim) {
      throw DataError("PCA basis mean length does not match dim");
    }
    for (const auto& c : basis.components) {
      if (static_cast<int>(c.size()) != basis.dim) {
        throw DataError("PCA basis component length does not match dim");
      }
    }
    return basis;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed PCA basis: ") + e.what());
  }
}

}  // namespace degradekit
