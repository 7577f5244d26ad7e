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

#include <array>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "degradekit/error.h"
#include "degradekit/kernels.h"
#include "degradekit/random.h"
#include "oracles.h"

namespace dk = degradekit;
using dk::BlurKernelSpec;
using dk::KernelShape;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

BlurKernelSpec spec_of(KernelShape shape, double sx, double sy, double theta,
                       double beta = 2.0, double cutoff = 2.0) {
  BlurKernelSpec s;
  s.shape = shape;
  if (shape == KernelShape::kSinc) {
    s.cutoff = cutoff;
    return s;
  }
  s.sigma_x = sx;
  s.sigma_y = dk::is_anisotropic(shape) ? sy : sx;
  if (dk::is_anisotropic(shape)) s.theta = theta;
  if (dk::uses_beta(shape)) s.beta = beta;
  return s;
}

std::vector<dk::Kernel2D> population(int count, std::uint64_t seed,
                                     dk::Pipeline pipeline) {
  dk::Rng rng = dk::make_rng(seed);
  std::vector<dk::Kernel2D> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(dk::synthesize_kernel(dk::sample_kernel_spec(rng, pipeline)));
  }
  return out;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("iso gaussian matches a direct density evaluation") {
  for (double sigma : {0.2, 0.7, 1.6, 3.0}) {
    const dk::Kernel2D k = dk::synthesize_kernel(BlurKernelSpec::iso_gaussian(sigma));
    REQUIRE(k.size == 21);
    std::vector<double> ref(441);
    double total = 0.0;
    for (int i = 0; i < 21; ++i) {
      for (int j = 0; j < 21; ++j) {
        const double r2 = (i - 10) * (i - 10) + (j - 10) * (j - 10);
        ref[i * 21 + j] = std::exp(-r2 / (2 * sigma * sigma));
        total += ref[i * 21 + j];
      }
    }
    for (double& v : ref) v /= total;
    CHECK(max_abs_diff(k.weights, ref) < 1e-15);
  }
  const dk::Kernel2D narrow = dk::synthesize_kernel(BlurKernelSpec::iso_gaussian(0.2));
  CHECK(narrow.at(10, 10) > 0.9999);
  CHECK(std::abs(narrow.sum() - 1.0) < 1e-12);
}

TEST_CASE("anisotropic gaussian matches the rotated covariance form") {
  const double sx = 2.5, sy = 0.8, th = 0.6;
  const dk::Kernel2D k =
      dk::synthesize_kernel(spec_of(KernelShape::kAnisoGaussian, sx, sy, th));
  // Sigma = R diag(sx^2, sy^2) R^T, inverted explicitly.
  const double c = std::cos(th), s = std::sin(th);
  const double s11 = c * c * sx * sx + s * s * sy * sy;
  const double s12 = c * s * (sx * sx - sy * sy);
  const double s22 = s * s * sx * sx + c * c * sy * sy;
  const double det = s11 * s22 - s12 * s12;
  std::vector<double> ref(441);
  double total = 0.0;
  for (int i = 0; i < 21; ++i) {
    for (int j = 0; j < 21; ++j) {
      const double x = j - 10, y = i - 10;
      const double q = (s22 * x * x - 2 * s12 * x * y + s11 * y * y) / det;
      ref[i * 21 + j] = std::exp(-0.5 * q);
      total += ref[i * 21 + j];
    }
  }
  for (double& v : ref) v /= total;
  CHECK(max_abs_diff(k.weights, ref) < 1e-14);
}

TEST_CASE("generalised and plateau shapes follow their profiles") {
  const double sigma = 1.3, beta = 3.0;
  const auto g = dk::synthesize_kernel(spec_of(KernelShape::kIsoGenGaussian, sigma, sigma, 0, beta));
  const auto p = dk::synthesize_kernel(spec_of(KernelShape::kIsoPlateau, sigma, sigma, 0, beta));
  std::vector<double> rg(441), rp(441);
  double tg = 0.0, tp = 0.0;
  for (int i = 0; i < 21; ++i) {
    for (int j = 0; j < 21; ++j) {
      const double half_q = 0.5 * ((i - 10) * (i - 10) + (j - 10) * (j - 10)) / (sigma * sigma);
      rg[i * 21 + j] = std::exp(-std::pow(half_q, beta));
      rp[i * 21 + j] = 1.0 / (1.0 + std::pow(half_q, beta));
      tg += rg[i * 21 + j];
      tp += rp[i * 21 + j];
    }
  }
  for (double& v : rg) v /= tg;
  for (double& v : rp) v /= tp;
  CHECK(max_abs_diff(g.weights, rg) < 1e-14);
  CHECK(max_abs_diff(p.weights, rp) < 1e-14);
}

TEST_CASE("bessel J1 agrees with the integral representation") {
  double worst = 0.0;
  for (double x = -3.0; x <= 45.0; x += 0.173) {
    worst = std::max(worst, std::abs(dk::bessel_j1(x) - oracle::bessel_j1(x)));
  }
  CHECK(worst < 1e-12);
  CHECK(dk::bessel_j1(0.0) == 0.0);
}

TEST_CASE("sinc kernel: clamped Airy pattern with the limit at the centre") {
  const double wc = 1.7;
  const auto k = dk::synthesize_kernel(spec_of(KernelShape::kSinc, 0, 0, 0, 0, wc));
  std::vector<double> ref(441);
  double total = 0.0;
  for (int i = 0; i < 21; ++i) {
    for (int j = 0; j < 21; ++j) {
      const double r = std::hypot(i - 10.0, j - 10.0);
      const double v = r == 0 ? wc * wc / (4 * kPi) : wc * oracle::bessel_j1(wc * r) / (2 * kPi * r);
      ref[i * 21 + j] = std::max(v, 0.0);
      total += ref[i * 21 + j];
    }
  }
  for (double& v : ref) v /= total;
  CHECK(max_abs_diff(k.weights, ref) < 1e-12);
}

TEST_CASE("theta invariance and 180 degree symmetry") {
  for (KernelShape shape : {KernelShape::kIsoGaussian, KernelShape::kIsoGenGaussian,
                            KernelShape::kIsoPlateau}) {
    BlurKernelSpec a = spec_of(shape, 1.6, 1.6, 0.0);
    BlurKernelSpec b = a;
    b.theta = 1.3;
    CHECK(max_abs_diff(dk::synthesize_kernel(a).weights,
                       dk::synthesize_kernel(b).weights) < 1e-12);
  }
  for (KernelShape shape : {KernelShape::kAnisoGaussian, KernelShape::kAnisoGenGaussian,
                            KernelShape::kAnisoPlateau}) {
    const auto a = dk::synthesize_kernel(spec_of(shape, 2.0, 1.0, 0.0));
    const auto b = dk::synthesize_kernel(spec_of(shape, 2.0, 1.0, kPi));
    CHECK(max_abs_diff(a.weights, b.weights) < 1e-12);
  }
}

TEST_CASE("isotropic kernels are invariant under transposition") {
  const auto k = dk::synthesize_kernel(spec_of(KernelShape::kIsoPlateau, 2.2, 2.2, 0, 5.0));
  double d = 0.0;
  for (int i = 0; i < 21; ++i) {
    for (int j = 0; j < 21; ++j) d = std::max(d, std::abs(k.at(i, j) - k.at(j, i)));
  }
  CHECK(d < 1e-15);
}

TEST_CASE("every sampled kernel is a valid point-symmetric stencil") {
  dk::Rng rng = dk::make_rng(11);
  for (int n = 0; n < 300; ++n) {
    const auto spec = dk::sample_kernel_spec(rng, dk::Pipeline::kComplex);
    const auto k = dk::synthesize_kernel(spec);
    CHECK(std::abs(k.sum() - 1.0) <= 1e-6);
    for (double w : k.weights) REQUIRE(w >= 0.0);
    const std::size_t t = k.weights.size();
    for (std::size_t i = 0; i < t; ++i) {
      REQUIRE(std::abs(k.weights[i] - k.weights[t - 1 - i]) <= 1e-10);
    }
  }
}

TEST_CASE("centre weight decreases as sigma grows") {
  double prev = 2.0;
  for (double s : {0.2, 1.6, 3.0}) {
    const double c = dk::synthesize_kernel(BlurKernelSpec::iso_gaussian(s)).at(10, 10);
    CHECK(c < prev);
    prev = c;
  }
}

TEST_CASE("invalid specs name the offending field") {
  BlurKernelSpec s = BlurKernelSpec::iso_gaussian(3.5);
  CHECK_THROWS_WITH_AS(dk::synthesize_kernel(s), doctest::Contains("sigma_x"), dk::DataError);
  s = BlurKernelSpec::iso_gaussian(1.0, 20);
  CHECK_THROWS_WITH_AS(dk::synthesize_kernel(s), doctest::Contains("size"), dk::DataError);
  s = spec_of(KernelShape::kAnisoPlateau, 1.0, 1.0, 0.0, 9.0);
  CHECK_THROWS_WITH_AS(dk::synthesize_kernel(s), doctest::Contains("beta"), dk::DataError);
  s = spec_of(KernelShape::kSinc, 0, 0, 0, 0, 0.1);
  CHECK_THROWS_WITH_AS(dk::synthesize_kernel(s), doctest::Contains("cutoff"), dk::DataError);
  s = spec_of(KernelShape::kAnisoGaussian, 1.0, 0.1, 0.0);
  CHECK_THROWS_WITH_AS(dk::synthesize_kernel(s), doctest::Contains("sigma_y"), dk::DataError);
}

TEST_CASE("sampling: simple ranges, family balance, determinism") {
  dk::Rng rng = dk::make_rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto s = dk::sample_kernel_spec(rng, dk::Pipeline::kSimple);
    REQUIRE(s.shape == KernelShape::kIsoGaussian);
    REQUIRE(s.sigma_x >= 0.2);
    REQUIRE(s.sigma_x <= 3.0);
  }
  std::array<int, 7> counts{};
  dk::Rng rng2 = dk::make_rng(6);
  for (int i = 0; i < 7000; ++i) {
    const auto s = dk::sample_kernel_spec(rng2, dk::Pipeline::kComplex);
    s.validate();
    counts[static_cast<std::size_t>(s.shape)]++;
  }
  const double sd = std::sqrt(7000.0 * (1.0 / 7) * (6.0 / 7));
  for (int c : counts) CHECK(std::abs(c - 1000.0) < 3 * sd);

  dk::Rng a = dk::make_rng(77), b = dk::make_rng(77);
  for (int i = 0; i < 20; ++i) {
    CHECK(dk::sample_kernel_spec(a, dk::Pipeline::kComplex) ==
          dk::sample_kernel_spec(b, dk::Pipeline::kComplex));
  }
}

TEST_CASE("pca components match a Jacobi eigendecomposition") {
  const auto kernels = population(50, 3, dk::Pipeline::kComplex);
  // 7x7 kernels keep the dense oracle cheap.
  std::vector<dk::Kernel2D> small;
  dk::Rng rng = dk::make_rng(4);
  for (int i = 0; i < 50; ++i) {
    auto s = dk::sample_kernel_spec(rng, dk::Pipeline::kComplex);
    s.size = 7;
    small.push_back(dk::synthesize_kernel(s));
  }
  for (const auto* set : std::initializer_list<const std::vector<dk::Kernel2D>*>{&small, &kernels}) {
    const auto basis = dk::fit_pca(*set);
    std::vector<std::vector<double>> rows;
    for (const auto& k : *set) rows.push_back(k.weights);
    std::vector<double> values;
    oracle::Matrix vectors;
    oracle::jacobi_eigen(oracle::covariance(rows), values, vectors);
    REQUIRE(basis.components.size() == 10);
    for (int c = 0; c < 10; ++c) {
      CHECK(std::abs(basis.explained_variance[c] - values[c]) < 1e-12);
      double same = 0.0, flipped = 0.0;
      for (int d = 0; d < basis.dim; ++d) {
        same = std::max(same, std::abs(basis.components[c][d] - vectors[c][d]));
        flipped = std::max(flipped, std::abs(basis.components[c][d] + vectors[c][d]));
      }
      CHECK(std::min(same, flipped) < 1e-8);
    }
  }
}

TEST_CASE("pca basis: orthonormal, ordered, mean-centred") {
  const auto kernels = population(400, 8, dk::Pipeline::kComplex);
  const auto basis = dk::fit_pca(kernels);
  for (int a = 0; a < 10; ++a) {
    for (int b = 0; b < 10; ++b) {
      double dot = 0.0;
      for (int d = 0; d < basis.dim; ++d) dot += basis.components[a][d] * basis.components[b][d];
      CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-8);
    }
    if (a > 0) CHECK(basis.explained_variance[a] <= basis.explained_variance[a - 1]);
  }
  dk::Kernel2D mean{21, basis.mean};
  for (double c : dk::project_kernel(basis, mean)) CHECK(std::abs(c) < 1e-10);

  dk::Kernel2D shifted{21, basis.mean};
  for (int d = 0; d < basis.dim; ++d) shifted.weights[d] += basis.components[0][d];
  const auto code = dk::project_kernel(basis, shifted);
  CHECK(std::abs(code[0] - 1.0) < 1e-10);
  for (int c = 1; c < 10; ++c) CHECK(std::abs(code[c]) < 1e-10);
}

TEST_CASE("projection equals a dense matrix product") {
  const auto kernels = population(200, 9, dk::Pipeline::kComplex);
  const auto basis = dk::fit_pca(kernels);
  for (int n = 0; n < 5; ++n) {
    const auto& k = kernels[n * 17];
    const auto code = dk::project_kernel(basis, k);
    for (int c = 0; c < 10; ++c) {
      long double acc = 0.0L;
      for (int d = 0; d < basis.dim; ++d) {
        acc += static_cast<long double>(basis.components[c][d]) * (k.weights[d] - basis.mean[d]);
      }
      CHECK(std::abs(code[c] - static_cast<double>(acc)) < 1e-12);
    }
  }
}

TEST_CASE("reconstruction: mean, residual bound, idempotence") {
  const auto kernels = population(300, 10, dk::Pipeline::kSimple);
  const auto basis = dk::fit_pca(kernels);
  const auto zero = dk::reconstruct_kernel(basis, std::vector<double>(10, 0.0));
  double mean_sum = 0.0;
  for (double v : basis.mean) mean_sum += v;
  for (int d = 0; d < basis.dim; ++d) {
    CHECK(std::abs(zero.weights[d] - std::max(basis.mean[d], 0.0) / mean_sum) < 1e-12);
  }

  // Linear reconstruction: the average squared residual over the fit set is
  // the discarded variance times (N-1)/N. reconstruct_kernel then clamps and
  // renormalizes that linear estimate.
  std::vector<std::vector<double>> rows;
  for (const auto& k : kernels) rows.push_back(k.weights);
  std::vector<double> values;
  oracle::Matrix vectors;
  oracle::jacobi_eigen(oracle::covariance(rows), values, vectors);
  double tail = 0.0;
  for (std::size_t i = 10; i < values.size(); ++i) tail += std::max(values[i], 0.0);
  const double n = static_cast<double>(kernels.size());
  double residual = 0.0;
  for (const auto& k : kernels) {
    const auto code = dk::project_kernel(basis, k);
    std::vector<double> linear = basis.mean;
    for (int c = 0; c < 10; ++c)
      for (int d = 0; d < basis.dim; ++d) linear[d] += code[c] * basis.components[c][d];
    for (int d = 0; d < basis.dim; ++d) residual += (linear[d] - k.weights[d]) * (linear[d] - k.weights[d]);

    double total = 0.0;
    for (double& v : linear) total += (v = std::max(v, 0.0));
    const auto r = dk::reconstruct_kernel(basis, code);
    for (int d = 0; d < basis.dim; ++d) REQUIRE(std::abs(r.weights[d] - linear[d] / total) < 1e-15);
  }
  residual /= n;
  CHECK(residual <= tail * (n - 1) / n * (1 + 1e-6) + 1e-18);
  CHECK(residual >= tail * (n - 1) / n * (1 - 1e-6) - 1e-18);

  const auto once = dk::reconstruct_kernel(basis, dk::project_kernel(basis, kernels[3]));
  const auto twice = dk::reconstruct_kernel(basis, dk::project_kernel(basis, once));
  const auto thrice = dk::reconstruct_kernel(basis, dk::project_kernel(basis, twice));
  CHECK(max_abs_diff(twice.weights, thrice.weights) < 1e-8);
}

TEST_CASE("pca input validation") {
  auto few = population(5, 1, dk::Pipeline::kComplex);
  CHECK_THROWS_AS(dk::fit_pca(few), dk::DataError);
  auto mixed = population(20, 1, dk::Pipeline::kComplex);
  auto s = BlurKernelSpec::iso_gaussian(1.0, 7);
  mixed.push_back(dk::synthesize_kernel(s));
  CHECK_THROWS_AS(dk::fit_pca(mixed), dk::DataError);
  const auto basis = dk::fit_pca(population(20, 1, dk::Pipeline::kComplex));
  CHECK_THROWS_AS(dk::project_kernel(basis, dk::synthesize_kernel(s)), dk::DataError);
}

TEST_CASE("json round trips") {
  dk::Rng rng = dk::make_rng(2);
  for (int i = 0; i < 20; ++i) {
    const auto s = dk::sample_kernel_spec(rng, dk::Pipeline::kComplex);
    CHECK(dk::kernel_spec_from_json(nlohmann::json::parse(dk::to_json(s).dump())) == s);
  }
  const auto k = dk::synthesize_kernel(BlurKernelSpec::iso_gaussian(1.2));
  const auto k2 = dk::kernel_from_json(nlohmann::json::parse(dk::to_json(k).dump()));
  CHECK(k2.weights == k.weights);
  const auto basis = dk::fit_pca(population(30, 1, dk::Pipeline::kComplex));
  const auto b2 = dk::pca_basis_from_json(nlohmann::json::parse(dk::to_json(basis).dump()));
  CHECK(b2.components == basis.components);
  CHECK(b2.mean == basis.mean);
}

}  // TEST_SUITE
