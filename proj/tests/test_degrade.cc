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

#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <set>

#include "doctest.h"
#include "degradekit/codec.h"
#include "degradekit/degrade.h"
#include "degradekit/error.h"
#include "degradekit/metrics.h"
#include "degradekit/random.h"
#include "degradekit/resample.h"
#include "oracles.h"

namespace dk = degradekit;

namespace {

double max_abs_diff(const dk::ImageBuffer& a, const dk::ImageBuffer& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
  return d;
}

bool in_unit_range(const dk::ImageBuffer& img) {
  for (double v : img.data()) {
    if (v < 0.0 || v > 1.0) return false;
  }
  return true;
}

dk::BlurKernelSpec aniso(double sx, double sy, double theta) {
  dk::BlurKernelSpec s;
  s.shape = dk::KernelShape::kAnisoGaussian;
  s.sigma_x = sx;
  s.sigma_y = sy;
  s.theta = theta;
  return s;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments moments_of_difference(const dk::ImageBuffer& out, const dk::ImageBuffer& in) {
  double s = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double d = out.data()[i] - in.data()[i];
    s += d;
    sq += d * d;
  }
  const double n = static_cast<double>(in.size());
  return {s / n, sq / n - (s / n) * (s / n)};
}

}  // namespace

TEST_SUITE("degrade") {

TEST_CASE("blur matches a direct correlation oracle") {
  const auto img = oracle::test_image(32, 27, 4);
  for (const auto& spec : {dk::BlurKernelSpec::iso_gaussian(0.2),
                           dk::BlurKernelSpec::iso_gaussian(2.4), aniso(2.7, 0.5, 0.8)}) {
    const auto k = dk::synthesize_kernel(spec);
    auto want = oracle::correlate(img, k.weights, k.size);
    dk::clamp01(want);
    CHECK(max_abs_diff(dk::blur(img, k), want) < 1e-12);
  }
  const auto near_delta = dk::synthesize_kernel(dk::BlurKernelSpec::iso_gaussian(0.2));
  CHECK(max_abs_diff(dk::blur(img, near_delta), img) < 1e-3);
}

TEST_CASE("blur: constants and deltas") {
  const dk::ImageBuffer flat(20, 20, 0.42);
  const auto k = dk::synthesize_kernel(aniso(3.0, 1.0, 0.3));
  CHECK(max_abs_diff(dk::blur(flat, k), flat) < 1e-12);

  dk::ImageBuffer delta(32, 32, 0.0);
  for (int c = 0; c < 3; ++c) delta.at(16, 16, c) = 1.0;
  const auto out = dk::blur(delta, k);
  double d = 0.0;
  for (int i = 0; i < 21; ++i) {
    for (int j = 0; j < 21; ++j) d = std::max(d, std::abs(out.at(6 + i, 6 + j, 1) - k.at(i, j)));
  }
  CHECK(d < 1e-10);
}

TEST_CASE("gaussian noise statistics, grey sharing, determinism") {
  const dk::ImageBuffer grey_img(512, 512, 0.5);
  dk::Rng rng = dk::make_rng(1);
  const auto noisy = dk::add_gaussian_noise(grey_img, 20.0, false, rng);
  const Moments m = moments_of_difference(noisy, grey_img);
  CHECK(std::abs(std::sqrt(m.var) * 255.0 / 20.0 - 1.0) < 0.02);

  dk::Rng r1 = dk::make_rng(9), r2 = dk::make_rng(9);
  const auto img = oracle::test_image(40, 40, 2);
  CHECK(dk::add_gaussian_noise(img, 7.0, false, r1) == dk::add_gaussian_noise(img, 7.0, false, r2));

  dk::Rng r3 = dk::make_rng(3);
  const auto g = dk::add_gaussian_noise(dk::ImageBuffer(64, 64, 0.5), 10.0, true, r3);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      REQUIRE(g.at(y, x, 0) == g.at(y, x, 1));
      REQUIRE(g.at(y, x, 0) == g.at(y, x, 2));
    }
  }
}

TEST_CASE("poisson noise: variance, fixed point, vanishing scale") {
  const dk::ImageBuffer grey_img(512, 512, 0.5);
  dk::Rng rng = dk::make_rng(2);
  const auto noisy = dk::add_poisson_noise(grey_img, 2.0, false, rng);
  const Moments m = moments_of_difference(noisy, grey_img);
  const double analytic = 4.0 * 0.5 / 255.0;
  CHECK(std::abs(m.var / analytic - 1.0) < 0.05);

  const dk::ImageBuffer black(64, 64, 0.0);
  CHECK(dk::add_poisson_noise(black, 3.0, false, rng) == black);
  CHECK(dk::add_poisson_noise(black, 3.0, true, rng) == black);

  const auto img = oracle::test_image(32, 32, 6);
  CHECK(max_abs_diff(dk::add_poisson_noise(img, 1e-9, false, rng), img) < 1e-6);

  dk::ImageBuffer colour(16, 16);
  for (double& v : colour.data()) v = dk::uniform(rng, 0.3, 0.7);
  const auto gp = dk::add_poisson_noise(colour, 1.0, true, rng);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      const double d0 = gp.at(y, x, 0) - colour.at(y, x, 0);
      REQUIRE(gp.at(y, x, 1) - colour.at(y, x, 1) == doctest::Approx(d0).epsilon(1e-12));
      REQUIRE(gp.at(y, x, 2) - colour.at(y, x, 2) == doctest::Approx(d0).epsilon(1e-12));
    }
  }
}

TEST_CASE("jpeg: monotone fidelity, shape, constant blocks") {
  const auto img = oracle::test_image(64, 48, 8);
  const auto q95 = dk::compress_jpeg(img, 95);
  const auto q30 = dk::compress_jpeg(img, 30);
  CHECK(q95.height() == 64);
  CHECK(q95.width() == 48);
  CHECK(dk::psnr_y(img, q95) > dk::psnr_y(img, q30));

  for (int q = dk::CompressionRanges::kJpegMin; q <= dk::CompressionRanges::kJpegMax; ++q) {
    for (double level : {0.0, 0.13, 0.5, 0.87, 1.0}) {
      const dk::ImageBuffer flat(24, 40, std::round(level * 255.0) / 255.0);
      REQUIRE(max_abs_diff(dk::compress_jpeg(flat, q), flat) < 2.0 / 255.0);
    }
  }
  CHECK_THROWS_AS(dk::compress_jpeg(img, 0), dk::DataError);
  CHECK_THROWS_AS(dk::compress_jpeg(img, 101), dk::DataError);
}

TEST_CASE("yuv420 round trip and odd-size padding") {
  const auto img = oracle::test_image(15, 21, 5);
  const auto frame = dk::rgb_to_yuv420(img);
  CHECK(frame.width == 22);
  CHECK(frame.height == 16);
  CHECK(frame.bytes.size() == 22u * 16u * 3u / 2u);
  const auto back = dk::yuv420_to_rgb(frame, 15, 21);
  CHECK(back.height() == 15);
  CHECK(back.width() == 21);
  // Chroma subsampling of a smooth image only loses a little.
  CHECK(dk::psnr_y(img, back) > 35.0);

  const dk::ImageBuffer flat(8, 8, 0.5);
  CHECK(max_abs_diff(dk::yuv420_to_rgb(dk::rgb_to_yuv420(flat), 8, 8), flat) < 2.0 / 255.0);
}

TEST_CASE("h264 backend contract") {
  const auto img = oracle::test_image(17, 23, 6);
  CHECK_THROWS_AS(dk::compress_h264(img, 30, nullptr), dk::BackendUnavailable);

  const dk::ExternalEncoder copy{"cp {input} {output}"};
  const auto out = dk::compress_h264(img, 30, &copy);
  CHECK(out == dk::yuv420_to_rgb(dk::rgb_to_yuv420(img), 17, 23));

  const dk::ExternalEncoder fails{"echo broken encoder >&2; exit 4"};
  CHECK_THROWS_WITH_AS(dk::compress_h264(img, 30, &fails), doctest::Contains("broken encoder"),
                       dk::BackendError);
  const dk::ExternalEncoder silent{"true"};
  CHECK_THROWS_AS(dk::compress_h264(img, 30, &silent), dk::BackendError);
  const dk::ExternalEncoder truncated{"head -c 10 {input} > {output}"};
  CHECK_THROWS_AS(dk::compress_h264(img, 30, &truncated), dk::BackendError);
  CHECK_THROWS_AS(dk::compress_h264(img, 19, &copy), dk::DataError);
  CHECK_THROWS_AS(dk::compress_h264(img, 41, &copy), dk::DataError);

  const dk::ExternalEncoder checks_args{
      "test {qpi} = 27 && test {width} = 24 && test {height} = 18 && cp {input} {output}"};
  CHECK_NOTHROW(dk::compress_h264(img, 27, &checks_args));
}

TEST_CASE("simple pipeline: shape, oracle composition, replay") {
  dk::ImageBuffer hr(84, 84, 0.0);
  for (int c = 0; c < 3; ++c) hr.at(42, 42, c) = 1.0;
  const auto [lr, record] = dk::degrade_simple(hr, 0.2, 17);
  CHECK(lr.height() == 21);
  CHECK(lr.width() == 21);
  CHECK(record.noise.kind == dk::NoiseKind::kNone);
  CHECK(record.compression.kind == dk::CompressionKind::kNone);
  REQUIRE(record.kernel.has_value());
  CHECK(record.kernel->shape == dk::KernelShape::kIsoGaussian);

  const auto k = dk::synthesize_kernel(dk::BlurKernelSpec::iso_gaussian(0.2));
  auto blurred = oracle::correlate(hr, k.weights, k.size);
  dk::clamp01(blurred);
  auto want = oracle::resize(blurred, 21, 21, false, true);
  dk::clamp01(want);
  CHECK(max_abs_diff(lr, want) < 1e-12);

  CHECK(dk::apply_record(hr, record) == lr);
}

TEST_CASE("simple pipeline is the complex pipeline with stages disabled") {
  const auto hr = oracle::test_image(48, 48, 7);
  const auto [lr, record] = dk::degrade_simple(hr, 1.3, 5);
  dk::DegradationRecord complex = record;
  complex.pipeline = dk::Pipeline::kComplex;
  CHECK(dk::apply_record(hr, complex) == lr);
}

TEST_CASE("complex sampling distribution and ranges") {
  int poisson = 0, grey = 0, h264 = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto r = dk::sample_complex_record(dk::derive_seed(1, "img", i));
    REQUIRE(r.kernel.has_value());
    r.kernel->validate();
    r.noise.validate();
    r.compression.validate();
    if (r.noise.kind == dk::NoiseKind::kPoisson) {
      ++poisson;
      REQUIRE(r.noise.magnitude >= 0.05);
      REQUIRE(r.noise.magnitude <= 3.0);
    } else {
      REQUIRE(r.noise.kind == dk::NoiseKind::kGaussian);
      REQUIRE(r.noise.magnitude >= 1.0);
      REQUIRE(r.noise.magnitude <= 30.0);
    }
    if (r.noise.grey) ++grey;
    if (r.substituted_compression) ++h264;
    REQUIRE(r.compression.kind == dk::CompressionKind::kJpeg);
    REQUIRE(r.compression.level >= 30);
    REQUIRE(r.compression.level <= 95);
  }
  const double sd_half = std::sqrt(n * 0.25);
  const double sd_grey = std::sqrt(n * 0.4 * 0.6);
  CHECK(std::abs(poisson - n / 2.0) < 3 * sd_half);
  CHECK(std::abs(h264 - n / 2.0) < 3 * sd_half);
  CHECK(std::abs(grey - 0.4 * n) < 3 * sd_grey);
}

TEST_CASE("complex pipeline: determinism, replay, range, h264 policies") {
  const auto hr = oracle::test_image(64, 64, 9);
  const auto a = dk::degrade_complex(hr, 1234);
  const auto b = dk::degrade_complex(hr, 1234);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK(in_unit_range(a.first));
  CHECK(dk::apply_record(hr, a.second) == a.first);

  // Find a seed that draws H.264.
  std::uint64_t seed = 0;
  while (!dk::sample_complex_record(seed).substituted_compression) ++seed;
  dk::DegradeOptions abort;
  abort.h264_policy = dk::H264Policy::kAbort;
  CHECK_THROWS_AS(dk::degrade_complex(hr, seed, abort), dk::BackendUnavailable);

  const dk::ExternalEncoder copy{"cp {input} {output}"};
  dk::DegradeOptions with_backend;
  with_backend.h264 = &copy;
  const auto [lr, record] = dk::degrade_complex(hr, seed, with_backend);
  CHECK(record.compression.kind == dk::CompressionKind::kH264);
  CHECK_FALSE(record.substituted_compression);
  CHECK(dk::apply_record(hr, record, with_backend) == lr);
  // Parameter draws are the same whether or not a backend is present.
  const auto substituted = dk::sample_complex_record(seed);
  CHECK(substituted.kernel == record.kernel);
  CHECK(substituted.noise == record.noise);
}

TEST_CASE("records round-trip through json") {
  for (int i = 0; i < 50; ++i) {
    auto r = dk::sample_complex_record(dk::derive_seed(3, "x", i));
    r.source_id = "dir/img" + std::to_string(i);
    CHECK(dk::record_from_json(nlohmann::json::parse(dk::to_json(r).dump())) == r);
  }
  auto simple = dk::degrade_simple(dk::ImageBuffer(8, 8, 0.5), 1.0, 4).second;
  CHECK(dk::record_from_json(dk::to_json(simple)) == simple);
  CHECK_THROWS_AS(dk::record_from_json(nlohmann::json{{"pipeline", "simple"}}), dk::DataError);
}

TEST_CASE("noise and compression validation") {
  CHECK_THROWS_AS((dk::NoiseSpec{dk::NoiseKind::kGaussian, 31.0, false}.validate()), dk::DataError);
  CHECK_THROWS_AS((dk::NoiseSpec{dk::NoiseKind::kPoisson, 0.01, false}.validate()), dk::DataError);
  CHECK_NOTHROW((dk::NoiseSpec{dk::NoiseKind::kPoisson, 3.0, true}.validate()));
  CHECK_THROWS_AS((dk::CompressionSpec{dk::CompressionKind::kH264, 41}.validate()), dk::DataError);
  CHECK_NOTHROW((dk::CompressionSpec{dk::CompressionKind::kJpeg, 5}.validate()));
}

TEST_CASE("scenario presets") {
  const auto iso = dk::scenario_variants("Iso");
  REQUIRE(iso.size() == 1);
  const auto rec = dk::scenario_record(iso[0], 1);
  REQUIRE(rec.kernel.has_value());
  CHECK(rec.kernel->shape == dk::KernelShape::kIsoGaussian);
  CHECK(rec.kernel->sigma_x == 2.0);
  CHECK(rec.noise.kind == dk::NoiseKind::kNone);
  CHECK(rec.compression.kind == dk::CompressionKind::kNone);

  const auto gj = dk::scenario_variants("Gaussian + JPEG");
  REQUIRE(gj.size() == 2);
  for (const auto& v : gj) {
    const auto r = dk::scenario_record(v, 2);
    CHECK_FALSE(r.kernel.has_value());
    CHECK(r.noise.kind == dk::NoiseKind::kGaussian);
    CHECK(r.noise.magnitude == 20.0);
    CHECK(r.compression.kind == dk::CompressionKind::kJpeg);
    CHECK(r.compression.level == 60);
  }
  CHECK(gj[0].grey != gj[1].grey);

  const auto an = dk::scenario_record(dk::scenario_variants("Aniso")[0], 3);
  CHECK(an.kernel->sigma_x == 2.0);
  CHECK(an.kernel->sigma_y == 1.0);

  const auto jm = dk::scenario_record(dk::scenario_variants("Aniso + Poisson + JM")[0], 4);
  CHECK(jm.substituted_compression);
  CHECK(jm.compression.level == 60);
  CHECK(jm.noise.magnitude == 2.0);

  // Totals over 309 source images.
  const std::map<std::string, int> totals = {
      {"JPEG", 309}, {"JM", 309}, {"Poisson", 618}, {"Gaussian", 618},
      {"Iso", 309}, {"Aniso", 309}, {"Iso + Gaussian", 618},
      {"Gaussian + JPEG", 618}, {"Iso + Gaussian + JPEG", 618},
      {"Aniso + Poisson + JM", 618},
      {"Iso/Aniso + Gaussian/Poisson + JPEG/JM", 4944}};
  CHECK(dk::scenario_names().size() == totals.size());
  for (const auto& name : dk::scenario_names()) {
    const auto variants = dk::scenario_variants(name);
    CHECK(309 * static_cast<int>(variants.size()) == totals.at(name));
    std::set<std::string> tags;
    for (const auto& v : variants) tags.insert(v.tag);
    CHECK(tags.size() == variants.size());
  }
  CHECK_THROWS_AS(dk::scenario_variants("Blurry"), dk::DataError);
}

TEST_CASE("every stage output stays in range") {
  const auto hr = oracle::test_image(64, 64, 10);
  for (int i = 0; i < 20; ++i) {
    CHECK(in_unit_range(dk::degrade_complex(hr, dk::derive_seed(2, "r", i)).first));
  }
}

}  // TEST_SUITE
