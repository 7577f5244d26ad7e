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

#include "degradekit/degrade.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "degradekit/error.h"
#include "degradekit/resample.h"

namespace degradekit {
namespace {

constexpr int C = ImageBuffer::kChannels;

void require(bool ok, const std::string& message) {
  if (!ok) throw DataError(message);
}

// Resolves a drawn H.264 stage against the available backend.
void resolve_h264(DegradationRecord& record, const DegradeOptions& options,
                  int substitute_quality) {
  if (record.compression.kind != CompressionKind::kH264 || options.h264) return;
  if (options.h264_policy == H264Policy::kAbort) {
    throw BackendUnavailable(
        std::string("H.264 compression drawn but no backend configured (set ") +
        ExternalEncoder::kEnvVar + ")");
  }
  record.compression = {CompressionKind::kJpeg, substitute_quality};
  record.substituted_compression = true;
}

}  // namespace

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kNone: return "none";
    case NoiseKind::kGaussian: return "gaussian";
    case NoiseKind::kPoisson: return "poisson";
  }
  return "none";
}

std::string_view to_string(CompressionKind kind) {
  switch (kind) {
    case CompressionKind::kNone: return "none";
    case CompressionKind::kJpeg: return "jpeg";
    case CompressionKind::kH264: return "h264";
  }
  return "none";
}

NoiseKind noise_kind_from_string(std::string_view name) {
  if (name == "none") return NoiseKind::kNone;
  if (name == "gaussian") return NoiseKind::kGaussian;
  if (name == "poisson") return NoiseKind::kPoisson;
  throw DataError("unknown noise kind '" + std::string(name) + "'");
}

CompressionKind compression_kind_from_string(std::string_view name) {
  if (name == "none") return CompressionKind::kNone;
  if (name == "jpeg") return CompressionKind::kJpeg;
  if (name == "h264") return CompressionKind::kH264;
  throw DataError("unknown compression kind '" + std::string(name) + "'");
}

std::string_view to_string(H264Policy policy) {
  return policy == H264Policy::kSubstitute ? "substitute" : "abort";
}

H264Policy h264_policy_from_string(std::string_view name) {
  if (name == "substitute") return H264Policy::kSubstitute;
  if (name == "abort") return H264Policy::kAbort;
  throw DataError("unknown H.264 policy '" + std::string(name) + "'");
}

void NoiseSpec::validate() const {
  switch (kind) {
    case NoiseKind::kNone:
      return;
    case NoiseKind::kGaussian:
      require(magnitude >= NoiseRanges::kGaussianMin &&
                  magnitude <= NoiseRanges::kGaussianMax,
              "Gaussian noise sigma " + std::to_string(magnitude) +
                  " outside [1, 30]");
      return;
    case NoiseKind::kPoisson:
      require(magnitude >= NoiseRanges::kPoissonMin &&
                  magnitude <= NoiseRanges::kPoissonMax,
              "Poisson noise scale " + std::to_string(magnitude) +
                  " outside [0.05, 3]");
      return;
  }
}

void CompressionSpec::validate() const {
  switch (kind) {
    case CompressionKind::kNone:
      return;
    case CompressionKind::kJpeg:
      require(level >= 1 && level <= 100,
              "JPEG quality " + std::to_string(level) + " outside [1, 100]");
      return;
    case CompressionKind::kH264:
      require(level >= CompressionRanges::kQpiMin &&
                  level <= CompressionRanges::kQpiMax,
              "H.264 QPI " + std::to_string(level) + " outside [20, 40]");
      return;
  }
}

nlohmann::json to_json(const DegradationRecord& record) {
  nlohmann::json j;
  j["source_id"] = record.source_id;
  j["pipeline"] = std::string(to_string(record.pipeline));
  j["kernel"] = record.kernel ? to_json(*record.kernel) : nlohmann::json(nullptr);
  j["scale"] = record.scale;
  j["noise"] = {{"kind", std::string(to_string(record.noise.kind))},
                {"magnitude", record.noise.magnitude},
                {"grey", record.noise.grey}};
  j["compression"] = {{"kind", std::string(to_string(record.compression.kind))},
                      {"level", record.compression.level}};
  j["seed"] = record.seed;
  j["substituted_compression"] = record.substituted_compression;
  if (!record.scenario.empty()) j["scenario"] = record.scenario;
  return j;
}

DegradationRecord record_from_json(const nlohmann::json& j) {
  try {
    DegradationRecord r;
    r.source_id = j.at("source_id").get<std::string>();
    r.pipeline = pipeline_from_string(j.at("pipeline").get<std::string>());
    if (!j.at("kernel").is_null()) r.kernel = kernel_spec_from_json(j["kernel"]);
    r.scale = j.value("scale", kScale);
    const auto& n = j.at("noise");
    r.noise.kind = noise_kind_from_string(n.at("kind").get<std::string>());
    r.noise.magnitude = n.value("magnitude", 0.0);
    r.noise.grey = n.value("grey", false);
    const auto& c = j.at("compression");
    r.compression.kind =
        compression_kind_from_string(c.at("kind").get<std::string>());
    r.compression.level = c.value("level", 0);
    r.seed = j.at("seed").get<std::uint64_t>();
    r.substituted_compression = j.value("substituted_compression", false);
    r.scenario = j.value("scenario", std::string());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed degradation record: ") + e.what());
  }
}

ImageBuffer blur(const ImageBuffer& image, const Kernel2D& kernel) {
  const int h = image.height();
  const int w = image.width();
  const int half = kernel.size / 2;
  ImageBuffer out(h, w);
  // Border index tables.
  std::vector<int> rows(static_cast<std::size_t>(h + 2 * half));
  std::vector<int> cols(static_cast<std::size_t>(w + 2 * half));
  for (int i = 0; i < h + 2 * half; ++i) rows[i] = reflect101(i - half, h);
  for (int i = 0; i < w + 2 * half; ++i) cols[i] = reflect101(i - half, w);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc[C] = {0.0, 0.0, 0.0};
      for (int ky = 0; ky < kernel.size; ++ky) {
        const int sy = rows[y + ky];
        for (int kx = 0; kx < kernel.size; ++kx) {
          const double kw = kernel.at(ky, kx);
          if (kw == 0.0) continue;
          const int sx = cols[x + kx];
          for (int c = 0; c < C; ++c) acc[c] += kw * image.at(sy, sx, c);
        }
      }
      for (int c = 0; c < C; ++c) out.at(y, x, c) = acc[c];
    }
  }
  clamp01(out);
  return out;
}

ImageBuffer add_gaussian_noise(const ImageBuffer& image, double sigma_8bit,
                               bool grey, Rng& rng) {
  ImageBuffer out = image;
  const double sigma = sigma_8bit / 255.0;
  std::normal_distribution<double> dist(0.0, sigma);
  const std::size_t pixels = static_cast<std::size_t>(image.height()) * image.width();
  auto& data = out.data();
  if (grey) {
    for (std::size_t p = 0; p < pixels; ++p) {
      const double n = dist(rng);
      for (int c = 0; c < C; ++c) data[p * C + c] += n;
    }
  } else {
    for (double& v : data) v += dist(rng);
  }
  clamp01(out);
  return out;
}

ImageBuffer add_poisson_noise(const ImageBuffer& image, double scale, bool grey,
                              Rng& rng) {
  constexpr double L = NoiseRanges::kPhotonCount;
  auto shot = [&](double x) {
    const double mean = x * L;
    if (mean <= 0.0) return 0.0;
    std::poisson_distribution<long long> dist(mean);
    return static_cast<double>(dist(rng)) / L - x;
  };
  ImageBuffer out = image;
  const std::size_t pixels = static_cast<std::size_t>(image.height()) * image.width();
  auto& data = out.data();
  if (grey) {
    for (std::size_t p = 0; p < pixels; ++p) {
      const double lum = 0.299 * data[p * C] + 0.587 * data[p * C + 1] +
                         0.114 * data[p * C + 2];
      const double n = scale * shot(lum);
      for (int c = 0; c < C; ++c) data[p * C + c] += n;
    }
  } else {
    for (double& v : data) v += scale * shot(v);
  }
  clamp01(out);
  return out;
}

ImageBuffer apply_record(const ImageBuffer& hr, const DegradationRecord& record,
                         const DegradeOptions& options) {
  record.noise.validate();
  record.compression.validate();
  ImageBuffer img = hr;
  if (record.kernel) img = blur(img, synthesize_kernel(*record.kernel));
  img = downsample_bicubic(img, record.scale);

  Rng noise_rng = make_rng(substream(record.seed, "noise"));
  switch (record.noise.kind) {
    case NoiseKind::kNone:
      break;
    case NoiseKind::kGaussian:
      img = add_gaussian_noise(img, record.noise.magnitude, record.noise.grey,
                               noise_rng);
      break;
    case NoiseKind::kPoisson:
      img = add_poisson_noise(img, record.noise.magnitude, record.noise.grey,
                              noise_rng);
      break;
  }

  switch (record.compression.kind) {
    case CompressionKind::kNone:
      break;
    case CompressionKind::kJpeg:
      img = compress_jpeg(img, record.compression.level);
      break;
    case CompressionKind::kH264:
      img = compress_h264(img, record.compression.level, options.h264);
      break;
  }
  clamp01(img);
  return img;
}

std::pair<ImageBuffer, DegradationRecord> degrade_simple(const ImageBuffer& hr,
                                                         double sigma,
                                                         std::uint64_t seed) {
  DegradationRecord record;
  record.pipeline = Pipeline::kSimple;
  record.kernel = BlurKernelSpec::iso_gaussian(sigma);
  record.seed = seed;
  ImageBuffer lr = apply_record(hr, record);
  return {std::move(lr), std::move(record)};
}

std::pair<ImageBuffer, DegradationRecord> degrade_simple_random(
    const ImageBuffer& hr, std::uint64_t seed) {
  Rng rng = make_rng(substream(seed, "params"));
  const BlurKernelSpec spec = sample_kernel_spec(rng, Pipeline::kSimple);
  return degrade_simple(hr, spec.sigma_x, seed);
}

DegradationRecord sample_complex_record(std::uint64_t seed,
                                        const DegradeOptions& options) {
  Rng rng = make_rng(substream(seed, "params"));
  DegradationRecord record;
  record.pipeline = Pipeline::kComplex;
  record.seed = seed;
  record.kernel = sample_kernel_spec(rng, Pipeline::kComplex);

  // Noise kind first, then the grey flag, then the magnitude.
  record.noise.kind =
      bernoulli(rng, 0.5) ? NoiseKind::kPoisson : NoiseKind::kGaussian;
  record.noise.grey = bernoulli(rng, NoiseRanges::kGreyProbability);
  record.noise.magnitude =
      record.noise.kind == NoiseKind::kGaussian
          ? uniform(rng, NoiseRanges::kGaussianMin, NoiseRanges::kGaussianMax)
          : uniform(rng, NoiseRanges::kPoissonMin, NoiseRanges::kPoissonMax);

  if (bernoulli(rng, 0.5)) {
    record.compression = {CompressionKind::kH264,
                          uniform_int(rng, CompressionRanges::kQpiMin,
                                      CompressionRanges::kQpiMax)};
  } else {
    record.compression = {CompressionKind::kJpeg,
                          uniform_int(rng, CompressionRanges::kJpegMin,
                                      CompressionRanges::kJpegMax)};
  }
  const int substitute = uniform_int(rng, CompressionRanges::kJpegMin,
                                     CompressionRanges::kJpegMax);
  resolve_h264(record, options, substitute);
  return record;
}

std::pair<ImageBuffer, DegradationRecord> degrade_complex(
    const ImageBuffer& hr, std::uint64_t seed, const DegradeOptions& options) {
  DegradationRecord record = sample_complex_record(seed, options);
  ImageBuffer lr = apply_record(hr, record, options);
  return {std::move(lr), std::move(record)};
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "JPEG",
      "JM",
      "Poisson",
      "Gaussian",
      "Iso",
      "Aniso",
      "Iso + Gaussian",
      "Gaussian + JPEG",
      "Iso + Gaussian + JPEG",
      "Aniso + Poisson + JM",
      "Iso/Aniso + Gaussian/Poisson + JPEG/JM",
  };
  return names;
}

std::vector<ScenarioVariant> scenario_variants(std::string_view name) {
  std::vector<BlurPreset> blurs = {BlurPreset::kNone};
  std::vector<NoiseKind> noises = {NoiseKind::kNone};
  std::vector<CompressionKind> compressions = {CompressionKind::kNone};

  if (name == "JPEG") {
    compressions = {CompressionKind::kJpeg};
  } else if (name == "JM") {
    compressions = {CompressionKind::kH264};
  } else if (name == "Poisson") {
    noises = {NoiseKind::kPoisson};
  } else if (name == "Gaussian") {
    noises = {NoiseKind::kGaussian};
  } else if (name == "Iso") {
    blurs = {BlurPreset::kIso};
  } else if (name == "Aniso") {
    blurs = {BlurPreset::kAniso};
  } else if (name == "Iso + Gaussian") {
    blurs = {BlurPreset::kIso};
    noises = {NoiseKind::kGaussian};
  } else if (name == "Gaussian + JPEG") {
    noises = {NoiseKind::kGaussian};
    compressions = {CompressionKind::kJpeg};
  } else if (name == "Iso + Gaussian + JPEG") {
    blurs = {BlurPreset::kIso};
    noises = {NoiseKind::kGaussian};
    compressions = {CompressionKind::kJpeg};
  } else if (name == "Aniso + Poisson + JM") {
    blurs = {BlurPreset::kAniso};
    noises = {NoiseKind::kPoisson};
    compressions = {CompressionKind::kH264};
  } else if (name == "Iso/Aniso + Gaussian/Poisson + JPEG/JM") {
    blurs = {BlurPreset::kIso, BlurPreset::kAniso};
    noises = {NoiseKind::kGaussian, NoiseKind::kPoisson};
    compressions = {CompressionKind::kJpeg, CompressionKind::kH264};
  } else {
    throw DataError("unknown scenario '" + std::string(name) + "'");
  }

  std::vector<ScenarioVariant> variants;
  for (BlurPreset b : blurs) {
    for (NoiseKind n : noises) {
      for (CompressionKind c : compressions) {
        const std::vector<bool> greys =
            n == NoiseKind::kNone ? std::vector<bool>{false}
                                  : std::vector<bool>{false, true};
        for (bool grey : greys) {
          ScenarioVariant v;
          v.scenario = std::string(name);
          v.blur = b;
          v.noise = n;
          v.grey = grey;
          v.compression = c;
          std::string tag;
          auto add = [&tag](std::string_view part) {
            if (!tag.empty()) tag += '-';
            tag += part;
          };
          if (b == BlurPreset::kIso) add("iso");
          if (b == BlurPreset::kAniso) add("aniso");
          if (n != NoiseKind::kNone) add(to_string(n));
          if (c == CompressionKind::kJpeg) add("jpeg");
          if (c == CompressionKind::kH264) add("jm");
          if (n != NoiseKind::kNone) add(grey ? "grey" : "colour");
          v.tag = tag;
          variants.push_back(std::move(v));
        }
      }
    }
  }
  return variants;
}

DegradationRecord scenario_record(const ScenarioVariant& variant,
                                  std::uint64_t seed,
                                  const DegradeOptions& options) {
  using P = ScenarioPresets;
  Rng rng = make_rng(substream(seed, "params"));
  DegradationRecord record;
  record.pipeline = Pipeline::kComplex;
  record.seed = seed;
  record.scenario = variant.scenario;
  if (variant.blur == BlurPreset::kIso) {
    record.kernel = BlurKernelSpec::iso_gaussian(P::kIsoSigma);
  } else if (variant.blur == BlurPreset::kAniso) {
    BlurKernelSpec spec;
    spec.shape = KernelShape::kAnisoGaussian;
    spec.sigma_x = P::kAnisoSigmaX;
    spec.sigma_y = P::kAnisoSigmaY;
    spec.theta = uniform(rng, -std::numbers::pi, std::numbers::pi);
    record.kernel = spec;
  }
  record.noise.kind = variant.noise;
  record.noise.grey = variant.noise != NoiseKind::kNone && variant.grey;
  if (variant.noise == NoiseKind::kGaussian) record.noise.magnitude = P::kGaussianSigma;
  if (variant.noise == NoiseKind::kPoisson) record.noise.magnitude = P::kPoissonScale;
  record.compression.kind = variant.compression;
  if (variant.compression == CompressionKind::kJpeg) {
    record.compression.level = P::kJpegQuality;
  } else if (variant.compression == CompressionKind::kH264) {
    record.compression.level = P::kQpi;
  }
  resolve_h264(record, options, P::kJpegQuality);
  return record;
}

std::pair<ImageBuffer, DegradationRecord> apply_scenario(
    const ImageBuffer& hr, const ScenarioVariant& variant, std::uint64_t seed,
    const DegradeOptions& options) {
  DegradationRecord record = scenario_record(variant, seed, options);
  ImageBuffer lr = apply_record(hr, record, options);
  return {std::move(lr), std::move(record)};
}

}  // namespace degradekit
