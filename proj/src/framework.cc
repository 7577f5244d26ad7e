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

#include "degradekit/framework.h"

#include <algorithm>
#include <string>

#include "degradekit/error.h"
#include "degradekit/metadata.h"
#include "degradekit/random.h"
#include "degradekit/resample.h"

namespace degradekit {

std::string_view to_string(MetaFormat format) {
  switch (format) {
    case MetaFormat::kSigma:
      return "sigma";
    case MetaFormat::kPca:
      return "pca";
    case MetaFormat::kComplex15:
      return "complex15";
  }
  return "unknown";
}

MetaFormat meta_format_from_string(std::string_view name) {
  if (name == "sigma") return MetaFormat::kSigma;
  if (name == "pca") return MetaFormat::kPca;
  if (name == "complex15") return MetaFormat::kComplex15;
  throw DataError("unknown metadata format '" + std::string(name) + "'");
}

MetaVector oracle_encoding(const DegradationRecord& record, MetaFormat format,
                           const PcaBasis* basis) {
  switch (format) {
    case MetaFormat::kSigma:
      return {encode_simple(record).value};
    case MetaFormat::kComplex15:
      return encode_complex(record).to_vector();
    case MetaFormat::kPca:
      if (basis == nullptr) throw DataError("pca format requires a basis");
      if (!record.kernel) {
        throw DataError("pca format requires a record with a blur kernel");
      }
      return project_kernel(*basis, synthesize_kernel(*record.kernel));
  }
  throw DataError("unknown metadata format");
}

OraclePredictor::OraclePredictor(const DegradationRecord& record,
                                 MetaFormat format, const PcaBasis* basis)
    : value_(oracle_encoding(record, format, basis)) {}

MetaVector OraclePredictor::predict(const ImageBuffer&, const ImageBuffer*) const {
  return value_;
}

NoisyOraclePredictor::NoisyOraclePredictor(const DegradationRecord& record,
                                           MetaFormat format, std::uint64_t seed,
                                           double std, const PcaBasis* basis)
    : oracle_(oracle_encoding(record, format, basis)),
      format_(format),
      seed_(seed),
      std_(std) {
  if (!(std >= 0.0)) throw DataError("noise std must be non-negative");
}

MetaVector NoisyOraclePredictor::unclamped() const {
  Rng rng = make_rng(seed_);
  MetaVector out = oracle_;
  if (std_ == 0.0) return out;
  for (double& v : out) v += normal(rng, 0.0, std_);
  return out;
}

MetaVector NoisyOraclePredictor::predict(const ImageBuffer&,
                                         const ImageBuffer*) const {
  MetaVector out = unclamped();
  if (format_ != MetaFormat::kPca) {
    for (double& v : out) v = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

ImageBuffer identity_restorer(const ImageBuffer& lr, const MetaVector&) {
  return lr;
}

Restorer bicubic_restorer(int scale) {
  return [scale](const ImageBuffer& lr, const MetaVector&) {
    return upsample_bicubic(lr, scale);
  };
}

void IterativeLoopConfig::validate() const {
  if (iterations < 1) throw DataError("iterations must be >= 1");
  if (scale < 0) throw DataError("scale must be >= 0");
}

IterativeResult run_iterative(const ImageBuffer& lr, const Predictor& predictor,
                              const Restorer& restorer,
                              const IterativeLoopConfig& config) {
  config.validate();
  if (lr.empty()) throw DataError("run_iterative: empty input image");
  IterativeResult result;
  result.trace.reserve(static_cast<std::size_t>(config.iterations));
  for (int it = 0; it < config.iterations; ++it) {
    const ImageBuffer* feedback = it == 0 ? nullptr : &result.sr;
    MetaVector meta = predictor.predict(lr, feedback);
    if (meta.size() != predictor.output_size()) {
      throw DataError("predictor returned " + std::to_string(meta.size()) +
                      " values, expected " +
                      std::to_string(predictor.output_size()));
    }
    ImageBuffer sr = restorer(lr, meta);
    const bool shape_ok =
        config.scale > 0
            ? sr.height() == lr.height() * config.scale &&
                  sr.width() == lr.width() * config.scale
            : (it == 0 ? !sr.empty() : sr.same_shape(result.sr));
    if (!shape_ok) {
      throw DataError("restorer output " + std::to_string(sr.height()) + "x" +
                      std::to_string(sr.width()) + " does not match the loop's " +
                      "expected shape at iteration " + std::to_string(it + 1));
    }
    result.sr = std::move(sr);
    result.trace.push_back(std::move(meta));
  }
  return result;
}

}  // namespace degradekit
