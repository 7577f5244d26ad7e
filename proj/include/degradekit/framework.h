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

#ifndef DEGRADEKIT_FRAMEWORK_H_
#define DEGRADEKIT_FRAMEWORK_H_

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "degradekit/degrade.h"
#include "degradekit/image.h"
#include "degradekit/insertion.h"
#include "degradekit/kernels.h"
#include "degradekit/metadata.h"

namespace degradekit {

enum class MetaFormat { kSigma, kPca, kComplex15 };

std::string_view to_string(MetaFormat format);
MetaFormat meta_format_from_string(std::string_view name);

// Maps an LR image (and, after the first round, the previous SR output) to a
// degradation vector of fixed length.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual MetaVector predict(const ImageBuffer& lr,
                             const ImageBuffer* sr_feedback = nullptr) const = 0;
  virtual std::size_t output_size() const = 0;
};

// Ground-truth encoding of `record`. Pca needs a basis; Sigma needs an
// isotropic Gaussian record.
MetaVector oracle_encoding(const DegradationRecord& record, MetaFormat format,
                           const PcaBasis* basis = nullptr);

class OraclePredictor final : public Predictor {
 public:
  OraclePredictor(const DegradationRecord& record, MetaFormat format,
                  const PcaBasis* basis = nullptr);

  MetaVector predict(const ImageBuffer& lr,
                     const ImageBuffer* sr_feedback = nullptr) const override;
  std::size_t output_size() const override { return value_.size(); }

 private:
  MetaVector value_;
};

// Oracle output plus i.i.d. N(0, std^2). Sigma and Complex15 outputs are
// clamped to [0,1]; PCA codes are left unclamped. Every call redraws from
// `seed`, so repeated calls agree.
class NoisyOraclePredictor final : public Predictor {
 public:
  NoisyOraclePredictor(const DegradationRecord& record, MetaFormat format,
                       std::uint64_t seed, double std = kMetaNoiseStd,
                       const PcaBasis* basis = nullptr);

  MetaVector predict(const ImageBuffer& lr,
                     const ImageBuffer* sr_feedback = nullptr) const override;
  std::size_t output_size() const override { return oracle_.size(); }

  MetaVector unclamped() const;

 private:
  MetaVector oracle_;
  MetaFormat format_;
  std::uint64_t seed_;
  double std_;
};

using Restorer =
    std::function<ImageBuffer(const ImageBuffer& lr, const MetaVector& meta)>;

// Restorer stubs that ignore the metadata.
ImageBuffer identity_restorer(const ImageBuffer& lr, const MetaVector& meta);
Restorer bicubic_restorer(int scale = kScale);

struct IterativeLoopConfig {
  int iterations = 4;
  // Expected upscaling factor of the restorer; 0 only requires the output
  // shape to stay constant across rounds.
  int scale = kScale;

  void validate() const;
};

struct IterativeResult {
  ImageBuffer sr;
  std::vector<MetaVector> trace;
};

IterativeResult run_iterative(const ImageBuffer& lr, const Predictor& predictor,
                              const Restorer& restorer,
                              const IterativeLoopConfig& config = {});

}  // namespace degradekit

#endif  // DEGRADEKIT_FRAMEWORK_H_
