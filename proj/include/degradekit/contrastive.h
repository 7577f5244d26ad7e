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

#ifndef DEGRADEKIT_CONTRASTIVE_H_
#define DEGRADEKIT_CONTRASTIVE_H_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "degradekit/image.h"
#include "degradekit/metadata.h"

namespace degradekit {

using Embedding = std::vector<double>;

inline constexpr std::size_t kDefaultEmbeddingDim = 256;
inline constexpr std::size_t kDefaultQueueCapacity = 8192;
inline constexpr double kUnitNormTolerance = 1e-8;

Embedding l2_normalized(std::span<const double> v);

struct QueueEntry {
  Embedding embedding;
  std::optional<std::int64_t> label;        // SupMoCo
  std::optional<WeakConDegVector> degvec;   // WeakCon
};

// Bounded FIFO of past key embeddings. Single writer; pushes must be
// serialized by the caller.
class NegativeQueue {
 public:
  explicit NegativeQueue(std::size_t capacity = kDefaultQueueCapacity);

  // Appends in order, evicting the oldest entries beyond capacity. Throws
  // DataError (before modifying the queue) if any embedding is not unit norm.
  void push(std::span<const QueueEntry> entries);
  void push(QueueEntry entry);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const QueueEntry& operator[](std::size_t i) const { return entries_[i]; }
  const std::deque<QueueEntry>& entries() const { return entries_; }

 private:
  std::size_t capacity_;
  std::deque<QueueEntry> entries_;
};

struct LossConfig {
  double temperature = 0.07;
  double momentum = 0.999;

  void validate() const;
};

// Loss value and its gradient with respect to each raw (pre-normalization)
// query vector.
struct LossResult {
  double value = 0.0;
  std::vector<Embedding> query_grad;
};

// All losses L2-normalize queries and positives before taking dot products.
// An empty queue contributes nothing to the denominators.

double moco_loss(std::span<const Embedding> queries,
                 std::span<const Embedding> positives,
                 const NegativeQueue& queue, double tau);

double moco_multi_loss(std::span<const Embedding> queries,
                       std::span<const std::vector<Embedding>> positive_sets,
                       const NegativeQueue& queue, double tau);

// Same-label queue entries join the numerator; each query's term is divided
// by its own F = P + Q.
double supmoco_loss(std::span<const Embedding> queries,
                    std::span<const std::vector<Embedding>> positive_sets,
                    std::span<const std::int64_t> labels,
                    const NegativeQueue& queue, double tau);

// weights[i][j] in [0,1] scales the repulsion of queue entry j for query i.
double weakcon_loss(std::span<const Embedding> queries,
                    std::span<const std::vector<Embedding>> positive_sets,
                    std::span<const std::vector<double>> weights,
                    const NegativeQueue& queue, double tau);

LossResult moco_loss_grad(std::span<const Embedding> queries,
                          std::span<const Embedding> positives,
                          const NegativeQueue& queue, double tau);
LossResult moco_multi_loss_grad(
    std::span<const Embedding> queries,
    std::span<const std::vector<Embedding>> positive_sets,
    const NegativeQueue& queue, double tau);
LossResult supmoco_loss_grad(
    std::span<const Embedding> queries,
    std::span<const std::vector<Embedding>> positive_sets,
    std::span<const std::int64_t> labels, const NegativeQueue& queue,
    double tau);
LossResult weakcon_loss_grad(
    std::span<const Embedding> queries,
    std::span<const std::vector<Embedding>> positive_sets,
    std::span<const std::vector<double>> weights, const NegativeQueue& queue,
    double tau);

// key <- m * key + (1 - m) * query, elementwise.
std::vector<double> momentum_update(std::span<const double> query_params,
                                    std::span<const double> key_params,
                                    double m);

// Stand-in for the query/key encoders: any map from an image patch to an
// embedding.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual Embedding embed(const ImageBuffer& patch) const = 0;
  virtual std::size_t dim() const = 0;
};

// Fixed pseudo-random linear projection of the patch pixels, normalized.
// Projection entries are regenerated from (seed, output, input) on the fly.
class RandomProjectionEncoder final : public EmbeddingProvider {
 public:
  explicit RandomProjectionEncoder(std::uint64_t seed,
                                   std::size_t dim = kDefaultEmbeddingDim)
      : seed_(seed), dim_(dim) {}

  Embedding embed(const ImageBuffer& patch) const override;
  std::size_t dim() const override { return dim_; }

 private:
  std::uint64_t seed_;
  std::size_t dim_;
};

}  // namespace degradekit

#endif  // DEGRADEKIT_CONTRASTIVE_H_
