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

#include "degradekit/contrastive.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "degradekit/error.h"
#include "degradekit/random.h"

namespace degradekit {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

// Per-query view of the loss: which queue entries join the numerator and how
// strongly each one repels.
struct QueryTerm {
  std::span<const Embedding> positives;
  const std::vector<double>* weights = nullptr;  // null -> all 1
  std::vector<char> in_numerator;                // empty -> none
  double divisor = 1.0;
};

LossResult evaluate(std::span<const Embedding> queries,
                    std::span<const QueryTerm> terms, const NegativeQueue& queue,
                    double tau, bool want_grad) {
  if (!(tau > 0.0)) throw DataError("temperature must be positive");
  if (queries.empty()) throw DataError("loss needs at least one query");
  const std::size_t dim = queries.front().size();
  const std::size_t nq = queue.size();
  for (std::size_t j = 0; j < nq; ++j) {
    if (queue[j].embedding.size() != dim) {
      throw DataError("queue entry dimension does not match queries");
    }
  }

  LossResult result;
  if (want_grad) result.query_grad.resize(queries.size());
  const double batch = static_cast<double>(queries.size());

  std::vector<double> s_pos, s_neg(nq);
  std::vector<Embedding> pos_unit;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const QueryTerm& term = terms[i];
    if (queries[i].size() != dim) throw DataError("query dimension mismatch");
    if (term.positives.empty()) {
      throw DataError("query " + std::to_string(i) + " has an empty positive set");
    }
    const double qnorm = norm(queries[i]);
    if (!(qnorm > 0.0)) throw DataError("query embedding has zero norm");
    Embedding q = queries[i];
    for (double& v : q) v /= qnorm;

    pos_unit.clear();
    s_pos.clear();
    for (const Embedding& k : term.positives) {
      if (k.size() != dim) throw DataError("positive dimension mismatch");
      pos_unit.push_back(l2_normalized(k));
      s_pos.push_back(dot(q, pos_unit.back()) / tau);
    }
    for (std::size_t j = 0; j < nq; ++j) s_neg[j] = dot(q, queue[j].embedding) / tau;

    auto weight = [&](std::size_t j) {
      return term.weights ? (*term.weights)[j] : 1.0;
    };
    auto numerator_has = [&](std::size_t j) {
      return !term.in_numerator.empty() && term.in_numerator[j];
    };

    // log num and log(den - num) use separate max shifts and are combined
    // through a softplus.
    double num_shift = -std::numeric_limits<double>::infinity();
    double rest_shift = -std::numeric_limits<double>::infinity();
    for (double s : s_pos) num_shift = std::max(num_shift, s);
    for (std::size_t j = 0; j < nq; ++j) {
      if (numerator_has(j)) num_shift = std::max(num_shift, s_neg[j]);
      if (weight(j) - (numerator_has(j) ? 1.0 : 0.0) > 0.0) {
        rest_shift = std::max(rest_shift, s_neg[j]);
      }
    }
    double num = 0.0, rest = 0.0;
    for (double s : s_pos) num += std::exp(s - num_shift);
    for (std::size_t j = 0; j < nq; ++j) {
      const double excess = weight(j) - (numerator_has(j) ? 1.0 : 0.0);
      if (numerator_has(j)) num += std::exp(s_neg[j] - num_shift);
      if (excess > 0.0) rest += excess * std::exp(s_neg[j] - rest_shift);
    }
    const double log_num = num_shift + std::log(num);
    double gap = 0.0;  // log den - log num
    if (rest > 0.0) {
      const double x = rest_shift + std::log(rest) - log_num;
      gap = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    }
    const double log_den = log_num + gap;
    const double scale = 1.0 / (batch * term.divisor);
    result.value += scale * gap;

    if (!want_grad) continue;
    // d/dq [log den - log num] = (1/tau) (E_den[v] - E_num[v])
    Embedding gq(dim, 0.0);
    for (std::size_t l = 0; l < pos_unit.size(); ++l) {
      const double c = std::exp(s_pos[l] - log_den) - std::exp(s_pos[l] - log_num);
      for (std::size_t d = 0; d < dim; ++d) gq[d] += c * pos_unit[l][d];
    }
    for (std::size_t j = 0; j < nq; ++j) {
      double c = weight(j) * std::exp(s_neg[j] - log_den);
      if (numerator_has(j)) c -= std::exp(s_neg[j] - log_num);
      if (c == 0.0) continue;
      const auto& v = queue[j].embedding;
      for (std::size_t d = 0; d < dim; ++d) gq[d] += c * v[d];
    }
    for (double& g : gq) g *= scale / tau;
    // Back through q = u / |u|.
    const double radial = dot(gq, q);
    Embedding gu(dim);
    for (std::size_t d = 0; d < dim; ++d) gu[d] = (gq[d] - radial * q[d]) / qnorm;
    result.query_grad[i] = std::move(gu);
  }
  return result;
}

void require_batch(std::size_t queries, std::size_t other, const char* what) {
  if (queries != other) {
    throw DataError(std::string("length mismatch: ") + std::to_string(queries) +
                    " queries vs " + std::to_string(other) + " " + what);
  }
}

std::vector<QueryTerm> multi_terms(
    std::span<const Embedding> queries,
    std::span<const std::vector<Embedding>> positive_sets) {
  require_batch(queries.size(), positive_sets.size(), "positive sets");
  std::vector<QueryTerm> terms(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    terms[i].positives = positive_sets[i];
    terms[i].divisor = static_cast<double>(positive_sets[i].size());
  }
  return terms;
}

LossResult moco_impl(std::span<const Embedding> queries,
                     std::span<const Embedding> positives,
                     const NegativeQueue& queue, double tau, bool grad) {
  require_batch(queries.size(), positives.size(), "positives");
  std::vector<QueryTerm> terms(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    terms[i].positives = positives.subspan(i, 1);
  }
  return evaluate(queries, terms, queue, tau, grad);
}

LossResult supmoco_impl(std::span<const Embedding> queries,
                        std::span<const std::vector<Embedding>> positive_sets,
                        std::span<const std::int64_t> labels,
                        const NegativeQueue& queue, double tau, bool grad) {
  require_batch(queries.size(), labels.size(), "labels");
  std::vector<QueryTerm> terms = multi_terms(queries, positive_sets);
  for (std::size_t j = 0; j < queue.size(); ++j) {
    if (!queue[j].label) {
      throw DataError("supmoco_loss: queue entry " + std::to_string(j) +
                      " has no label");
    }
  }
  for (std::size_t i = 0; i < queries.size(); ++i) {
    auto& mask = terms[i].in_numerator;
    mask.assign(queue.size(), 0);
    std::size_t same = 0;
    for (std::size_t j = 0; j < queue.size(); ++j) {
      if (*queue[j].label == labels[i]) {
        mask[j] = 1;
        ++same;
      }
    }
    terms[i].divisor += static_cast<double>(same);
  }
  return evaluate(queries, terms, queue, tau, grad);
}

LossResult weakcon_impl(std::span<const Embedding> queries,
                        std::span<const std::vector<Embedding>> positive_sets,
                        std::span<const std::vector<double>> weights,
                        const NegativeQueue& queue, double tau, bool grad) {
  require_batch(queries.size(), weights.size(), "weight rows");
  std::vector<QueryTerm> terms = multi_terms(queries, positive_sets);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (weights[i].size() != queue.size()) {
      throw DataError("weakcon_loss: weight row " + std::to_string(i) + " has " +
                      std::to_string(weights[i].size()) + " entries, queue has " +
                      std::to_string(queue.size()));
    }
    for (double w : weights[i]) {
      if (!(w >= 0.0 && w <= 1.0)) {
        throw DataError("weakcon_loss: weight " + std::to_string(w) +
                        " outside [0, 1]");
      }
    }
    terms[i].weights = &weights[i];
  }
  return evaluate(queries, terms, queue, tau, grad);
}

}  // namespace

Embedding l2_normalized(std::span<const double> v) {
  const double n = norm(v);
  if (!(n > 0.0)) throw DataError("cannot normalize a zero embedding");
  Embedding out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

NegativeQueue::NegativeQueue(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw DataError("queue capacity must be positive");
}

void NegativeQueue::push(std::span<const QueueEntry> entries) {
  for (const QueueEntry& e : entries) {
    if (std::abs(norm(e.embedding) - 1.0) > kUnitNormTolerance) {
      throw DataError("queue entries must be unit-norm embeddings");
    }
  }
  for (const QueueEntry& e : entries) {
    entries_.push_back(e);
    if (entries_.size() > capacity_) entries_.pop_front();
  }
}

void NegativeQueue::push(QueueEntry entry) {
  push(std::span<const QueueEntry>(&entry, 1));
}

void LossConfig::validate() const {
  if (!(temperature > 0.0)) throw DataError("temperature must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw DataError("momentum must lie in [0, 1)");
  }
}

double moco_loss(std::span<const Embedding> queries,
                 std::span<const Embedding> positives,
                 const NegativeQueue& queue, double tau) {
  return moco_impl(queries, positives, queue, tau, false).value;
}

double moco_multi_loss(std::span<const Embedding> queries,
                       std::span<const std::vector<Embedding>> positive_sets,
                       const NegativeQueue& queue, double tau) {
  const auto terms = multi_terms(queries, positive_sets);
  return evaluate(queries, terms, queue, tau, false).value;
}

double supmoco_loss(std::span<const Embedding> queries,
                    std::span<const std::vector<Embedding>> positive_sets,
                    std::span<const std::int64_t> labels,
                    const NegativeQueue& queue, double tau) {
  return supmoco_impl(queries, positive_sets, labels, queue, tau, false).value;
}

double weakcon_loss(std::span<const Embedding> queries,
                    std::span<const std::vector<Embedding>> positive_sets,
                    std::span<const std::vector<double>> weights,
                    const NegativeQueue& queue, double tau) {
  return weakcon_impl(queries, positive_sets, weights, queue, tau, false).value;
}

LossResult moco_loss_grad(std::span<const Embedding> queries,
                          std::span<const Embedding> positives,
                          const NegativeQueue& queue, double tau) {
  return moco_impl(queries, positives, queue, tau, true);
}

LossResult moco_multi_loss_grad(
    std::span<const Embedding> queries,
    std::span<const std::vector<Embedding>> positive_sets,
    const NegativeQueue& queue, double tau) {
  const auto terms = multi_terms(queries, positive_sets);
  return evaluate(queries, terms, queue, tau, true);
}

LossResult supmoco_loss_grad(
    std::span<const Embedding> queries,
    std::span<const std::vector<Embedding>> positive_sets,
    std::span<const std::int64_t> labels, const NegativeQueue& queue,
    double tau) {
  return supmoco_impl(queries, positive_sets, labels, queue, tau, true);
}

LossResult weakcon_loss_grad(
    std::span<const Embedding> queries,
    std::span<const std::vector<Embedding>> positive_sets,
    std::span<const std::vector<double>> weights, const NegativeQueue& queue,
    double tau) {
  return weakcon_impl(queries, positive_sets, weights, queue, tau, true);
}

std::vector<double> momentum_update(std::span<const double> query_params,
                                    std::span<const double> key_params,
                                    double m) {
  if (query_params.size() != key_params.size()) {
    throw DataError("momentum_update: parameter length mismatch");
  }
  if (!(m >= 0.0 && m < 1.0)) throw DataError("momentum must lie in [0, 1)");
  std::vector<double> out(key_params.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = m * key_params[i] + (1.0 - m) * query_params[i];
  }
  return out;
}

Embedding RandomProjectionEncoder::embed(const ImageBuffer& patch) const {
  const auto& pixels = patch.data();
  Embedding out(dim_, 0.0);
  for (std::size_t d = 0; d < dim_; ++d) {
    const std::uint64_t row = mix64(seed_ ^ mix64(d));
    double acc = 0.0;
    for (std::size_t p = 0; p < pixels.size(); ++p) {
      const std::uint64_t bits = mix64(row + p);
      const double g = static_cast<double>(bits >> 11) * 0x1.0p-52 - 1.0;
      acc += g * pixels[p];
    }
    out[d] = acc;
  }
  if (norm(out) == 0.0) out[0] = 1.0;
  return l2_normalized(out);
}

}  // namespace degradekit
