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

#ifndef DEGRADEKIT_RANDOM_H_
#define DEGRADEKIT_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace degradekit {

// All stochastic stages draw from this engine. Streams are always created
// from an explicit seed; nothing in the library touches global RNG state.
using Rng = std::mt19937_64;

std::uint64_t fnv1a64(std::string_view bytes);

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Seed of the stream for one synthesized image. Independent of scheduling.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view source_id,
                          std::uint64_t replica);

// Named sub-stream of a seed, so that e.g. parameter sampling and noise
// generation never share draws.
std::uint64_t substream(std::uint64_t seed, std::string_view tag);

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

double uniform(Rng& rng, double lo, double hi);
int uniform_int(Rng& rng, int lo, int hi);  // inclusive
bool bernoulli(Rng& rng, double p);
double normal(Rng& rng, double mean, double stddev);

}  // namespace degradekit

#endif  // DEGRADEKIT_RANDOM_H_
