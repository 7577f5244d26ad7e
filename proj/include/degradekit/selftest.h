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

#ifndef DEGRADEKIT_SELFTEST_H_
#define DEGRADEKIT_SELFTEST_H_

#include <cstdint>

#include "json.hpp"

namespace degradekit {

// Runs the loss-oracle, gradient, kernel and noise-statistics suites.
// Report: {"suites": [{"name", "checks", "failures": [...]}], "checks",
// "failures", "passed"}.
nlohmann::json run_selftest(std::uint64_t seed = 0);

}  // namespace degradekit

#endif  // DEGRADEKIT_SELFTEST_H_
