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

#include "degradekit/selftest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "degradekit/contrastive.h"
#include "degradekit/degrade.h"
#include "degradekit/insertion.h"
#include "degradekit/kernels.h"
#include "degradekit/random.h"

namespace degradekit {
namespace {

class Suite {
 public:
  explicit Suite(std::string name) : name_(std::move(name)) {}

  void check(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) failures_.push_back(what);
  }

  // Runs `body`, turning an exception into a failure.
  void guard(const std::string& what, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      check(false, what + ": " + e.what());
    }
  }

  nlohmann::json report() const {
    return {{"name", name_}, {"checks", checks_}, {"failures", failures_}};
  }
  std::size_t failure_count() const { return failures_.size(); }
  std::size_t check_count() const { return checks_; }

 private:
  std::string name_;
  std::size_t checks_ = 0;
  std::vector<std::string> failures_;
};

Embedding random_vector(Rng& rng, std::size_t dim) {
  Embedding v(dim);
  for (double& x : v) x = normal(rng, 0.0, 1.0);
  return v;
}

struct Instance {
  std::vector<Embedding> queries;
  std::vector<std::vector<Embedding>> positives;
  std::vector<std::int64_t> labels;
  std::vector<std::vector<double>> weights;
  NegativeQueue queue{16};
  double tau = 0.07;
};

Instance random_instance(Rng& rng) {
  Instance in;
  const std::size_t dim = static_cast<std::size_t>(uniform_int(rng, 2, 8));
  const int batch = uniform_int(rng, 1, 4);
  const int queue_len = uniform_int(rng, 0, 16);
  in.tau = uniform(rng, 0.05, 1.0);
  for (int j = 0; j < queue_len; ++j) {
    in.queue.push(QueueEntry{l2_normalized(random_vector(rng, dim)),
                             uniform_int(rng, 0, 2), std::nullopt});
  }
  for (int i = 0; i < batch; ++i) {
    in.queries.push_back(random_vector(rng, dim));
    std::vector<Embedding> pos;
    const int p = uniform_int(rng, 1, 4);
    for (int l = 0; l < p; ++l) pos.push_back(random_vector(rng, dim));
    in.positives.push_back(std::move(pos));
    in.labels.push_back(uniform_int(rng, 0, 2));
    std::vector<double> w(static_cast<std::size_t>(queue_len));
    for (double& x : w) x = uniform(rng, 0.0, 1.0);
    in.weights.push_back(std::move(w));
  }
  return in;
}

double cosine(const Embedding& a, const Embedding& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    ab += a[d] * b[d];
    aa += a[d] * a[d];
    bb += b[d] * b[d];
  }
  return ab / std::sqrt(aa * bb);
}

// Plain exp/log transcription. kind: 0 single positive, 1 multi, 2 labels,
// 3 weights.
double direct_loss(const Instance& in, int kind) {
  double total = 0.0;
  const double batch = static_cast<double>(in.queries.size());
  for (std::size_t i = 0; i < in.queries.size(); ++i) {
    const auto& q = in.queries[i];
    const std::size_t p = kind == 0 ? 1 : in.positives[i].size();
    double pos = 0.0;
    for (std::size_t l = 0; l < p; ++l) {
      pos += std::exp(cosine(q, in.positives[i][l]) / in.tau);
    }
    double num = pos, den = pos;
    double divisor = kind == 0 ? 1.0 : static_cast<double>(p);
    for (std::size_t j = 0; j < in.queue.size(); ++j) {
      const double e = std::exp(cosine(q, in.queue[j].embedding) / in.tau);
      const double w = kind == 3 ? in.weights[i][j] : 1.0;
      den += w * e;
      if (kind == 2 && *in.queue[j].label == in.labels[i]) {
        num += e;
        divisor += 1.0;
      }
    }
    total += -std::log(num / den) / (batch * divisor);
  }
  return total;
}

LossResult library_loss(const Instance& in, int kind) {
  switch (kind) {
    case 0: {
      std::vector<Embedding> first;
      for (const auto& set : in.positives) first.push_back(set.front());
      return moco_loss_grad(in.queries, first, in.queue, in.tau);
    }
    case 1:
      return moco_multi_loss_grad(in.queries, in.positives, in.queue, in.tau);
    case 2:
      return supmoco_loss_grad(in.queries, in.positives, in.labels, in.queue,
                               in.tau);
    default:
      return weakcon_loss_grad(in.queries, in.positives, in.weights, in.queue,
                               in.tau);
  }
}

const char* kLossNames[] = {"moco", "moco_multi", "supmoco", "weakcon"};

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return scale < 1e-8 ? diff : diff / scale;
}

void loss_suite(Suite& suite, Rng& rng) {
  for (int n = 0; n < 200; ++n) {
    const Instance in = random_instance(rng);
    for (int kind = 0; kind < 4; ++kind) {
      suite.guard(kLossNames[kind], [&] {
        const double got = library_loss(in, kind).value;
        const double want = direct_loss(in, kind);
        suite.check(std::abs(got - want) <= 1e-12 && got >= 0.0,
                    std::string(kLossNames[kind]) + " instance " +
                        std::to_string(n) + ": " + std::to_string(got) +
                        " vs " + std::to_string(want));
      });
    }
  }
}

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x) {
  constexpr double h = 1e-5;
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double feature_objective(const FeatureMap& out, const FeatureMap& upstream) {
  double acc = 0.0;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    acc += out.values[i] * upstream.values[i];
  }
  return acc;
}

void gradient_suite(Suite& suite, Rng& rng) {
  for (int n = 0; n < 20; ++n) {
    const Instance in = random_instance(rng);
    for (int kind = 0; kind < 4; ++kind) {
      suite.guard(kLossNames[kind], [&] {
        const LossResult analytic = library_loss(in, kind);
        for (std::size_t i = 0; i < in.queries.size(); ++i) {
          auto f = [&](const std::vector<double>& qi) {
            Instance shifted = in;
            shifted.queries[i] = qi;
            return library_loss(shifted, kind).value;
          };
          const double err =
              relative_error(analytic.query_grad[i], numeric_gradient(f, in.queries[i]));
          suite.check(err < 1e-4, std::string(kLossNames[kind]) + " gradient " +
                                      std::to_string(n) + ": " + std::to_string(err));
        }
      });
    }
  }

  for (int n = 0; n < 10; ++n) {
    const int channels = uniform_int(rng, 1, 6);
    const int meta = uniform_int(rng, 1, 5);
    FeatureMap f(channels, uniform_int(rng, 2, 5), uniform_int(rng, 2, 5));
    FeatureMap up = f;
    for (double& v : f.values) v = normal(rng, 0.0, 1.0);
    for (double& v : up.values) v = normal(rng, 0.0, 1.0);
    MetaVector v(static_cast<std::size_t>(meta));
    for (double& x : v) x = uniform(rng, 0.0, 1.0);
    const std::uint64_t seed = rng();

    suite.guard("ma gradient", [&] {
      const MaWeights w = make_ma_weights(meta, channels, seed);
      const BlockGradients g = ma_backward(f, v, w, up);
      auto by_v = [&](const std::vector<double>& x) {
        return feature_objective(ma_forward(f, x, w), up);
      };
      auto by_f = [&](const std::vector<double>& x) {
        FeatureMap g2 = f;
        g2.values = x;
        return feature_objective(ma_forward(g2, v, w), up);
      };
      suite.check(relative_error(g.grad_v, numeric_gradient(by_v, v)) < 1e-4,
                  "ma meta gradient " + std::to_string(n));
      suite.check(relative_error(g.grad_f.values, numeric_gradient(by_f, f.values)) < 1e-4,
                  "ma feature gradient " + std::to_string(n));
    });
    for (bool use_fc : {false, true}) {
      suite.guard("dgfmb gradient", [&] {
        const DgfmbWeights w = make_dgfmb_weights(meta, channels, seed);
        const BlockGradients g = dgfmb_backward(f, v, w, use_fc, up);
        auto by_v = [&](const std::vector<double>& x) {
          return feature_objective(dgfmb_forward(f, x, w, use_fc), up);
        };
        auto by_f = [&](const std::vector<double>& x) {
          FeatureMap g2 = f;
          g2.values = x;
          return feature_objective(dgfmb_forward(g2, v, w, use_fc), up);
        };
        const std::string tag = std::to_string(n) + (use_fc ? " (meta fc)" : "");
        suite.check(relative_error(g.grad_v, numeric_gradient(by_v, v)) < 1e-4,
                    "dgfmb meta gradient " + tag);
        suite.check(
            relative_error(g.grad_f.values, numeric_gradient(by_f, f.values)) < 1e-4,
            "dgfmb feature gradient " + tag);
      });
    }
  }
}

void kernel_suite(Suite& suite, Rng& rng) {
  for (KernelShape shape : kAllKernelShapes) {
    const std::string name(to_string(shape));
    for (int n = 0; n < 30; ++n) {
      BlurKernelSpec spec;
      do {
        spec = sample_kernel_spec(rng, Pipeline::kComplex);
      } while (spec.shape != shape);
      suite.guard(name, [&] {
        const Kernel2D k = synthesize_kernel(spec);
        suite.check(std::abs(k.sum() - 1.0) <= 1e-6, name + " sum");
        suite.check(std::all_of(k.weights.begin(), k.weights.end(),
                                [](double w) { return w >= 0.0; }),
                    name + " non-negative");
        double asym = 0.0;
        const std::size_t total = k.weights.size();
        for (std::size_t i = 0; i < total; ++i) {
          asym = std::max(asym, std::abs(k.weights[i] - k.weights[total - 1 - i]));
        }
        suite.check(asym <= 1e-10, name + " point symmetry");
        if (!is_anisotropic(shape)) {
          BlurKernelSpec turned = spec;
          turned.theta = uniform(rng, -std::numbers::pi, std::numbers::pi);
          const Kernel2D k2 = synthesize_kernel(turned);
          double diff = 0.0;
          for (std::size_t i = 0; i < total; ++i) {
            diff = std::max(diff, std::abs(k.weights[i] - k2.weights[i]));
          }
          suite.check(diff < 1e-12, name + " theta invariance");
        }
      });
    }
  }
}

void noise_suite(Suite& suite, Rng& rng) {
  suite.guard("gaussian std", [&] {
    const ImageBuffer flat(256, 256, 0.5);
    const ImageBuffer noisy = add_gaussian_noise(flat, 20.0, false, rng);
    double sum = 0.0, sq = 0.0;
    for (double v : noisy.data()) {
      sum += v - 0.5;
      sq += (v - 0.5) * (v - 0.5);
    }
    const double n = static_cast<double>(noisy.size());
    const double std = std::sqrt(sq / n - (sum / n) * (sum / n)) * 255.0;
    suite.check(std::abs(std / 20.0 - 1.0) < 0.02,
                "gaussian sigma 20 empirical std " + std::to_string(std));
  });
  suite.guard("grey planes", [&] {
    ImageBuffer img(64, 64);
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        const double v = uniform(rng, 0.2, 0.8);
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = v;
      }
    }
    for (int kind = 0; kind < 2; ++kind) {
      const ImageBuffer noisy = kind == 0 ? add_gaussian_noise(img, 10.0, true, rng)
                                          : add_poisson_noise(img, 1.0, true, rng);
      bool same = noisy != img;
      for (int y = 0; y < img.height() && same; ++y) {
        for (int x = 0; x < img.width(); ++x) {
          for (int c = 1; c < 3; ++c) {
            if (noisy.at(y, x, c) != noisy.at(y, x, 0)) same = false;
          }
        }
      }
      suite.check(same, kind == 0 ? "grey gaussian noise shared across channels"
                                  : "grey poisson noise shared across channels");
    }
  });
  suite.guard("poisson black", [&] {
    const ImageBuffer black(32, 32, 0.0);
    suite.check(add_poisson_noise(black, 3.0, false, rng) == black,
                "poisson noise leaves a black image unchanged");
  });
}

}  // namespace

nlohmann::json run_selftest(std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<Suite> suites = {Suite("loss_oracle"), Suite("gradient"),
                               Suite("kernel"), Suite("noise_statistics")};
  loss_suite(suites[0], rng);
  gradient_suite(suites[1], rng);
  kernel_suite(suites[2], rng);
  noise_suite(suites[3], rng);

  nlohmann::json report;
  std::size_t checks = 0, failures = 0;
  report["suites"] = nlohmann::json::array();
  for (const Suite& s : suites) {
    report["suites"].push_back(s.report());
    checks += s.check_count();
    failures += s.failure_count();
  }
  report["checks"] = checks;
  report["failures"] = failures;
  report["passed"] = failures == 0;
  return report;
}

}  // namespace degradekit
