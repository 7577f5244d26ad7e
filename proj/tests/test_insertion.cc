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
#include <functional>
#include <vector>

#include "doctest.h"
#include "degradekit/error.h"
#include "degradekit/insertion.h"
#include "degradekit/random.h"
#include "oracles.h"

namespace dk = degradekit;
using Vec = std::vector<double>;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vec dense(const dk::Dense& d, const Vec& x) {
  Vec y(d.out);
  for (int o = 0; o < d.out; ++o) {
    y[o] = d.bias[o];
    for (int i = 0; i < d.in; ++i) y[o] += d.weight[o * d.in + i] * x[i];
  }
  return y;
}

Vec gate(const dk::Dense& fc1, const dk::Dense& fc2, const Vec& u) {
  Vec h = dense(fc1, u);
  for (double& x : h) x = x > 0 ? x : 0;
  Vec a = dense(fc2, h);
  for (double& x : a) x = sig(x);
  return a;
}

dk::FeatureMap conv(const dk::Conv3x3& c, const dk::FeatureMap& x) {
  dk::FeatureMap y(c.out, x.height, x.width);
  for (int o = 0; o < c.out; ++o)
    for (int yy = 0; yy < x.height; ++yy)
      for (int xx = 0; xx < x.width; ++xx) {
        double acc = c.bias[o];
        for (int i = 0; i < c.in; ++i)
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx)
              acc += c.weight[((o * c.in + i) * 3 + dy + 1) * 3 + dx + 1] *
                     x.at(i, oracle::fold(yy + dy, x.height), oracle::fold(xx + dx, x.width));
        y.at(o, yy, xx) = acc;
      }
  return y;
}

dk::FeatureMap random_map(dk::Rng& rng, int c, int h, int w) {
  dk::FeatureMap f(c, h, w);
  for (double& x : f.values) x = dk::uniform(rng, -1, 1);
  return f;
}

Vec random_vec(dk::Rng& rng, int n) {
  Vec v(n);
  for (double& x : v) x = dk::uniform(rng, 0, 1);
  return v;
}

double max_abs_diff(const dk::FeatureMap& a, const dk::FeatureMap& b) {
  REQUIRE(a.same_shape(b));
  double m = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

double rel_err(const Vec& a, const Vec& b) {
  double diff = 0, scale = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return scale < 1e-8 ? diff : diff / scale;
}

double inner(const dk::FeatureMap& a, const dk::FeatureMap& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
  return s;
}

Vec fd(const std::function<double(const Vec&)>& f, Vec x) {
  const double h = 1e-5;
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_SUITE("insertion") {

TEST_CASE("gate widths and deterministic weights") {
  CHECK(dk::gate_hidden_width(15, 64) == 15);
  CHECK(dk::gate_hidden_width(1, 64) == 8);
  CHECK(dk::gate_hidden_width(10, 256) == 32);
  const auto a = dk::make_ma_weights(15, 16, 3), b = dk::make_ma_weights(15, 16, 3);
  CHECK(a.fc1.weight == b.fc1.weight);
  CHECK(a.fc2.bias == b.fc2.bias);
  CHECK(dk::make_ma_weights(15, 16, 4).fc1.weight != a.fc1.weight);
  for (double w : a.fc1.weight) REQUIRE(std::abs(w) <= 0.1);
  CHECK(a.fc1.out == 15);
  CHECK(a.fc1.in == 15);
  CHECK(a.fc2.out == 16);
}

TEST_CASE("meta-attention matches direct evaluation") {
  dk::Rng rng = dk::make_rng(31);
  for (int m : {1, 10, 15}) {
    const int c = 12;
    const auto w = dk::make_ma_weights(m, c, 7 + m);
    const auto f = random_map(rng, c, 5, 6);
    const auto v = random_vec(rng, m);
    const Vec a = gate(w.fc1, w.fc2, v);
    CHECK(rel_err(dk::ma_gate(v, w), a) < 1e-14);
    const auto out = dk::ma_forward(f, v, w);
    dk::FeatureMap expect = f;
    for (int ch = 0; ch < c; ++ch)
      for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 6; ++x) expect.at(ch, y, x) = a[ch] * f.at(ch, y, x);
    CHECK(max_abs_diff(out, expect) < 1e-14);
    for (double g : a) {
      CHECK(g > 0.0);
      CHECK(g < 1.0);
    }
  }
}

TEST_CASE("SRMD-style concatenation") {
  dk::Rng rng = dk::make_rng(32);
  const auto img = random_map(rng, 3, 4, 5);
  const Vec v = {0.1, 0.7};
  const auto s = dk::srmd_concat(img, v);
  CHECK(s.channels == 5);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) {
      for (int c = 0; c < 3; ++c) REQUIRE(s.at(c, y, x) == img.at(c, y, x));
      REQUIRE(s.at(3, y, x) == 0.1);
      REQUIRE(s.at(4, y, x) == 0.7);
    }
  const auto planes = dk::srmd_channels(v, 2, 3);
  CHECK(planes.channels == 2);
  CHECK(planes.at(1, 1, 2) == 0.7);

  const auto fm = dk::feature_map_from_image(oracle::test_image(4, 3, 2));
  CHECK(fm.channels == 3);
  CHECK(fm.at(2, 3, 1) == oracle::test_image(4, 3, 2).at(3, 1, 2));
}

TEST_CASE("convolution and dense layers against naive loops") {
  dk::Rng rng = dk::make_rng(33);
  dk::Conv3x3 c(4, 3);
  for (double& x : c.weight) x = dk::uniform(rng, -1, 1);
  for (double& x : c.bias) x = dk::uniform(rng, -1, 1);
  const auto f = random_map(rng, 3, 6, 7);
  CHECK(max_abs_diff(c.apply(f), conv(c, f)) < 1e-13);
  const auto one = random_map(rng, 3, 1, 1);
  CHECK(max_abs_diff(c.apply(one), conv(c, one)) < 1e-13);
  dk::Dense d(5, 3);
  for (double& x : d.weight) x = dk::uniform(rng, -1, 1);
  for (double& x : d.bias) x = dk::uniform(rng, -1, 1);
  const Vec x = random_vec(rng, 3);
  CHECK(rel_err(d.apply(x), dense(d, x)) < 1e-15);
  CHECK_THROWS_AS(d.apply(Vec(4)), dk::DataError);
}

TEST_CASE("SFT modulation") {
  dk::Rng rng = dk::make_rng(34);
  const int c = 6, m = 4;
  const auto w = dk::make_sft_weights(m, c, 9);
  const auto f = random_map(rng, c, 5, 5);
  const auto v = random_vec(rng, m);
  auto path = [&](const dk::Conv3x3& a, const dk::Conv3x3& b) {
    auto h = conv(a, dk::srmd_concat(f, v));
    for (double& x : h.values) x = std::max(x, 0.0);
    return conv(b, h);
  };
  const auto gamma = path(w.gamma1, w.gamma2), beta = path(w.beta1, w.beta2);
  dk::FeatureMap expect = f;
  for (std::size_t i = 0; i < f.values.size(); ++i) expect.values[i] = f.values[i] * gamma.values[i] + beta.values[i];
  CHECK(max_abs_diff(dk::sft_forward(f, v, w), expect) < 1e-13);
}

TEST_CASE("degradation-aware block") {
  dk::Rng rng = dk::make_rng(35);
  const int c = 5, m = 3;
  const auto w = dk::make_da_weights(m, c, 10);
  const auto f = random_map(rng, c, 4, 6);
  const auto v = random_vec(rng, m);
  const Vec a = gate(w.gate.fc1, w.gate.fc2, v);
  const Vec k = dense(w.kernel_fc, v);
  dk::FeatureMap expect(c, 4, 6);
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 6; ++x) {
        double acc = a[ch] * f.at(ch, y, x);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
            acc += k[ch * 9 + (dy + 1) * 3 + dx + 1] * f.at(ch, oracle::fold(y + dy, 4), oracle::fold(x + dx, 6));
        expect.at(ch, y, x) = acc;
      }
  CHECK(max_abs_diff(dk::da_forward(f, v, w), expect) < 1e-13);
}

TEST_CASE("DGFMB combines pooled features and metadata") {
  dk::Rng rng = dk::make_rng(36);
  const int c = 8, m = 5;
  const auto w = dk::make_dgfmb_weights(m, c, 11);
  const auto f = random_map(rng, c, 4, 4);
  const auto v = random_vec(rng, m);
  for (bool use_fc : {false, true}) {
    Vec u(c);
    for (int ch = 0; ch < c; ++ch) {
      double s = 0;
      for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) s += f.at(ch, y, x);
      u[ch] = s / 16.0;
    }
    const Vec meta = use_fc ? dense(w.meta_fc, v) : v;
    u.insert(u.end(), meta.begin(), meta.end());
    const Vec a = gate(w.fc1, w.fc2, u);
    dk::FeatureMap expect = f;
    for (int ch = 0; ch < c; ++ch)
      for (int i = 0; i < 16; ++i) expect.values[ch * 16 + i] *= a[ch];
    CHECK(max_abs_diff(dk::dgfmb_forward(f, v, w, use_fc), expect) < 1e-14);
  }
}

TEST_CASE("block gradients match central differences") {
  dk::Rng rng = dk::make_rng(37);
  const int c = 6, m = 4, h = 3, wd = 4;
  const auto f = random_map(rng, c, h, wd);
  const auto v = random_vec(rng, m);
  const auto up = random_map(rng, c, h, wd);
  auto check = [&](const dk::BlockGradients& g, const std::function<dk::FeatureMap(const dk::FeatureMap&, const Vec&)>& fwd) {
    const Vec gv = fd([&](const Vec& x) { return inner(fwd(f, x), up); }, v);
    CHECK(rel_err(g.grad_v, gv) < 1e-6);
    const Vec gf = fd(
        [&](const Vec& x) {
          dk::FeatureMap ff = f;
          ff.values = x;
          return inner(fwd(ff, v), up);
        },
        f.values);
    CHECK(rel_err(g.grad_f.values, gf) < 1e-6);
  };
  const auto ma = dk::make_ma_weights(m, c, 12);
  check(dk::ma_backward(f, v, ma, up),
        [&](const dk::FeatureMap& ff, const Vec& x) { return dk::ma_forward(ff, x, ma); });
  const auto dg = dk::make_dgfmb_weights(m, c, 13);
  for (bool use_fc : {false, true}) {
    check(dk::dgfmb_backward(f, v, dg, use_fc, up),
          [&](const dk::FeatureMap& ff, const Vec& x) { return dk::dgfmb_forward(ff, x, dg, use_fc); });
  }
}

TEST_CASE("shape errors") {
  dk::Rng rng = dk::make_rng(38);
  const auto f = random_map(rng, 4, 3, 3);
  const auto ma = dk::make_ma_weights(3, 4, 1);
  CHECK_THROWS_AS(dk::ma_forward(f, Vec(2), ma), dk::DataError);
  CHECK_THROWS_AS(dk::ma_forward(random_map(rng, 5, 3, 3), Vec(3), ma), dk::DataError);
  CHECK_THROWS_AS(dk::ma_backward(f, Vec(3), ma, random_map(rng, 4, 2, 3)), dk::DataError);
  CHECK_THROWS_AS(dk::sft_forward(f, Vec(2), dk::make_sft_weights(3, 4, 1)), dk::DataError);
  CHECK_THROWS_AS(dk::da_forward(f, Vec(2), dk::make_da_weights(3, 4, 1)), dk::DataError);
  CHECK_THROWS_AS(dk::dgfmb_forward(f, Vec(2), dk::make_dgfmb_weights(3, 4, 1), true), dk::DataError);
  CHECK_THROWS_AS(dk::ma_forward(dk::FeatureMap(), Vec(3), ma), dk::DataError);
}

TEST_CASE("broadcast to every insertion point") {
  const auto all = dk::broadcast_meta({0.25, 0.5}, 6);
  CHECK(all.size() == 6);
  for (const auto& v : all) CHECK(v == Vec{0.25, 0.5});
  CHECK_THROWS_AS(dk::broadcast_meta({0.1}, 0), dk::DataError);
}

TEST_CASE("weight JSON round trips and rejects bad shapes") {
  const auto ma = dk::make_ma_weights(4, 8, 1);
  const auto ma2 = dk::ma_weights_from_json(dk::to_json(ma));
  CHECK(ma2.fc1.weight == ma.fc1.weight);
  CHECK(ma2.fc2.bias == ma.fc2.bias);
  const auto sft = dk::make_sft_weights(2, 3, 1);
  CHECK(dk::sft_weights_from_json(dk::to_json(sft)).beta2.weight == sft.beta2.weight);
  const auto da = dk::make_da_weights(2, 3, 1);
  CHECK(dk::da_weights_from_json(dk::to_json(da)).kernel_fc.weight == da.kernel_fc.weight);
  const auto dg = dk::make_dgfmb_weights(2, 3, 1);
  CHECK(dk::dgfmb_weights_from_json(dk::to_json(dg)).meta_fc.weight == dg.meta_fc.weight);

  auto j = dk::to_json(ma);
  j["tensors"]["fc1.weight"]["data"].erase(0);
  CHECK_THROWS_AS(dk::ma_weights_from_json(j), dk::DataError);
  auto k = dk::to_json(ma);
  k["block"] = "sft";
  CHECK_THROWS_AS(dk::ma_weights_from_json(k), dk::DataError);
  auto s = dk::to_json(ma);
  s["tensors"]["fc2.weight"]["shape"] = {3, 3};
  CHECK_THROWS_AS(dk::ma_weights_from_json(s), dk::DataError);
}

}  // TEST_SUITE
