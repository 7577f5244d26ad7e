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

#include "degradekit/insertion.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "degradekit/error.h"
#include "degradekit/random.h"

namespace degradekit {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void require_shape(const FeatureMap& f, const char* block) {
  if (f.channels < 1 || f.height < 1 || f.width < 1 ||
      f.values.size() != static_cast<std::size_t>(f.channels) * f.plane_size()) {
    throw DataError(std::string(block) + ": malformed feature map");
  }
}

void require_dims(bool ok, const char* block, const std::string& what) {
  if (!ok) throw DataError(std::string(block) + ": shape mismatch (" + what + ")");
}

void fill_uniform(std::vector<double>& v, Rng& rng) {
  for (double& x : v) x = uniform(rng, -0.1, 0.1);
}

void init(Dense& d, Rng& rng) {
  fill_uniform(d.weight, rng);
  fill_uniform(d.bias, rng);
}

void init(Conv3x3& c, Rng& rng) {
  fill_uniform(c.weight, rng);
  fill_uniform(c.bias, rng);
}

std::vector<double> relu(std::vector<double> x) {
  for (double& v : x) v = std::max(v, 0.0);
  return x;
}

// y = W^T g
std::vector<double> transpose_apply(const Dense& d, std::span<const double> g) {
  std::vector<double> out(static_cast<std::size_t>(d.in), 0.0);
  for (int o = 0; o < d.out; ++o) {
    const double go = g[o];
    if (go == 0.0) continue;
    const double* row = &d.weight[static_cast<std::size_t>(o) * d.in];
    for (int i = 0; i < d.in; ++i) out[i] += row[i] * go;
  }
  return out;
}

// Shared two-layer gate with its intermediate activations.
struct GateTrace {
  std::vector<double> z1;
  std::vector<double> hidden;
  std::vector<double> gate;
};

GateTrace run_gate(const Dense& fc1, const Dense& fc2, std::span<const double> u) {
  GateTrace t;
  t.z1 = fc1.apply(u);
  t.hidden = relu(t.z1);
  t.gate = fc2.apply(t.hidden);
  for (double& a : t.gate) a = sigmoid(a);
  return t;
}

// Gradient of the gate input given dL/dgate.
std::vector<double> gate_input_grad(const Dense& fc1, const Dense& fc2,
                                    const GateTrace& t,
                                    std::span<const double> grad_gate) {
  std::vector<double> dz2(t.gate.size());
  for (std::size_t c = 0; c < dz2.size(); ++c) {
    dz2[c] = grad_gate[c] * t.gate[c] * (1.0 - t.gate[c]);
  }
  std::vector<double> dz1 = transpose_apply(fc2, dz2);
  for (std::size_t k = 0; k < dz1.size(); ++k) {
    if (!(t.z1[k] > 0.0)) dz1[k] = 0.0;
  }
  return transpose_apply(fc1, dz1);
}

FeatureMap scale_channels(const FeatureMap& f, std::span<const double> a) {
  FeatureMap out = f;
  const std::size_t plane = f.plane_size();
  for (int c = 0; c < f.channels; ++c) {
    double* p = &out.values[c * plane];
    for (std::size_t i = 0; i < plane; ++i) p[i] *= a[c];
  }
  return out;
}

std::vector<double> channel_dots(const FeatureMap& f, const FeatureMap& g) {
  std::vector<double> out(static_cast<std::size_t>(f.channels), 0.0);
  const std::size_t plane = f.plane_size();
  for (int c = 0; c < f.channels; ++c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
      acc += f.values[c * plane + i] * g.values[c * plane + i];
    }
    out[c] = acc;
  }
  return out;
}

std::vector<double> pooled(const FeatureMap& f) {
  std::vector<double> g(static_cast<std::size_t>(f.channels), 0.0);
  const std::size_t plane = f.plane_size();
  for (int c = 0; c < f.channels; ++c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) acc += f.values[c * plane + i];
    g[c] = acc / static_cast<double>(plane);
  }
  return g;
}

std::vector<double> dgfmb_input(const FeatureMap& f, const MetaVector& v,
                                const DgfmbWeights& w, bool use_meta_fc) {
  std::vector<double> u = pooled(f);
  const std::vector<double> m = use_meta_fc ? w.meta_fc.apply(v) : v;
  u.insert(u.end(), m.begin(), m.end());
  return u;
}

void check_ma(const FeatureMap& f, const MetaVector& v, const MaWeights& w,
              const char* block) {
  require_shape(f, block);
  require_dims(w.fc1.in == static_cast<int>(v.size()), block,
               "meta vector length vs gate input");
  require_dims(w.fc2.in == w.fc1.out, block, "gate hidden width");
  require_dims(w.fc2.out == f.channels, block, "gate output vs channels");
}

void check_dgfmb(const FeatureMap& f, const MetaVector& v, const DgfmbWeights& w,
                 bool use_meta_fc) {
  constexpr const char* kBlock = "dgfmb_forward";
  require_shape(f, kBlock);
  const int m = static_cast<int>(v.size());
  if (use_meta_fc) {
    require_dims(w.meta_fc.in == m, kBlock, "meta FC input");
  }
  const int meta_out = use_meta_fc ? w.meta_fc.out : m;
  require_dims(w.fc1.in == f.channels + meta_out, kBlock, "fc1 input");
  require_dims(w.fc2.in == w.fc1.out, kBlock, "fc2 input");
  require_dims(w.fc2.out == f.channels, kBlock, "fc2 output vs channels");
}

// ---- JSON helpers ----

nlohmann::json tensor(std::vector<int> shape, const std::vector<double>& data) {
  return {{"shape", shape}, {"data", data}};
}

void put(nlohmann::json& tensors, const std::string& name, const Dense& d) {
  tensors[name + ".weight"] = tensor({d.out, d.in}, d.weight);
  tensors[name + ".bias"] = tensor({d.out}, d.bias);
}

void put(nlohmann::json& tensors, const std::string& name, const Conv3x3& c) {
  tensors[name + ".weight"] = tensor({c.out, c.in, 3, 3}, c.weight);
  tensors[name + ".bias"] = tensor({c.out}, c.bias);
}

std::vector<double> take(const nlohmann::json& tensors, const std::string& name,
                         const std::vector<int>& shape) {
  if (!tensors.contains(name)) throw DataError("weights: missing tensor " + name);
  const auto& t = tensors.at(name);
  const auto declared = t.at("shape").get<std::vector<int>>();
  if (declared != shape) {
    throw DataError("weights: tensor " + name + " has unexpected shape");
  }
  auto data = t.at("data").get<std::vector<double>>();
  std::size_t expected = 1;
  for (int s : shape) expected *= static_cast<std::size_t>(s);
  if (data.size() != expected) {
    throw DataError("weights: tensor " + name + " data length " +
                    std::to_string(data.size()) + " != " +
                    std::to_string(expected));
  }
  return data;
}

Dense take_dense(const nlohmann::json& tensors, const std::string& name, int out,
                 int in) {
  Dense d(out, in);
  d.weight = take(tensors, name + ".weight", {out, in});
  d.bias = take(tensors, name + ".bias", {out});
  return d;
}

Conv3x3 take_conv(const nlohmann::json& tensors, const std::string& name, int out,
                  int in) {
  Conv3x3 c(out, in);
  c.weight = take(tensors, name + ".weight", {out, in, 3, 3});
  c.bias = take(tensors, name + ".bias", {out});
  return c;
}

nlohmann::json header(const char* block, int meta_dim, int channels) {
  return {{"block", block},
          {"meta_dim", meta_dim},
          {"channels", channels},
          {"tensors", nlohmann::json::object()}};
}

template <typename F>
auto parse_block(const nlohmann::json& j, const char* block, F&& body) {
  try {
    if (j.at("block").get<std::string>() != block) {
      throw DataError(std::string("weights: expected block '") + block + "'");
    }
    const int m = j.at("meta_dim").get<int>();
    const int c = j.at("channels").get<int>();
    if (m < 1 || c < 1) throw DataError("weights: non-positive dimensions");
    return body(j.at("tensors"), m, c);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed block weights: ") + e.what());
  }
}

}  // namespace

FeatureMap::FeatureMap(int c, int h, int w, double fill)
    : channels(c), height(h), width(w) {
  if (c < 1 || h < 1 || w < 1) throw DataError("feature map dimensions must be positive");
  values.assign(static_cast<std::size_t>(c) * h * w, fill);
}

FeatureMap feature_map_from_image(const ImageBuffer& image) {
  FeatureMap f(ImageBuffer::kChannels, image.height(), image.width());
  for (int c = 0; c < f.channels; ++c) {
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) f.at(c, y, x) = image.at(y, x, c);
    }
  }
  return f;
}

Dense::Dense(int out_features, int in_features)
    : out(out_features),
      in(in_features),
      weight(static_cast<std::size_t>(out_features) * in_features, 0.0),
      bias(static_cast<std::size_t>(out_features), 0.0) {}

std::vector<double> Dense::apply(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != in) {
    throw DataError("dense layer expects " + std::to_string(in) +
                    " inputs, got " + std::to_string(x.size()));
  }
  std::vector<double> y(bias);
  for (int o = 0; o < out; ++o) {
    const double* row = &weight[static_cast<std::size_t>(o) * in];
    double acc = 0.0;
    for (int i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] += acc;
  }
  return y;
}

Conv3x3::Conv3x3(int out_channels, int in_channels)
    : out(out_channels),
      in(in_channels),
      weight(static_cast<std::size_t>(out_channels) * in_channels * 9, 0.0),
      bias(static_cast<std::size_t>(out_channels), 0.0) {}

FeatureMap Conv3x3::apply(const FeatureMap& x) const {
  if (x.channels != in) {
    throw DataError("conv3x3 expects " + std::to_string(in) +
                    " input channels, got " + std::to_string(x.channels));
  }
  FeatureMap y(out, x.height, x.width);
  std::vector<int> rows(static_cast<std::size_t>(x.height) + 2);
  std::vector<int> cols(static_cast<std::size_t>(x.width) + 2);
  for (int i = 0; i < x.height + 2; ++i) rows[i] = reflect101(i - 1, x.height);
  for (int i = 0; i < x.width + 2; ++i) cols[i] = reflect101(i - 1, x.width);
  for (int o = 0; o < out; ++o) {
    for (int yy = 0; yy < x.height; ++yy) {
      for (int xx = 0; xx < x.width; ++xx) {
        double acc = bias[o];
        for (int i = 0; i < in; ++i) {
          const double* k = &weight[(static_cast<std::size_t>(o) * in + i) * 9];
          for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
              acc += k[ky * 3 + kx] * x.at(i, rows[yy + ky], cols[xx + kx]);
            }
          }
        }
        y.at(o, yy, xx) = acc;
      }
    }
  }
  return y;
}

int gate_hidden_width(int meta_dim, int channels) {
  return std::max(meta_dim, channels / 8);
}

MaWeights make_ma_weights(int meta_dim, int channels, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const int hidden = gate_hidden_width(meta_dim, channels);
  MaWeights w{Dense(hidden, meta_dim), Dense(channels, hidden)};
  init(w.fc1, rng);
  init(w.fc2, rng);
  return w;
}

SftWeights make_sft_weights(int meta_dim, int channels, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  SftWeights w{Conv3x3(channels, channels + meta_dim), Conv3x3(channels, channels),
               Conv3x3(channels, channels + meta_dim), Conv3x3(channels, channels)};
  init(w.gamma1, rng);
  init(w.gamma2, rng);
  init(w.beta1, rng);
  init(w.beta2, rng);
  return w;
}

DaWeights make_da_weights(int meta_dim, int channels, std::uint64_t seed) {
  DaWeights w;
  w.gate = make_ma_weights(meta_dim, channels, seed);
  Rng rng = make_rng(substream(seed, "da.kernel"));
  w.kernel_fc = Dense(channels * 9, meta_dim);
  init(w.kernel_fc, rng);
  return w;
}

DgfmbWeights make_dgfmb_weights(int meta_dim, int channels, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const int hidden = gate_hidden_width(meta_dim, channels);
  DgfmbWeights w{Dense(meta_dim, meta_dim), Dense(hidden, channels + meta_dim),
                 Dense(channels, hidden)};
  init(w.meta_fc, rng);
  init(w.fc1, rng);
  init(w.fc2, rng);
  return w;
}

std::vector<double> ma_gate(const MetaVector& v, const MaWeights& w) {
  return run_gate(w.fc1, w.fc2, v).gate;
}

FeatureMap ma_forward(const FeatureMap& f, const MetaVector& v,
                      const MaWeights& w) {
  check_ma(f, v, w, "ma_forward");
  return scale_channels(f, ma_gate(v, w));
}

FeatureMap srmd_channels(const MetaVector& v, int height, int width) {
  if (v.empty()) throw DataError("srmd_channels: empty meta vector");
  FeatureMap out(static_cast<int>(v.size()), height, width);
  const std::size_t plane = out.plane_size();
  for (std::size_t m = 0; m < v.size(); ++m) {
    std::fill_n(out.values.begin() + static_cast<std::ptrdiff_t>(m * plane), plane,
                v[m]);
  }
  return out;
}

FeatureMap srmd_concat(const FeatureMap& image, const MetaVector& v) {
  require_shape(image, "srmd_concat");
  const FeatureMap planes = srmd_channels(v, image.height, image.width);
  FeatureMap out = image;
  out.channels += planes.channels;
  out.values.insert(out.values.end(), planes.values.begin(), planes.values.end());
  return out;
}

FeatureMap sft_forward(const FeatureMap& f, const MetaVector& v,
                       const SftWeights& w) {
  constexpr const char* kBlock = "sft_forward";
  require_shape(f, kBlock);
  const int s_channels = f.channels + static_cast<int>(v.size());
  require_dims(w.gamma1.in == s_channels && w.beta1.in == s_channels, kBlock,
               "first convolution input channels");
  require_dims(w.gamma2.out == f.channels && w.beta2.out == f.channels, kBlock,
               "output channels");
  const FeatureMap s = srmd_concat(f, v);
  auto pathway = [&s](const Conv3x3& first, const Conv3x3& second) {
    FeatureMap h = first.apply(s);
    for (double& x : h.values) x = std::max(x, 0.0);
    return second.apply(h);
  };
  const FeatureMap gamma = pathway(w.gamma1, w.gamma2);
  const FeatureMap beta = pathway(w.beta1, w.beta2);
  FeatureMap out = f;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = f.values[i] * gamma.values[i] + beta.values[i];
  }
  return out;
}

FeatureMap da_forward(const FeatureMap& f, const MetaVector& v,
                      const DaWeights& w) {
  constexpr const char* kBlock = "da_forward";
  check_ma(f, v, w.gate, kBlock);
  require_dims(w.kernel_fc.in == static_cast<int>(v.size()) &&
                   w.kernel_fc.out == f.channels * 9,
               kBlock, "kernel FC");
  FeatureMap out = scale_channels(f, ma_gate(v, w.gate));
  const std::vector<double> kernels = w.kernel_fc.apply(v);
  std::vector<int> rows(static_cast<std::size_t>(f.height) + 2);
  std::vector<int> cols(static_cast<std::size_t>(f.width) + 2);
  for (int i = 0; i < f.height + 2; ++i) rows[i] = reflect101(i - 1, f.height);
  for (int i = 0; i < f.width + 2; ++i) cols[i] = reflect101(i - 1, f.width);
  for (int c = 0; c < f.channels; ++c) {
    const double* k = &kernels[static_cast<std::size_t>(c) * 9];
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) {
        double acc = 0.0;
        for (int ky = 0; ky < 3; ++ky) {
          for (int kx = 0; kx < 3; ++kx) {
            acc += k[ky * 3 + kx] * f.at(c, rows[y + ky], cols[x + kx]);
          }
        }
        out.at(c, y, x) += acc;
      }
    }
  }
  return out;
}

FeatureMap dgfmb_forward(const FeatureMap& f, const MetaVector& v,
                         const DgfmbWeights& w, bool use_meta_fc) {
  check_dgfmb(f, v, w, use_meta_fc);
  const auto u = dgfmb_input(f, v, w, use_meta_fc);
  return scale_channels(f, run_gate(w.fc1, w.fc2, u).gate);
}

BlockGradients ma_backward(const FeatureMap& f, const MetaVector& v,
                           const MaWeights& w, const FeatureMap& grad_out) {
  check_ma(f, v, w, "ma_backward");
  require_dims(grad_out.same_shape(f), "ma_backward", "upstream gradient");
  const GateTrace t = run_gate(w.fc1, w.fc2, v);
  BlockGradients g;
  g.grad_f = scale_channels(grad_out, t.gate);
  g.grad_v = gate_input_grad(w.fc1, w.fc2, t, channel_dots(f, grad_out));
  return g;
}

BlockGradients dgfmb_backward(const FeatureMap& f, const MetaVector& v,
                              const DgfmbWeights& w, bool use_meta_fc,
                              const FeatureMap& grad_out) {
  check_dgfmb(f, v, w, use_meta_fc);
  require_dims(grad_out.same_shape(f), "dgfmb_backward", "upstream gradient");
  const auto u = dgfmb_input(f, v, w, use_meta_fc);
  const GateTrace t = run_gate(w.fc1, w.fc2, u);
  const std::vector<double> du =
      gate_input_grad(w.fc1, w.fc2, t, channel_dots(f, grad_out));

  BlockGradients g;
  g.grad_f = scale_channels(grad_out, t.gate);
  const double inv_area = 1.0 / static_cast<double>(f.plane_size());
  const std::size_t plane = f.plane_size();
  for (int c = 0; c < f.channels; ++c) {
    const double add = du[c] * inv_area;
    for (std::size_t i = 0; i < plane; ++i) g.grad_f.values[c * plane + i] += add;
  }
  const std::vector<double> dm(du.begin() + f.channels, du.end());
  g.grad_v = use_meta_fc ? transpose_apply(w.meta_fc, dm) : dm;
  return g;
}

std::vector<MetaVector> broadcast_meta(const MetaVector& v, int points) {
  if (points < 1) throw DataError("broadcast_meta: need at least one point");
  return std::vector<MetaVector>(static_cast<std::size_t>(points), v);
}

nlohmann::json to_json(const MaWeights& w) {
  nlohmann::json j = header("ma", w.fc1.in, w.fc2.out);
  put(j["tensors"], "fc1", w.fc1);
  put(j["tensors"], "fc2", w.fc2);
  return j;
}

nlohmann::json to_json(const SftWeights& w) {
  nlohmann::json j = header("sft", w.gamma1.in - w.gamma2.out, w.gamma2.out);
  put(j["tensors"], "gamma1", w.gamma1);
  put(j["tensors"], "gamma2", w.gamma2);
  put(j["tensors"], "beta1", w.beta1);
  put(j["tensors"], "beta2", w.beta2);
  return j;
}

nlohmann::json to_json(const DaWeights& w) {
  nlohmann::json j = header("da", w.gate.fc1.in, w.gate.fc2.out);
  put(j["tensors"], "gate.fc1", w.gate.fc1);
  put(j["tensors"], "gate.fc2", w.gate.fc2);
  put(j["tensors"], "kernel_fc", w.kernel_fc);
  return j;
}

nlohmann::json to_json(const DgfmbWeights& w) {
  nlohmann::json j = header("dgfmb", w.meta_fc.in, w.fc2.out);
  put(j["tensors"], "meta_fc", w.meta_fc);
  put(j["tensors"], "fc1", w.fc1);
  put(j["tensors"], "fc2", w.fc2);
  return j;
}

MaWeights ma_weights_from_json(const nlohmann::json& j) {
  return parse_block(j, "ma", [](const nlohmann::json& t, int m, int c) {
    const int h = gate_hidden_width(m, c);
    return MaWeights{take_dense(t, "fc1", h, m), take_dense(t, "fc2", c, h)};
  });
}

SftWeights sft_weights_from_json(const nlohmann::json& j) {
  return parse_block(j, "sft", [](const nlohmann::json& t, int m, int c) {
    return SftWeights{take_conv(t, "gamma1", c, c + m), take_conv(t, "gamma2", c, c),
                      take_conv(t, "beta1", c, c + m), take_conv(t, "beta2", c, c)};
  });
}

DaWeights da_weights_from_json(const nlohmann::json& j) {
  return parse_block(j, "da", [](const nlohmann::json& t, int m, int c) {
    const int h = gate_hidden_width(m, c);
    DaWeights w;
    w.gate = MaWeights{take_dense(t, "gate.fc1", h, m),
                       take_dense(t, "gate.fc2", c, h)};
    w.kernel_fc = take_dense(t, "kernel_fc", c * 9, m);
    return w;
  });
}

DgfmbWeights dgfmb_weights_from_json(const nlohmann::json& j) {
  return parse_block(j, "dgfmb", [](const nlohmann::json& t, int m, int c) {
    const int h = gate_hidden_width(m, c);
    return DgfmbWeights{take_dense(t, "meta_fc", m, m),
                        take_dense(t, "fc1", h, c + m), take_dense(t, "fc2", c, h)};
  });
}

}  // namespace degradekit
