// Copyright (c) 2026 DoGCLR Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dogclr/error.hpp"
#include "dogclr/kernels/kernels.hpp"
#include "dogclr/rng.hpp"
#include "dogclr/skeleton.hpp"
#include "dogclr/tensor.hpp"

namespace dogclr {

// Compact spatio-temporal graph-convolutional encoder plus projection head.
// Each stage is: graph conv (channel mix, then symmetric-normalized adjacency
// aggregation) -> ReLU -> temporal conv (stride 1, same padding) -> ReLU, so
// every stage keeps the (T, V) axes. The feature stage selected by the config
// supplies h for the discrepancy gradient; the projection output is always
// L2-normalized.
//
// The whole model is templated on the scalar type: float for training,
// double for the finite-difference gradient oracle.

struct StageSpec {
  std::size_t channels = 16;
  std::size_t temporal_kernel = 3;  // odd
};

struct EncoderConfig {
  std::size_t in_channels = 3;
  std::vector<StageSpec> stages;
  std::size_t embedding_dim = 256;
  // Stage whose output is the key feature h: -1 means the last stage (the
  // raw input when no stages exist, i.e. the identity configuration).
  int feature_stage = -1;
  enum class Pool { average, flatten } pool = Pool::average;
  enum class Projection { mlp, identity } projection = Projection::mlp;

  /// 2 stages of width 16; used throughout the tests.
  static EncoderConfig tiny(std::size_t embedding_dim = 64);
  /// 3-stage default backbone.
  static EncoderConfig small(std::size_t embedding_dim = 256);
  /// No stages, flatten pool, identity projection: h = x and the raw
  /// embedding is the flattened input (then L2-normalized).
  static EncoderConfig identity(std::size_t in_channels = 3);

  void validate() const;
};

/// One flat parameter blob entry (offset/count into the flat vector).
struct ParamInfo {
  std::string name;
  std::size_t offset = 0;
  std::size_t count = 0;
};

template <typename T>
class StgcnEncoder {
 public:
  StgcnEncoder() = default;
  StgcnEncoder(const EncoderConfig& cfg, const SkeletonGraph& graph,
               std::uint64_t init_seed);

  const EncoderConfig& config() const { return cfg_; }
  std::size_t num_joints() const { return V_; }
  std::size_t feature_channels() const { return feature_channels_; }
  int feature_stage() const { return feature_stage_; }

  std::vector<T>& parameters() { return params_; }
  const std::vector<T>& parameters() const { return params_; }
  const std::vector<ParamInfo>& param_layout() const { return layout_; }
  std::size_t parameter_count() const { return params_.size(); }

  struct StageCache {
    Tensor<T> aggregated;  // adjacency-aggregated input (for dW)
    Tensor<T> pre_spatial;     // graph conv output, pre ReLU
    Tensor<T> post_spatial;    // after ReLU
    Tensor<T> pre_temporal;    // temporal conv output, pre ReLU
    Tensor<T> output;          // after ReLU = stage output
  };

  struct Forward {
    Tensor<T> input;  // kept only when the input itself is the feature
    std::vector<StageCache> stages;
    std::vector<T> pooled;
    std::vector<T> proj_pre;  // MLP hidden pre-activation
    std::vector<T> proj_act;  // MLP hidden post-activation
    std::vector<T> embedding_raw;
    std::vector<T> embedding;  // L2-normalized
    T embedding_norm = T(0);

    const Tensor<T>& feature(int feature_stage) const {
      return feature_stage < 0 ? input
                               : stages[static_cast<std::size_t>(feature_stage)].output;
    }
  };

  /// Full forward pass with caches retained for backward.
  Forward forward(const Tensor<T>& x) const;

  /// Embedding only (still runs the full pass; caches are dropped).
  std::vector<T> embed(const Tensor<T>& x) const;

  /// Runs the network from the feature stage onward: stages after the
  /// selected one, pooling, projection, normalization. This is the function
  /// the discrepancy gradient differentiates; the finite-difference oracle
  /// calls it directly.
  std::vector<T> embed_from_feature(const Tensor<T>& h) const;

  /// Backpropagates d(scalar)/d(embedding) = dz through the network.
  /// When grads != nullptr, parameter gradients are accumulated into it
  /// (same layout as parameters()). When want_feature_grad, returns the
  /// gradient with respect to the selected feature stage's output; the walk
  /// stops there if parameter gradients are not requested.
  Tensor<T> backward(const Forward& fwd, const std::vector<T>& dz,
                     std::vector<T>* grads, bool want_feature_grad) const;

  std::vector<T> make_grad_buffer() const {
    return std::vector<T>(params_.size(), T(0));
  }

 private:
  struct StageLayout {
    std::size_t in_c = 0, out_c = 0, kt = 0;
    std::size_t gw = 0, gb = 0, tw = 0, tb = 0;  // offsets
  };

  void run_stage(std::size_t s, const Tensor<T>& x, StageCache& cache) const;
  Tensor<T> stage_backward(std::size_t s, const StageCache& cache,
                           const Tensor<T>& dout, std::vector<T>* grads,
                           bool need_input_grad) const;

  void pool_forward(const Tensor<T>& feat, std::vector<T>& pooled) const;
  void project_forward(Forward& fwd) const;

  const T* p(std::size_t offset) const { return params_.data() + offset; }
  T* p(std::size_t offset) { return params_.data() + offset; }

  EncoderConfig cfg_;
  std::size_t V_ = 0;
  int feature_stage_ = -1;          // resolved (-1 = input)
  std::size_t feature_channels_ = 0;
  std::vector<T> adjacency_norm_;   // V*V, D^-1/2 (A + I) D^-1/2
  std::vector<T> params_;
  std::vector<ParamInfo> layout_;
  std::vector<StageLayout> stage_layout_;
  // projection offsets (MLP); unused for identity projection
  std::size_t proj_w1_ = 0, proj_b1_ = 0, proj_w2_ = 0, proj_b2_ = 0;
  std::size_t proj_hidden_ = 0, proj_in_ = 0;
};

/// Query/key branch pair with momentum-coupled parameters. The key branch is
/// an exact copy of the query branch at construction.
template <typename T>
struct EncoderPair {
  StgcnEncoder<T> query;
  StgcnEncoder<T> key;
  double momentum = 0.99;

  EncoderPair() = default;
  EncoderPair(const EncoderConfig& cfg, const SkeletonGraph& graph,
              std::uint64_t init_seed, double m)
      : query(cfg, graph, init_seed), key(query), momentum(m) {}
};

/// theta_k <- m * theta_k + (1 - m) * theta_q over every parameter.
template <typename T>
void momentum_update(EncoderPair<T>& pair) {
  const T m = static_cast<T>(pair.momentum);
  const T one_minus = T(1) - m;
  auto& k = pair.key.parameters();
  const auto& q = pair.query.parameters();
  if (k.size() != q.size()) {
    throw Error(ErrorKind::ShapeMismatch, "branch parameter sizes differ");
  }
  kernels::scal<T>(m, k.data(), k.size());
  kernels::axpy<T>(one_minus, q.data(), k.data(), k.size());
}

/// Cosine similarity of two embeddings, norms included.
template <typename T>
double similarity(const std::vector<T>& z1, const std::vector<T>& z2) {
  if (z1.size() != z2.size()) {
    throw Error(ErrorKind::ShapeMismatch, "embedding sizes differ");
  }
  const double n1 = std::sqrt(static_cast<double>(
      kernels::sumsq<T>(z1.data(), z1.size())));
  const double n2 = std::sqrt(static_cast<double>(
      kernels::sumsq<T>(z2.data(), z2.size())));
  if (n1 == 0.0 || n2 == 0.0) {
    throw Error(ErrorKind::ZeroVector, "cosine similarity of a zero vector");
  }
  const double d = static_cast<double>(kernels::dot<T>(z1.data(), z2.data(),
                                                       z1.size()));
  return d / (n1 * n2);
}

/// Discrepancy gradient: -d sim(z, z_bar) / dh, where z is the encoder's
/// embedding of x, h the selected feature stage, and z_bar (the benchmark
/// pose embedding) is treated as a constant.
template <typename T>
Tensor<T> similarity_gradient(const StgcnEncoder<T>& encoder,
                              const Tensor<T>& x,
                              const std::vector<T>& gsbp_embedding) {
  auto fwd = encoder.forward(x);
  Tensor<T> grad = encoder.backward(fwd, gsbp_embedding, nullptr, true);
  kernels::scal<T>(T(-1), grad.data(), grad.size());
  return grad;
}

template <typename T>
Tensor<T> similarity_gradient(const StgcnEncoder<T>& encoder,
                              const Tensor<T>& x, const Tensor<T>& gsbp) {
  return similarity_gradient(encoder, x, encoder.embed(gsbp));
}

/// Batch encoding: the selected feature map and the normalized embedding per
/// sample. Samples are independent, so the result is permutation-equivariant
/// over the batch axis.
template <typename T>
struct BatchEncodeResult {
  std::vector<Tensor<T>> features;
  std::vector<std::vector<T>> embeddings;
};

template <typename T>
BatchEncodeResult<T> encode(const StgcnEncoder<T>& encoder,
                            const std::vector<Tensor<T>>& batch) {
  BatchEncodeResult<T> out;
  out.features.reserve(batch.size());
  out.embeddings.reserve(batch.size());
  for (const auto& x : batch) {
    auto fwd = encoder.forward(x);
    out.features.push_back(fwd.feature(encoder.feature_stage()));
    out.embeddings.push_back(std::move(fwd.embedding));
  }
  return out;
}

// ---------------------------------------------------------------------------
// implementation

inline EncoderConfig EncoderConfig::tiny(std::size_t embedding_dim) {
  EncoderConfig cfg;
  cfg.stages = {{16, 3}, {16, 3}};
  cfg.embedding_dim = embedding_dim;
  return cfg;
}

inline EncoderConfig EncoderConfig::small(std::size_t embedding_dim) {
  EncoderConfig cfg;
  cfg.stages = {{32, 5}, {64, 5}, {64, 3}};
  cfg.embedding_dim = embedding_dim;
  return cfg;
}

inline EncoderConfig EncoderConfig::identity(std::size_t in_channels) {
  EncoderConfig cfg;
  cfg.in_channels = in_channels;
  cfg.stages.clear();
  cfg.pool = Pool::flatten;
  cfg.projection = Projection::identity;
  cfg.embedding_dim = 0;  // derived from the input shape
  return cfg;
}

inline void EncoderConfig::validate() const {
  if (in_channels == 0) {
    throw Error(ErrorKind::ConfigError, "encoder needs in_channels > 0");
  }
  for (const auto& s : stages) {
    if (s.channels == 0) {
      throw Error(ErrorKind::ConfigError, "stage channels must be > 0");
    }
    if (s.temporal_kernel == 0 || s.temporal_kernel % 2 == 0) {
      throw Error(ErrorKind::ConfigError, "temporal kernels must be odd");
    }
  }
  if (feature_stage >= static_cast<int>(stages.size()) || feature_stage < -1) {
    throw Error(ErrorKind::NonDifferentiableConfig,
                "feature stage is not on the path to the embedding");
  }
  if (feature_stage == -1 && !stages.empty()) {
    // resolved to the last stage; fine
  }
  if (pool == Pool::flatten && projection != Projection::identity) {
    throw Error(ErrorKind::ConfigError,
                "flatten pooling requires the identity projection");
  }
  if (projection == Projection::mlp && embedding_dim == 0) {
    throw Error(ErrorKind::ConfigError, "embedding_dim must be > 0");
  }
}

template <typename T>
StgcnEncoder<T>::StgcnEncoder(const EncoderConfig& cfg,
                              const SkeletonGraph& graph,
                              std::uint64_t init_seed)
    : cfg_(cfg), V_(graph.num_joints) {
  cfg_.validate();
  feature_stage_ = cfg_.feature_stage == -1
                       ? static_cast<int>(cfg_.stages.size()) - 1
                       : cfg_.feature_stage;
  feature_channels_ = feature_stage_ < 0
                          ? cfg_.in_channels
                          : cfg_.stages[static_cast<std::size_t>(feature_stage_)]
                                .channels;

  // Symmetric-normalized adjacency with self loops.
  adjacency_norm_.assign(V_ * V_, T(0));
  std::vector<double> degree(V_, 0.0);
  for (std::size_t v = 0; v < V_; ++v) {
    for (std::size_t w = 0; w < V_; ++w) {
      const double a = (v == w) ? 1.0 : graph.adjacency[v * V_ + w];
      degree[v] += a;
    }
  }
  for (std::size_t v = 0; v < V_; ++v) {
    for (std::size_t w = 0; w < V_; ++w) {
      const double a = (v == w) ? 1.0 : graph.adjacency[v * V_ + w];
      if (a != 0.0) {
        adjacency_norm_[v * V_ + w] =
            static_cast<T>(a / std::sqrt(degree[v] * degree[w]));
      }
    }
  }

  // Parameter layout.
  std::size_t offset = 0;
  auto add = [&](const std::string& name, std::size_t count) {
    layout_.push_back({name, offset, count});
    const std::size_t at = offset;
    offset += count;
    return at;
  };
  std::size_t in_c = cfg_.in_channels;
  for (std::size_t s = 0; s < cfg_.stages.size(); ++s) {
    const auto& spec = cfg_.stages[s];
    StageLayout sl;
    sl.in_c = in_c;
    sl.out_c = spec.channels;
    sl.kt = spec.temporal_kernel;
    const std::string tag = "stage" + std::to_string(s);
    sl.gw = add(tag + ".gconv.w", sl.out_c * sl.in_c);
    sl.gb = add(tag + ".gconv.b", sl.out_c);
    sl.tw = add(tag + ".tconv.w", sl.out_c * sl.out_c * sl.kt);
    sl.tb = add(tag + ".tconv.b", sl.out_c);
    stage_layout_.push_back(sl);
    in_c = spec.channels;
  }
  if (cfg_.projection == EncoderConfig::Projection::mlp) {
    proj_in_ = in_c;  // average pooling output width
    proj_hidden_ = cfg_.embedding_dim;
    proj_w1_ = add("proj.w1", proj_hidden_ * proj_in_);
    proj_b1_ = add("proj.b1", proj_hidden_);
    proj_w2_ = add("proj.w2", cfg_.embedding_dim * proj_hidden_);
    proj_b2_ = add("proj.b2", cfg_.embedding_dim);
  }
  params_.assign(offset, T(0));

  // He-normal weights, zero biases.
  Rng rng = Rng::derive({init_seed, stream_key(RngStream::ParamInit)});
  for (const auto& sl : stage_layout_) {
    const double g_std = std::sqrt(2.0 / static_cast<double>(sl.in_c));
    for (std::size_t i = 0; i < sl.out_c * sl.in_c; ++i) {
      params_[sl.gw + i] = static_cast<T>(rng.normal(0.0, g_std));
    }
    const double t_std =
        std::sqrt(2.0 / static_cast<double>(sl.out_c * sl.kt));
    for (std::size_t i = 0; i < sl.out_c * sl.out_c * sl.kt; ++i) {
      params_[sl.tw + i] = static_cast<T>(rng.normal(0.0, t_std));
    }
  }
  if (cfg_.projection == EncoderConfig::Projection::mlp) {
    const double s1 = std::sqrt(2.0 / static_cast<double>(proj_in_));
    for (std::size_t i = 0; i < proj_hidden_ * proj_in_; ++i) {
      params_[proj_w1_ + i] = static_cast<T>(rng.normal(0.0, s1));
    }
    const double s2 = std::sqrt(2.0 / static_cast<double>(proj_hidden_));
    for (std::size_t i = 0; i < cfg_.embedding_dim * proj_hidden_; ++i) {
      params_[proj_w2_ + i] = static_cast<T>(rng.normal(0.0, s2));
    }
  }
}

template <typename T>
void StgcnEncoder<T>::run_stage(std::size_t s, const Tensor<T>& x,
                                StageCache& cache) const {
  const auto& sl = stage_layout_[s];
  const std::size_t Tn = x.dim(1), V = x.dim(2), TV = Tn * V;

  // Spatial aggregation: xs[ci,t,:] = x[ci,t,:] * A_norm.
  cache.aggregated = Tensor<T>({sl.in_c, Tn, V});
  for (std::size_t ci = 0; ci < sl.in_c; ++ci) {
    for (std::size_t t = 0; t < Tn; ++t) {
      const T* row = x.slice(ci, t);
      T* out = cache.aggregated.slice(ci, t);
      for (std::size_t v = 0; v < V; ++v) {
        if (row[v] != T(0)) {
          kernels::axpy<T>(row[v], adjacency_norm_.data() + v * V, out, V);
        }
      }
    }
  }

  // Channel mix.
  cache.pre_spatial = Tensor<T>({sl.out_c, Tn, V});
  for (std::size_t co = 0; co < sl.out_c; ++co) {
    T* out = cache.pre_spatial.block(co);
    const T bias = params_[sl.gb + co];
    for (std::size_t i = 0; i < TV; ++i) out[i] = bias;
    for (std::size_t ci = 0; ci < sl.in_c; ++ci) {
      kernels::axpy<T>(params_[sl.gw + co * sl.in_c + ci],
                       cache.aggregated.block(ci), out, TV);
    }
  }

  cache.post_spatial = Tensor<T>({sl.out_c, Tn, V});
  kernels::relu<T>(cache.pre_spatial.data(), cache.post_spatial.data(),
                   cache.pre_spatial.size());

  // Temporal convolution, stride 1, zero padding.
  const std::size_t pad = sl.kt / 2;
  cache.pre_temporal = Tensor<T>({sl.out_c, Tn, V});
  for (std::size_t co = 0; co < sl.out_c; ++co) {
    T* out = cache.pre_temporal.block(co);
    const T bias = params_[sl.tb + co];
    for (std::size_t i = 0; i < TV; ++i) out[i] = bias;
    for (std::size_t ci = 0; ci < sl.out_c; ++ci) {
      const T* in = cache.post_spatial.block(ci);
      for (std::size_t k = 0; k < sl.kt; ++k) {
        const long d = static_cast<long>(k) - static_cast<long>(pad);
        const std::size_t t_begin = d < 0 ? static_cast<std::size_t>(-d) : 0;
        const std::size_t t_end = d > 0 ? Tn - static_cast<std::size_t>(d) : Tn;
        if (t_begin >= t_end) continue;
        const std::size_t len = (t_end - t_begin) * V;
        kernels::axpy<T>(params_[sl.tw + (co * sl.out_c + ci) * sl.kt + k],
                         in + (t_begin + static_cast<std::size_t>(d)) * V,
                         out + t_begin * V, len);
      }
    }
  }

  cache.output = Tensor<T>({sl.out_c, Tn, V});
  kernels::relu<T>(cache.pre_temporal.data(), cache.output.data(),
                   cache.pre_temporal.size());
}

template <typename T>
void StgcnEncoder<T>::pool_forward(const Tensor<T>& feat,
                                   std::vector<T>& pooled) const {
  if (cfg_.pool == EncoderConfig::Pool::flatten) {
    pooled.assign(feat.data(), feat.data() + feat.size());
    return;
  }
  const std::size_t C = feat.dim(0), TV = feat.dim(1) * feat.dim(2);
  pooled.resize(C);
  const T inv = T(1) / static_cast<T>(TV);
  for (std::size_t c = 0; c < C; ++c) {
    pooled[c] = kernels::sum<T>(feat.block(c), TV) * inv;
  }
}

template <typename T>
void StgcnEncoder<T>::project_forward(Forward& fwd) const {
  if (cfg_.projection == EncoderConfig::Projection::identity) {
    fwd.embedding_raw = fwd.pooled;
  } else {
    fwd.proj_pre.assign(proj_hidden_, T(0));
    for (std::size_t h = 0; h < proj_hidden_; ++h) {
      fwd.proj_pre[h] = params_[proj_b1_ + h] +
                        kernels::dot<T>(p(proj_w1_ + h * proj_in_),
                                        fwd.pooled.data(), proj_in_);
    }
    fwd.proj_act.resize(proj_hidden_);
    kernels::relu<T>(fwd.proj_pre.data(), fwd.proj_act.data(), proj_hidden_);
    fwd.embedding_raw.assign(cfg_.embedding_dim, T(0));
    for (std::size_t e = 0; e < cfg_.embedding_dim; ++e) {
      fwd.embedding_raw[e] = params_[proj_b2_ + e] +
                             kernels::dot<T>(p(proj_w2_ + e * proj_hidden_),
                                             fwd.proj_act.data(), proj_hidden_);
    }
  }
  const double norm = std::sqrt(static_cast<double>(kernels::sumsq<T>(
      fwd.embedding_raw.data(), fwd.embedding_raw.size())));
  fwd.embedding_norm = static_cast<T>(norm);
  fwd.embedding = fwd.embedding_raw;
  if (norm > 0.0) {
    kernels::scal<T>(static_cast<T>(1.0 / norm), fwd.embedding.data(),
                     fwd.embedding.size());
  }
}

template <typename T>
typename StgcnEncoder<T>::Forward StgcnEncoder<T>::forward(
    const Tensor<T>& x) const {
  if (x.rank() != 3 || x.dim(0) != cfg_.in_channels || x.dim(2) != V_) {
    throw Error(ErrorKind::ShapeMismatch, "encoder input must be [C,T,V]");
  }
  Forward fwd;
  if (feature_stage_ < 0) fwd.input = x;
  fwd.stages.resize(cfg_.stages.size());
  const Tensor<T>* cur = &x;
  for (std::size_t s = 0; s < cfg_.stages.size(); ++s) {
    run_stage(s, *cur, fwd.stages[s]);
    cur = &fwd.stages[s].output;
  }
  pool_forward(*cur, fwd.pooled);
  project_forward(fwd);
  return fwd;
}

template <typename T>
std::vector<T> StgcnEncoder<T>::embed(const Tensor<T>& x) const {
  return forward(x).embedding;
}

template <typename T>
std::vector<T> StgcnEncoder<T>::embed_from_feature(const Tensor<T>& h) const {
  Forward fwd;
  fwd.stages.resize(cfg_.stages.size());
  const Tensor<T>* cur = &h;
  for (std::size_t s = static_cast<std::size_t>(feature_stage_ + 1);
       s < cfg_.stages.size(); ++s) {
    run_stage(s, *cur, fwd.stages[s]);
    cur = &fwd.stages[s].output;
  }
  pool_forward(*cur, fwd.pooled);
  project_forward(fwd);
  return fwd.embedding;
}

template <typename T>
Tensor<T> StgcnEncoder<T>::stage_backward(std::size_t s,
                                          const StageCache& cache,
                                          const Tensor<T>& dout,
                                          std::vector<T>* grads,
                                          bool need_input_grad) const {
  const auto& sl = stage_layout_[s];
  const std::size_t Tn = dout.dim(1), V = dout.dim(2), TV = Tn * V;
  const std::size_t pad = sl.kt / 2;

  // Through the output ReLU.
  Tensor<T> d_pre_t({sl.out_c, Tn, V});
  kernels::relu_grad<T>(cache.pre_temporal.data(), dout.data(), d_pre_t.data(),
                        d_pre_t.size());

  // Temporal conv backward.
  Tensor<T> d_post_s({sl.out_c, Tn, V});
  for (std::size_t co = 0; co < sl.out_c; ++co) {
    const T* dy = d_pre_t.block(co);
    if (grads) {
      (*grads)[sl.tb + co] += kernels::sum<T>(dy, TV);
    }
    for (std::size_t ci = 0; ci < sl.out_c; ++ci) {
      const T* in = cache.post_spatial.block(ci);
      T* dx = d_post_s.block(ci);
      for (std::size_t k = 0; k < sl.kt; ++k) {
        const long d = static_cast<long>(k) - static_cast<long>(pad);
        const std::size_t t_begin = d < 0 ? static_cast<std::size_t>(-d) : 0;
        const std::size_t t_end = d > 0 ? Tn - static_cast<std::size_t>(d) : Tn;
        if (t_begin >= t_end) continue;
        const std::size_t len = (t_end - t_begin) * V;
        const std::size_t in_off = (t_begin + static_cast<std::size_t>(d)) * V;
        const std::size_t out_off = t_begin * V;
        if (grads) {
          (*grads)[sl.tw + (co * sl.out_c + ci) * sl.kt + k] +=
              kernels::dot<T>(dy + out_off, in + in_off, len);
        }
        kernels::axpy<T>(params_[sl.tw + (co * sl.out_c + ci) * sl.kt + k],
                         dy + out_off, dx + in_off, len);
      }
    }
  }

  // Through the spatial ReLU.
  Tensor<T> d_pre_s({sl.out_c, Tn, V});
  kernels::relu_grad<T>(cache.pre_spatial.data(), d_post_s.data(),
                        d_pre_s.data(), d_pre_s.size());

  // Graph conv backward.
  if (grads) {
    for (std::size_t co = 0; co < sl.out_c; ++co) {
      const T* dy = d_pre_s.block(co);
      (*grads)[sl.gb + co] += kernels::sum<T>(dy, TV);
      for (std::size_t ci = 0; ci < sl.in_c; ++ci) {
        (*grads)[sl.gw + co * sl.in_c + ci] +=
            kernels::dot<T>(dy, cache.aggregated.block(ci), TV);
      }
    }
  }
  if (!need_input_grad) return Tensor<T>();

  Tensor<T> d_agg({sl.in_c, Tn, V});
  for (std::size_t ci = 0; ci < sl.in_c; ++ci) {
    T* dx = d_agg.block(ci);
    for (std::size_t co = 0; co < sl.out_c; ++co) {
      kernels::axpy<T>(params_[sl.gw + co * sl.in_c + ci],
                       d_pre_s.block(co), dx, TV);
    }
  }
  // Back through the (symmetric) adjacency aggregation.
  Tensor<T> d_in({sl.in_c, Tn, V});
  for (std::size_t ci = 0; ci < sl.in_c; ++ci) {
    for (std::size_t t = 0; t < Tn; ++t) {
      const T* row = d_agg.slice(ci, t);
      T* out = d_in.slice(ci, t);
      for (std::size_t v = 0; v < V; ++v) {
        out[v] = kernels::dot<T>(row, adjacency_norm_.data() + v * V, V);
      }
    }
  }
  return d_in;
}

template <typename T>
Tensor<T> StgcnEncoder<T>::backward(const Forward& fwd,
                                    const std::vector<T>& dz,
                                    std::vector<T>* grads,
                                    bool want_feature_grad) const {
  if (dz.size() != fwd.embedding.size()) {
    throw Error(ErrorKind::ShapeMismatch, "dz size mismatch");
  }
  // Through the L2 normalization: z = u / |u|.
  const std::size_t E = dz.size();
  std::vector<T> du(E, T(0));
  if (fwd.embedding_norm > T(0)) {
    const T inv = T(1) / fwd.embedding_norm;
    const T proj = kernels::dot<T>(dz.data(), fwd.embedding.data(), E);
    for (std::size_t e = 0; e < E; ++e) {
      du[e] = (dz[e] - proj * fwd.embedding[e]) * inv;
    }
  }

  // Projection backward.
  std::vector<T> dpooled;
  if (cfg_.projection == EncoderConfig::Projection::identity) {
    dpooled = du;
  } else {
    if (grads) {
      for (std::size_t e = 0; e < E; ++e) {
        (*grads)[proj_b2_ + e] += du[e];
        kernels::axpy<T>(du[e], fwd.proj_act.data(),
                         grads->data() + proj_w2_ + e * proj_hidden_,
                         proj_hidden_);
      }
    }
    std::vector<T> dact(proj_hidden_, T(0));
    for (std::size_t e = 0; e < E; ++e) {
      kernels::axpy<T>(du[e], p(proj_w2_ + e * proj_hidden_), dact.data(),
                       proj_hidden_);
    }
    std::vector<T> dpre(proj_hidden_);
    kernels::relu_grad<T>(fwd.proj_pre.data(), dact.data(), dpre.data(),
                          proj_hidden_);
    if (grads) {
      for (std::size_t h = 0; h < proj_hidden_; ++h) {
        (*grads)[proj_b1_ + h] += dpre[h];
        kernels::axpy<T>(dpre[h], fwd.pooled.data(),
                         grads->data() + proj_w1_ + h * proj_in_, proj_in_);
      }
    }
    dpooled.assign(proj_in_, T(0));
    for (std::size_t h = 0; h < proj_hidden_; ++h) {
      kernels::axpy<T>(dpre[h], p(proj_w1_ + h * proj_in_), dpooled.data(),
                       proj_in_);
    }
  }

  // Pool backward into the last stage output (or the input).
  const Tensor<T>& last = cfg_.stages.empty()
                              ? fwd.input
                              : fwd.stages.back().output;
  Tensor<T> dcur(last.shape());
  if (cfg_.pool == EncoderConfig::Pool::flatten) {
    for (std::size_t i = 0; i < dcur.size(); ++i) dcur[i] = dpooled[i];
  } else {
    const std::size_t C = last.dim(0), TV = last.dim(1) * last.dim(2);
    const T inv = T(1) / static_cast<T>(TV);
    for (std::size_t c = 0; c < C; ++c) {
      T* block = dcur.block(c);
      const T g = dpooled[c] * inv;
      for (std::size_t i = 0; i < TV; ++i) block[i] = g;
    }
  }

  Tensor<T> feature_grad;
  if (want_feature_grad &&
      feature_stage_ == static_cast<int>(cfg_.stages.size()) - 1) {
    feature_grad = dcur;
    if (!grads) return feature_grad;
  }
  if (cfg_.stages.empty()) {
    return want_feature_grad ? dcur : Tensor<T>();
  }

  for (std::size_t si = cfg_.stages.size(); si-- > 0;) {
    const bool need_input_grad = si > 0 || (want_feature_grad && feature_stage_ < 0);
    dcur = stage_backward(si, fwd.stages[si], dcur, grads, need_input_grad);
    const int below = static_cast<int>(si) - 1;
    if (want_feature_grad && below >= 0 && below == feature_stage_) {
      feature_grad = dcur;
      if (!grads) return feature_grad;
    }
  }
  if (want_feature_grad && feature_stage_ < 0) feature_grad = dcur;
  return feature_grad;
}

}  // namespace dogclr
