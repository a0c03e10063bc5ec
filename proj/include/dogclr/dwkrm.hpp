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

#include <algorithm>
#include <cstdint>
#include <vector>

#include "dogclr/encoder.hpp"
#include "dogclr/jdam.hpp"
#include "dogclr/skeleton.hpp"
#include "dogclr/tensor.hpp"

namespace dogclr {

// Key-motion-region localization: fuse the discrepancy gradient (temporal
// saliency) with joint-degree weights (spatial prior) into per-channel
// composite weights, pool them against the feature map, smooth over the
// skeleton graph, and threshold into a binary mask. The activation in both
// steps is ReLU: positive discrepancy-gradient entries mark features whose
// growth lowers similarity to the benchmark pose.

template <typename T>
struct CompositeWeightsT {
  std::vector<T> alpha;  // one weight per feature channel
};
using CompositeWeights = CompositeWeightsT<float>;

struct ThetaSpec {
  enum class Mode { quantile, absolute } mode = Mode::quantile;
  double value = 0.7;  // quantile level, or the absolute threshold
};

template <typename T>
struct KeyRegionMaskT {
  Tensor<T> importance;        // [T, V], smoothed map, >= 0
  Tensor<std::uint8_t> mask;   // [T, V], 1 where importance > threshold
  ThetaSpec theta;
  double realized_threshold = 0.0;

  double key_fraction() const {
    std::size_t ones = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) ones += mask[i];
    return static_cast<double>(ones) / static_cast<double>(mask.size());
  }
};
using KeyRegionMask = KeyRegionMaskT<float>;

/// Composite channel weight: alpha[c] = mean over (t, v) of
/// relu(dh[c,t,v]) * jd[v].
template <typename T>
CompositeWeightsT<T> composite_weights(const Tensor<T>& dh,
                                       const JointDegreeWeights& jd) {
  if (dh.rank() != 3 || dh.dim(2) != jd.size()) {
    throw Error(ErrorKind::ShapeMismatch,
                "discrepancy gradient joint axis must match JD weights");
  }
  const std::size_t C = dh.dim(0), Tn = dh.dim(1), V = dh.dim(2);
  std::vector<T> jd_cast(V);
  for (std::size_t v = 0; v < V; ++v) jd_cast[v] = static_cast<T>(jd[v]);

  CompositeWeightsT<T> out;
  out.alpha.assign(C, T(0));
  std::vector<T> scratch(V);
  const T inv = T(1) / static_cast<T>(Tn * V);
  for (std::size_t c = 0; c < C; ++c) {
    T acc = T(0);
    for (std::size_t t = 0; t < Tn; ++t) {
      kernels::relu<T>(dh.slice(c, t), scratch.data(), V);
      acc += kernels::dot<T>(scratch.data(), jd_cast.data(), V);
    }
    out.alpha[c] = acc * inv;
  }
  return out;
}

/// Channel-pools the feature map with alpha, applies ReLU, smooths each frame
/// with G = adjacency + identity, optionally interpolates the map to
/// target_T frames, and thresholds. Quantile mode takes the per-sample
/// q-quantile of the map as the threshold; comparison is strict, so ties at
/// the threshold fall to non-key.
template <typename T>
KeyRegionMaskT<T> key_region_mask(const CompositeWeightsT<T>& alpha,
                                  const Tensor<T>& h,
                                  const SkeletonGraph& graph,
                                  const ThetaSpec& theta,
                                  std::size_t target_T = 0) {
  if (h.rank() != 3 || h.dim(0) != alpha.alpha.size() ||
      h.dim(2) != graph.num_joints) {
    throw Error(ErrorKind::ShapeMismatch, "feature map/alpha/graph mismatch");
  }
  if (theta.mode == ThetaSpec::Mode::quantile &&
      (theta.value <= 0.0 || theta.value >= 1.0)) {
    throw Error(ErrorKind::InvalidTheta, "quantile must lie in (0, 1)");
  }
  const std::size_t C = h.dim(0), Tf = h.dim(1), V = h.dim(2);
  const std::size_t Tout = target_T == 0 ? Tf : target_T;

  // Channel pooling + ReLU.
  Tensor<T> raw({Tf, V});
  for (std::size_t c = 0; c < C; ++c) {
    if (alpha.alpha[c] != T(0)) {
      kernels::axpy<T>(alpha.alpha[c], h.block(c), raw.data(), raw.size());
    }
  }
  kernels::relu<T>(raw.data(), raw.data(), raw.size());

  // Frame-wise smoothing: importance[t,:] = raw[t,:] * (A + I).
  Tensor<T> smoothed({Tf, V});
  for (std::size_t t = 0; t < Tf; ++t) {
    T* out = smoothed.data() + t * V;
    const T* in = raw.data() + t * V;
    for (std::size_t v = 0; v < V; ++v) out[v] = in[v];  // identity part
    for (std::size_t v = 0; v < V; ++v) {
      if (in[v] == T(0)) continue;
      const std::uint8_t* adj = graph.adjacency.data() + v * V;
      for (std::size_t w = 0; w < V; ++w) {
        if (adj[w]) out[w] += in[v];
      }
    }
  }

  KeyRegionMaskT<T> result;
  result.theta = theta;
  if (Tout == Tf) {
    result.importance = std::move(smoothed);
  } else {
    // Linear interpolation along time.
    result.importance = Tensor<T>({Tout, V});
    for (std::size_t t = 0; t < Tout; ++t) {
      const double s = Tout == 1 ? 0.0
                                 : static_cast<double>(t) *
                                       static_cast<double>(Tf - 1) /
                                       static_cast<double>(Tout - 1);
      const std::size_t lo = static_cast<std::size_t>(s);
      const std::size_t hi = lo + 1 < Tf ? lo + 1 : lo;
      const T w = static_cast<T>(s - static_cast<double>(lo));
      const T* a = smoothed.data() + lo * V;
      const T* b = smoothed.data() + hi * V;
      T* out = result.importance.data() + t * V;
      for (std::size_t v = 0; v < V; ++v) {
        out[v] = (T(1) - w) * a[v] + w * b[v];
      }
    }
  }

  const std::size_t n = result.importance.size();
  double threshold;
  if (theta.mode == ThetaSpec::Mode::absolute) {
    threshold = theta.value;
  } else {
    // k-th smallest value with k = ceil(q * n); strict > above it keeps the
    // key fraction within one joint column of 1 - q.
    std::vector<T> values(result.importance.data(),
                          result.importance.data() + n);
    std::size_t k = static_cast<std::size_t>(
        std::ceil(theta.value * static_cast<double>(n)));
    k = std::min(std::max<std::size_t>(k, 1), n);
    std::nth_element(values.begin(), values.begin() + (k - 1), values.end());
    threshold = static_cast<double>(values[k - 1]);
  }
  result.realized_threshold = threshold;
  result.mask = Tensor<std::uint8_t>({result.importance.dim(0), V});
  for (std::size_t i = 0; i < n; ++i) {
    result.mask[i] =
        static_cast<double>(result.importance[i]) > threshold ? 1 : 0;
  }
  return result;
}

/// The staged pipeline in one call: discrepancy gradient -> JD fusion ->
/// channel pooling -> smoothing -> threshold, reusing a single encoder
/// forward. Bit-identical to invoking the staged operations directly.
template <typename T>
KeyRegionMaskT<T> key_region_mask_for_sample(
    const StgcnEncoder<T>& key_encoder, const Tensor<T>& x,
    const std::vector<T>& gsbp_embedding, const JointDegreeWeights& jd,
    const SkeletonGraph& graph, const ThetaSpec& theta) {
  auto fwd = key_encoder.forward(x);
  Tensor<T> dh = key_encoder.backward(fwd, gsbp_embedding, nullptr, true);
  kernels::scal<T>(T(-1), dh.data(), dh.size());
  const auto alpha = composite_weights(dh, jd);
  return key_region_mask(alpha, fwd.feature(key_encoder.feature_stage()),
                         graph, theta, x.dim(1));
}

/// All-ones mask of the given shape (the use_dwkrm=false ablation path).
inline KeyRegionMask all_ones_mask(std::size_t T_frames, std::size_t V) {
  KeyRegionMask m;
  m.importance = Tensor<float>({T_frames, V}, 1.0f);
  m.mask = Tensor<std::uint8_t>({T_frames, V}, 1);
  m.theta = {ThetaSpec::Mode::absolute, 0.0};
  m.realized_threshold = 0.0;
  return m;
}

}  // namespace dogclr
