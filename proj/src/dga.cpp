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

#include "dogclr/dga.hpp"

#include <cmath>
#include <numbers>

#include "dogclr/error.hpp"

namespace dogclr {

namespace {

constexpr double kSigmaFloor = 1e-6;

void require_c3(const SkeletonSequence& x, const char* what) {
  if (x.channels() != 3) {
    throw Error(ErrorKind::ShapeMismatch,
                std::string(what) + " requires 3 coordinate channels");
  }
}

// Applies a 3x3 matrix to every (x, y, z) joint coordinate.
SkeletonSequence apply_matrix(const SkeletonSequence& x,
                              const std::array<double, 9>& m) {
  require_c3(x, "geometric transform");
  const std::size_t T = x.frames(), V = x.joints(), TV = T * V;
  SkeletonSequence out = x;
  const float* px = x.values.data();
  const float* py = px + TV;
  const float* pz = py + TV;
  float* ox = out.values.data();
  float* oy = ox + TV;
  float* oz = oy + TV;
  for (std::size_t i = 0; i < TV; ++i) {
    const double a = px[i], b = py[i], c = pz[i];
    ox[i] = static_cast<float>(m[0] * a + m[1] * b + m[2] * c);
    oy[i] = static_cast<float>(m[3] * a + m[4] * b + m[5] * c);
    oz[i] = static_cast<float>(m[6] * a + m[7] * b + m[8] * c);
  }
  return out;
}

}  // namespace

void AugmentationConfig::validate() const {
  for (double p : strong_probs) {
    if (p < 0.0 || p > 1.0) {
      throw Error(ErrorKind::ConfigError, "transform probability outside [0,1]");
    }
  }
  if (mix_prob < 0.0 || mix_prob > 1.0) {
    throw Error(ErrorKind::ConfigError, "mix probability outside [0,1]");
  }
  if (crop_ratio_min <= 0.0 || crop_ratio_max > 1.0 ||
      crop_ratio_min > crop_ratio_max) {
    throw Error(ErrorKind::ConfigError, "crop ratio range must lie in (0,1]");
  }
  if (mix_ratio_min > mix_ratio_max) {
    throw Error(ErrorKind::ConfigError, "mix ratio range is inverted");
  }
  if (blur_kernel < 1 || blur_kernel % 2 == 0) {
    throw Error(ErrorKind::ConfigError, "blur kernel must be odd");
  }
  if (!(axis_mask_axes[0] || axis_mask_axes[1] || axis_mask_axes[2])) {
    throw Error(ErrorKind::ConfigError, "axis masking needs at least one axis");
  }
}

SkeletonSequence style_transfer(const SkeletonSequence& xi,
                                const SkeletonSequence& xj,
                                const JointDegreeWeights& jd) {
  if (!xi.values.same_shape(xj.values)) {
    throw Error(ErrorKind::ShapeMismatch, "style partner shape mismatch");
  }
  if (xi.joints() != jd.size()) {
    throw Error(ErrorKind::ShapeMismatch, "JD weight count mismatch");
  }
  const std::size_t C = xi.channels(), T = xi.frames(), V = xi.joints();
  const std::size_t TV = T * V;

  // Per-channel statistics over all (t, v); population variance.
  std::vector<double> mu_i(C), sg_i(C), mu_j(C), sg_j(C);
  bool floored = false;
  for (std::size_t c = 0; c < C; ++c) {
    const float* a = xi.values.block(c);
    const float* b = xj.values.block(c);
    double sa = 0.0, sb = 0.0;
    for (std::size_t k = 0; k < TV; ++k) {
      sa += a[k];
      sb += b[k];
    }
    mu_i[c] = sa / static_cast<double>(TV);
    mu_j[c] = sb / static_cast<double>(TV);
    double va = 0.0, vb = 0.0;
    for (std::size_t k = 0; k < TV; ++k) {
      const double da = a[k] - mu_i[c];
      const double db = b[k] - mu_j[c];
      va += da * da;
      vb += db * db;
    }
    sg_i[c] = std::sqrt(va / static_cast<double>(TV));
    sg_j[c] = std::sqrt(vb / static_cast<double>(TV));
    if (sg_i[c] < kSigmaFloor) {
      sg_i[c] = kSigmaFloor;
      floored = true;
    }
  }
  if (floored) {
    warn("style transfer: content sigma floored at 1e-6 (zero variance)");
  }

  SkeletonSequence out = xi;
  for (std::size_t v = 0; v < V; ++v) {
    const double w = std::clamp(jd[v], 0.0, 1.0);
    if (w == 1.0) continue;  // content joints stay exactly xi
    for (std::size_t c = 0; c < C; ++c) {
      const double scale = sg_j[c] / sg_i[c];
      for (std::size_t t = 0; t < T; ++t) {
        const double a = xi.values(c, t, v);
        const double b = xj.values(c, t, v);
        const double transferred = (b - mu_i[c]) * scale + mu_j[c];
        out.values(c, t, v) =
            static_cast<float>(w * a + (1.0 - w) * transferred);
      }
    }
  }
  return out;
}

namespace aug {

SkeletonSequence shear(const SkeletonSequence& x,
                       const std::array<double, 6>& s) {
  return apply_matrix(x, {1.0, s[0], s[1],   //
                          s[2], 1.0, s[3],   //
                          s[4], s[5], 1.0});
}

SkeletonSequence flip_axis(const SkeletonSequence& x, std::size_t axis) {
  require_c3(x, "spatial flip");
  SkeletonSequence out = x;
  float* p = out.values.block(axis);
  const std::size_t n = out.values.block_size();
  for (std::size_t i = 0; i < n; ++i) p[i] = -p[i];
  return out;
}

SkeletonSequence rotate(const SkeletonSequence& x, double rx_deg, double ry_deg,
                        double rz_deg) {
  const double d2r = std::numbers::pi / 180.0;
  const double ax = rx_deg * d2r, ay = ry_deg * d2r, az = rz_deg * d2r;
  const double cx = std::cos(ax), sx = std::sin(ax);
  const double cy = std::cos(ay), sy = std::sin(ay);
  const double cz = std::cos(az), sz = std::sin(az);
  // R = Rz * Ry * Rx
  const std::array<double, 9> m = {
      cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx,
      sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx,
      -sy,     cy * sx,                cy * cx};
  return apply_matrix(x, m);
}

SkeletonSequence axis_mask(const SkeletonSequence& x, std::size_t axis) {
  require_c3(x, "axis masking");
  SkeletonSequence out = x;
  float* p = out.values.block(axis);
  const std::size_t n = out.values.block_size();
  for (std::size_t i = 0; i < n; ++i) p[i] = 0.0f;
  return out;
}

SkeletonSequence crop_resample(const SkeletonSequence& x, std::size_t start,
                               std::size_t length) {
  const std::size_t C = x.channels(), T = x.frames(), V = x.joints();
  if (length < 2 || start + length > T) {
    throw Error(ErrorKind::ShapeMismatch, "crop window out of range");
  }
  SkeletonSequence out = x;
  Tensor<float> window({C, length, V});
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t t = 0; t < length; ++t) {
      const float* src = x.values.slice(c, start + t);
      float* dst = window.slice(c, t);
      for (std::size_t v = 0; v < V; ++v) dst[v] = src[v];
    }
  }
  // Resample the window back to T frames.
  for (std::size_t t = 0; t < T; ++t) {
    const double s = T == 1 ? 0.0
                            : static_cast<double>(t) *
                                  static_cast<double>(length - 1) /
                                  static_cast<double>(T - 1);
    const std::size_t lo = static_cast<std::size_t>(s);
    const std::size_t hi = lo + 1 < length ? lo + 1 : lo;
    const double w = s - static_cast<double>(lo);
    for (std::size_t c = 0; c < C; ++c) {
      const float* a = window.slice(c, lo);
      const float* b = window.slice(c, hi);
      float* dst = out.values.slice(c, t);
      for (std::size_t v = 0; v < V; ++v) {
        dst[v] = static_cast<float>((1.0 - w) * a[v] + w * b[v]);
      }
    }
  }
  return out;
}

SkeletonSequence temporal_flip(const SkeletonSequence& x) {
  const std::size_t C = x.channels(), T = x.frames(), V = x.joints();
  SkeletonSequence out = x;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t t = 0; t < T; ++t) {
      const float* src = x.values.slice(c, T - 1 - t);
      float* dst = out.values.slice(c, t);
      for (std::size_t v = 0; v < V; ++v) dst[v] = src[v];
    }
  }
  return out;
}

SkeletonSequence add_noise(const SkeletonSequence& x, double sigma, Rng& rng) {
  SkeletonSequence out = x;
  if (sigma <= 0.0) return out;
  float* p = out.values.data();
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    p[i] = static_cast<float>(p[i] + rng.normal(0.0, sigma));
  }
  return out;
}

SkeletonSequence temporal_blur(const SkeletonSequence& x, int kernel,
                               double sigma) {
  const std::size_t C = x.channels(), T = x.frames(), V = x.joints();
  const int half = kernel / 2;
  std::vector<double> taps(static_cast<std::size_t>(kernel));
  for (int k = -half; k <= half; ++k) {
    taps[static_cast<std::size_t>(k + half)] =
        std::exp(-0.5 * (k / sigma) * (k / sigma));
  }
  SkeletonSequence out = x;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t t = 0; t < T; ++t) {
      // Truncate the kernel at sequence boundaries and renormalize, so
      // constant signals stay constant.
      double wsum = 0.0;
      for (int k = -half; k <= half; ++k) {
        const long tt = static_cast<long>(t) + k;
        if (tt >= 0 && tt < static_cast<long>(T)) {
          wsum += taps[static_cast<std::size_t>(k + half)];
        }
      }
      float* dst = out.values.slice(c, t);
      for (std::size_t v = 0; v < V; ++v) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k) {
          const long tt = static_cast<long>(t) + k;
          if (tt >= 0 && tt < static_cast<long>(T)) {
            acc += taps[static_cast<std::size_t>(k + half)] *
                   x.values(c, static_cast<std::size_t>(tt), v);
          }
        }
        dst[v] = static_cast<float>(acc / wsum);
      }
    }
  }
  return out;
}

}  // namespace aug

SkeletonSequence strong_augment(const SkeletonSequence& x,
                                const AugmentationConfig& cfg, Rng& rng,
                                AugmentRecord* record) {
  cfg.validate();
  std::array<bool, 8> fire{};
  bool any = false;
  do {
    any = false;
    for (std::size_t i = 0; i < 8; ++i) {
      fire[i] = rng.bernoulli(cfg.strong_probs[i]);
      any |= fire[i];
    }
    if (!cfg.force_one) break;
    // force_one with all-zero probabilities would loop forever
    if (!any) {
      double total = 0.0;
      for (double p : cfg.strong_probs) total += p;
      if (total == 0.0) break;
    }
  } while (cfg.force_one && !any);

  auto log = [&](const char* name, std::initializer_list<double> params) {
    if (record) record->entries.push_back({name, std::vector<double>(params)});
  };

  SkeletonSequence out = x;
  if (fire[0]) {
    std::array<double, 6> s{};
    for (auto& v : s) v = rng.uniform(-cfg.shear_amplitude, cfg.shear_amplitude);
    out = aug::shear(out, s);
    log("shear", {s[0], s[1], s[2], s[3], s[4], s[5]});
  }
  if (fire[1]) {
    out = aug::flip_axis(out, 0);
    log("flip", {0.0});
  }
  if (fire[2]) {
    const double rx = rng.uniform(-cfg.rotation_max_deg, cfg.rotation_max_deg);
    const double ry = rng.uniform(-cfg.rotation_max_deg, cfg.rotation_max_deg);
    const double rz = rng.uniform(-cfg.rotation_max_deg, cfg.rotation_max_deg);
    out = aug::rotate(out, rx, ry, rz);
    log("rotation", {rx, ry, rz});
  }
  if (fire[3]) {
    std::vector<std::size_t> axes;
    for (std::size_t a = 0; a < 3; ++a) {
      if (cfg.axis_mask_axes[a]) axes.push_back(a);
    }
    const std::size_t axis = axes[rng.uniform_int(axes.size())];
    out = aug::axis_mask(out, axis);
    log("axis_mask", {static_cast<double>(axis)});
  }
  if (fire[4]) {
    const std::size_t T = x.frames();
    const double ratio = rng.uniform(cfg.crop_ratio_min, cfg.crop_ratio_max);
    const std::size_t len = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::lround(ratio * static_cast<double>(T))));
    const std::size_t clamped = std::min(len, T);
    const std::size_t start = T > clamped
                                  ? static_cast<std::size_t>(
                                        rng.uniform_int(T - clamped + 1))
                                  : 0;
    out = aug::crop_resample(out, start, clamped);
    log("crop", {static_cast<double>(start), static_cast<double>(clamped)});
  }
  if (fire[5]) {
    out = aug::temporal_flip(out);
    log("temporal_flip", {});
  }
  if (fire[6]) {
    out = aug::add_noise(out, cfg.noise_sigma_strong, rng);
    log("noise", {cfg.noise_sigma_strong});
  }
  if (fire[7]) {
    out = aug::temporal_blur(out, cfg.blur_kernel, cfg.blur_sigma);
    log("blur", {static_cast<double>(cfg.blur_kernel), cfg.blur_sigma});
  }
  return out;
}

SkeletonSequence normal_augment(const SkeletonSequence& x,
                                const AugmentationConfig& cfg, Rng& rng,
                                const SkeletonSequence& mix_partner,
                                AugmentRecord* record) {
  if (!x.values.same_shape(mix_partner.values)) {
    throw Error(ErrorKind::ShapeMismatch, "mix partner shape mismatch");
  }
  SkeletonSequence out = aug::add_noise(x, cfg.noise_sigma_normal, rng);
  if (record && cfg.noise_sigma_normal > 0.0) {
    record->entries.push_back({"noise", {cfg.noise_sigma_normal}});
  }
  if (rng.bernoulli(cfg.mix_prob)) {
    const double lambda = rng.uniform(cfg.mix_ratio_min, cfg.mix_ratio_max);
    float* p = out.values.data();
    const float* q = mix_partner.values.data();
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      p[i] = static_cast<float>(lambda * p[i] + (1.0 - lambda) * q[i]);
    }
    if (record) record->entries.push_back({"mix", {lambda}});
  }
  return out;
}

namespace {

// Score table: Sim(strong)=1, Sim(normal)=2, Dissim = 3 - Sim.
double sim_score(Strategy s, double sim_strong, double sim_normal) {
  return s == Strategy::strong ? sim_strong : sim_normal;
}

}  // namespace

double payoff_u1_scored(const Tensor<std::uint8_t>& mask,
                        const RegionAssignment& assignment, double sim_strong,
                        double sim_normal) {
  const double key_score =
      3.0 - sim_score(assignment.key_strategy, sim_strong, sim_normal);
  const double nonkey_score =
      sim_score(assignment.nonkey_strategy, sim_strong, sim_normal);
  double u = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    u += mask[i] ? key_score : nonkey_score;
  }
  return u;
}

double payoff_u1(const Tensor<std::uint8_t>& mask,
                 const RegionAssignment& assignment) {
  return payoff_u1_scored(mask, assignment, 1.0, 2.0);
}

RegionAssignment dominance_assignment(const Tensor<std::uint8_t>&) {
  return RegionAssignment{Strategy::strong, Strategy::normal};
}

namespace {

SkeletonSequence compose_one(const SkeletonSequence& x,
                             const SkeletonSequence& x_adain,
                             const KeyRegionMask& mask,
                             const AugmentationConfig& cfg, Rng& rng,
                             const SkeletonSequence& mix_partner,
                             AugmentRecord* record, bool full_pipeline) {
  if (!full_pipeline) {
    return normal_augment(x, cfg, rng, mix_partner, record);
  }
  SkeletonSequence key = strong_augment(x_adain, cfg, rng, record);
  SkeletonSequence non = normal_augment(x, cfg, rng, mix_partner, record);
  SkeletonSequence out = x;
  const std::size_t C = x.channels(), T = x.frames(), V = x.joints();
  if (mask.mask.dim(0) != T || mask.mask.dim(1) != V) {
    throw Error(ErrorKind::ShapeMismatch, "mask shape mismatch");
  }
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t t = 0; t < T; ++t) {
      const float* k = key.values.slice(c, t);
      const float* n = non.values.slice(c, t);
      const std::uint8_t* m = mask.mask.data() + t * V;
      float* dst = out.values.slice(c, t);
      for (std::size_t v = 0; v < V; ++v) dst[v] = m[v] ? k[v] : n[v];
    }
  }
  return out;
}

}  // namespace

AugmentedViews compose_views(const SkeletonSequence& x,
                             const SkeletonSequence& x_adain,
                             const KeyRegionMask& mask,
                             const AugmentationConfig& cfg, Rng rng_q,
                             Rng rng_k, const SkeletonSequence& mix_partner_q,
                             const SkeletonSequence& mix_partner_k) {
  if (!x.values.same_shape(x_adain.values)) {
    throw Error(ErrorKind::ShapeMismatch, "style-transferred shape mismatch");
  }
  AugmentedViews views;
  views.assignment = dominance_assignment(mask.mask);
  views.view_q = compose_one(x, x_adain, mask, cfg, rng_q, mix_partner_q,
                             &views.audit_q, true);
  views.view_k = compose_one(x, x_adain, mask, cfg, rng_k, mix_partner_k,
                             &views.audit_k, cfg.symmetric_views);
  views.view_q.label = x.label;
  views.view_k.label = x.label;
  return views;
}

}  // namespace dogclr
