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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dogclr/dga.hpp"
#include "dogclr/graphio.hpp"
#include "test_util.hpp"

using namespace dogclr;
using testutil::random_tensor;

namespace {

SkeletonSequence seq_from(Tensor<float> values) {
  SkeletonSequence s;
  s.values = std::move(values);
  return s;
}

SkeletonSequence random_seq(std::size_t T, std::size_t V, std::uint64_t seed) {
  return seq_from(random_tensor<float>({3, T, V}, seed, -1.0, 1.0));
}

AugmentationConfig identity_config() {
  AugmentationConfig cfg;
  cfg.strong_probs = {0, 0, 0, 0, 0, 0, 0, 0};
  cfg.force_one = false;
  cfg.noise_sigma_normal = 0.0;
  cfg.mix_prob = 0.0;
  return cfg;
}

JointDegreeWeights uniform_jd(std::size_t V) {
  JointDegreeWeights jd;
  jd.weights.assign(V, 1.0);
  return jd;
}

Tensor<std::uint8_t> random_mask(std::size_t T, std::size_t V, Rng& rng) {
  Tensor<std::uint8_t> m({T, V});
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = rng.bernoulli(0.5) ? 1 : 0;
  }
  return m;
}

bool has_both(const Tensor<std::uint8_t>& m) {
  bool any0 = false, any1 = false;
  for (std::size_t i = 0; i < m.size(); ++i) {
    any0 |= m[i] == 0;
    any1 |= m[i] == 1;
  }
  return any0 && any1;
}

const std::array<RegionAssignment, 4> kProfiles = {
    RegionAssignment{Strategy::strong, Strategy::normal},
    RegionAssignment{Strategy::strong, Strategy::strong},
    RegionAssignment{Strategy::normal, Strategy::normal},
    RegionAssignment{Strategy::normal, Strategy::strong}};

}  // namespace

TEST_CASE("style transfer: xi = xj is an identity within 1e-6") {
  const auto jd = joint_degree_weights(toy_graph(9));
  const auto x = random_seq(8, 9, 5);
  const auto out = style_transfer(x, x, jd);
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    CHECK(std::abs(out.values[i] - x.values[i]) <= 1e-6f);
  }
}

TEST_CASE("style transfer: jd clamped to 1 keeps the content exactly") {
  JointDegreeWeights jd;
  jd.weights = {1.0, 2.5, 1.0, 1.7, 1.0};  // all clamp to 1
  const auto xi = random_seq(6, 5, 7);
  const auto xj = random_seq(6, 5, 8);
  const auto out = style_transfer(xi, xj, jd);
  CHECK(out.values == xi.values);
}

TEST_CASE("style transfer: scalar hand case gives (8, 10)") {
  // C=1 is not expressible with the 3-channel sequences, so place the scalar
  // case in channel 0 of a V=1 skeleton and keep the other channels zero...
  // values: xi = (0,2) over T=2 (mu=1, sigma=1), xj = (4,6) (mu=5, sigma=1).
  SkeletonSequence xi = seq_from(Tensor<float>({1, 2, 1}));
  SkeletonSequence xj = seq_from(Tensor<float>({1, 2, 1}));
  xi.values(0, 0, 0) = 0.0f;
  xi.values(0, 1, 0) = 2.0f;
  xj.values(0, 0, 0) = 4.0f;
  xj.values(0, 1, 0) = 6.0f;
  JointDegreeWeights jd;
  jd.weights = {0.0};
  const auto out = style_transfer(xi, xj, jd);
  CHECK(out.values(0, 0, 0) == 8.0f);
  CHECK(out.values(0, 1, 0) == 10.0f);
}

TEST_CASE("style transfer: zero content variance floors sigma, no abort") {
  SkeletonSequence xi = seq_from(Tensor<float>({3, 4, 5}, 1.0f));  // constant
  const auto xj = random_seq(4, 5, 9);
  JointDegreeWeights jd = uniform_jd(5);
  jd.weights.assign(5, 0.25);
  const auto out = style_transfer(xi, xj, jd);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    CHECK(std::isfinite(out.values[i]));
  }
}

TEST_CASE("strong augment: identity when disabled") {
  const auto x = random_seq(10, 6, 11);
  auto cfg = identity_config();
  Rng rng(1);
  const auto out = strong_augment(x, cfg, rng);
  CHECK(out.values == x.values);
}

TEST_CASE("strong augment: 180-degree rotation about the vertical axis") {
  const auto x = random_seq(5, 6, 13);
  const auto r = aug::rotate(x, 0.0, 180.0, 0.0);
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t v = 0; v < 6; ++v) {
      CHECK(r.values(0, t, v) ==
            doctest::Approx(-x.values(0, t, v)).epsilon(1e-6));
      CHECK(r.values(1, t, v) == doctest::Approx(x.values(1, t, v)).epsilon(1e-6));
      CHECK(r.values(2, t, v) ==
            doctest::Approx(-x.values(2, t, v)).epsilon(1e-6));
    }
  }
  const auto rr = aug::rotate(r, 0.0, 180.0, 0.0);
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    CHECK(std::abs(rr.values[i] - x.values[i]) <= 1e-6f);
  }
}

TEST_CASE("strong augment: axis masking zeroes exactly one channel") {
  const auto x = random_seq(5, 6, 17);
  const auto out = aug::axis_mask(x, 0);
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t v = 0; v < 6; ++v) {
      CHECK(out.values(0, t, v) == 0.0f);
      CHECK(out.values(1, t, v) == x.values(1, t, v));
      CHECK(out.values(2, t, v) == x.values(2, t, v));
    }
  }
}

TEST_CASE("strong augment: temporal pieces behave") {
  const auto x = random_seq(9, 4, 19);
  const auto flipped = aug::temporal_flip(aug::temporal_flip(x));
  CHECK(flipped.values == x.values);

  const auto cropped = aug::crop_resample(x, 2, 5);
  CHECK(cropped.values.shape() == x.values.shape());

  SkeletonSequence constant = seq_from(Tensor<float>({3, 9, 4}, 2.5f));
  const auto blurred = aug::temporal_blur(constant, 5, 1.0);
  for (std::size_t i = 0; i < blurred.values.size(); ++i) {
    CHECK(blurred.values[i] == doctest::Approx(2.5f).epsilon(1e-6));
  }
}

TEST_CASE("strong augment: force_one resamples until something fires") {
  const auto x = random_seq(8, 5, 23);
  AugmentationConfig cfg = identity_config();
  cfg.force_one = true;
  cfg.strong_probs = {0.05, 0, 0, 0, 0, 0, 0, 0};  // rare shear, forced
  Rng rng(3);
  AugmentRecord record;
  const auto out = strong_augment(x, cfg, rng, &record);
  CHECK(record.entries.size() == 1);
  CHECK(record.entries[0].name == "shear");
  CHECK(out.values.shape() == x.values.shape());
}

TEST_CASE("normal augment: identity, degenerate mixes") {
  const auto x = random_seq(6, 5, 29);
  const auto partner = random_seq(6, 5, 31);
  AugmentationConfig cfg = identity_config();
  Rng rng(5);
  CHECK(normal_augment(x, cfg, rng, partner).values == x.values);

  // lambda = 1 mixing is noise-only
  cfg.mix_prob = 1.0;
  cfg.mix_ratio_min = cfg.mix_ratio_max = 1.0;
  Rng rng2(6);
  CHECK(normal_augment(x, cfg, rng2, partner).values == x.values);

  // lambda = 0.5 with the sample itself as partner and zero noise
  cfg.mix_ratio_min = cfg.mix_ratio_max = 0.5;
  Rng rng3(7);
  const auto mixed = normal_augment(x, cfg, rng3, x);
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    CHECK(mixed.values[i] == doctest::Approx(x.values[i]).epsilon(1e-6));
  }
}

TEST_CASE("payoff: hand cases") {
  Tensor<std::uint8_t> mask({1, 2});
  mask[0] = 1;
  mask[1] = 0;
  CHECK(payoff_u1(mask, kProfiles[0]) == 4.0);  // (3-1) + 2
  CHECK(payoff_u1(mask, kProfiles[1]) == 3.0);
  CHECK(payoff_u1(mask, kProfiles[2]) == 3.0);
  CHECK(payoff_u1(mask, kProfiles[3]) == 2.0);

  Tensor<std::uint8_t> all_key({1, 2}, 1);
  CHECK(payoff_u1(all_key, kProfiles[0]) == 4.0);  // 2*T*V
  Tensor<std::uint8_t> no_key({1, 2}, 0);
  CHECK(payoff_u1(no_key, kProfiles[0]) == 4.0);  // only similarity survives
  CHECK(payoff_u1(no_key, kProfiles[2]) == 4.0);
}

TEST_CASE("dominance: (strong, normal) maximizes u1 over 1000 random masks") {
  Rng rng(2024);
  int checked = 0;
  while (checked < 1000) {
    const std::size_t T = 1 + rng.uniform_int(6);
    const std::size_t V = 1 + rng.uniform_int(8);
    const auto mask = random_mask(T, V, rng);
    if (!has_both(mask)) continue;
    ++checked;
    const auto assignment = dominance_assignment(mask);
    CHECK(assignment.key_strategy == Strategy::strong);
    CHECK(assignment.nonkey_strategy == Strategy::normal);
    const double best = payoff_u1(mask, kProfiles[0]);
    for (std::size_t p = 1; p < 4; ++p) {
      CHECK(best > payoff_u1(mask, kProfiles[p]));
    }
  }
}

TEST_CASE("dominance: robust to score-table perturbations below 0.5") {
  Rng rng(4048);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor<std::uint8_t> mask;
    do {
      const std::size_t T = 1 + rng.uniform_int(5);
      const std::size_t V = 2 + rng.uniform_int(6);
      mask = random_mask(T, V, rng);
    } while (!has_both(mask));
    const double sim_strong = 1.0 + rng.uniform(-0.499, 0.499);
    const double sim_normal = 2.0 + rng.uniform(-0.499, 0.499);
    std::size_t argmax = 0;
    double best = payoff_u1_scored(mask, kProfiles[0], sim_strong, sim_normal);
    for (std::size_t p = 1; p < 4; ++p) {
      const double u = payoff_u1_scored(mask, kProfiles[p], sim_strong, sim_normal);
      if (u > best) {
        best = u;
        argmax = p;
      }
    }
    CHECK(argmax == 0);
  }
}

TEST_CASE("dominance on a keyless mask still returns (strong, normal)") {
  Tensor<std::uint8_t> mask({2, 3}, 0);
  const auto a = dominance_assignment(mask);
  CHECK(a.key_strategy == Strategy::strong);
  CHECK(a.nonkey_strategy == Strategy::normal);
  // payoff ties with (normal, normal): no key cells exist
  CHECK(payoff_u1(mask, a) == payoff_u1(mask, kProfiles[2]));
}

TEST_CASE("compose views: mask extremes select one branch exactly") {
  const auto x = random_seq(6, 5, 41);
  const auto x_adain = random_seq(6, 5, 43);
  AugmentationConfig cfg = identity_config();
  const auto partner = random_seq(6, 5, 47);

  KeyRegionMask ones = all_ones_mask(6, 5);
  auto views = compose_views(x, x_adain, ones, cfg, Rng(1), Rng(2), partner,
                             partner);
  CHECK(views.view_q.values == x_adain.values);  // X_Final = X_Key

  KeyRegionMask zeros = all_ones_mask(6, 5);
  for (std::size_t i = 0; i < zeros.mask.size(); ++i) zeros.mask[i] = 0;
  views = compose_views(x, x_adain, zeros, cfg, Rng(3), Rng(4), partner,
                        partner);
  CHECK(views.view_q.values == x.values);  // X_Final = X_Non
}

TEST_CASE("compose views: checkerboard mask stitches the two branches") {
  const auto x = random_seq(4, 6, 53);
  const auto x_adain = random_seq(4, 6, 59);
  AugmentationConfig cfg = identity_config();
  KeyRegionMask mask = all_ones_mask(4, 6);
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t v = 0; v < 6; ++v) {
      mask.mask(t, v) = static_cast<std::uint8_t>((t + v) % 2);
    }
  }
  const auto views =
      compose_views(x, x_adain, mask, cfg, Rng(5), Rng(6), x, x);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t t = 0; t < 4; ++t) {
      for (std::size_t v = 0; v < 6; ++v) {
        const float expect = mask.mask(t, v) ? x_adain.values(c, t, v)
                                             : x.values(c, t, v);
        CHECK(views.view_q.values(c, t, v) == expect);
      }
    }
  }
}

TEST_CASE("compose views: full pipeline keeps shape and finiteness") {
  const auto graph = toy_graph(9);
  const auto jd = joint_degree_weights(graph);
  const auto x = random_seq(12, 9, 61);
  const auto style = random_seq(12, 9, 67);
  const auto x_adain = style_transfer(x, style, jd);
  AugmentationConfig cfg;  // defaults: everything enabled at 0.5
  KeyRegionMask mask = all_ones_mask(12, 9);
  Rng mrng(71);
  for (std::size_t i = 0; i < mask.mask.size(); ++i) {
    mask.mask[i] = mrng.bernoulli(0.3) ? 1 : 0;
  }
  const auto views = compose_views(x, x_adain, mask, cfg, Rng(8), Rng(9),
                                   random_seq(12, 9, 73), random_seq(12, 9, 79));
  CHECK(views.view_q.values.shape() == x.values.shape());
  CHECK(views.view_k.values.shape() == x.values.shape());
  for (std::size_t i = 0; i < views.view_q.values.size(); ++i) {
    CHECK(std::isfinite(views.view_q.values[i]));
    CHECK(std::isfinite(views.view_k.values[i]));
  }
  CHECK_FALSE(views.audit_q.entries.empty());
}

TEST_CASE("compose views: asymmetric mode keeps the key view normal-only") {
  const auto x = random_seq(5, 6, 101);
  const auto x_adain = random_seq(5, 6, 103);
  AugmentationConfig cfg = identity_config();
  cfg.symmetric_views = false;
  const KeyRegionMask ones = all_ones_mask(5, 6);
  const auto views = compose_views(x, x_adain, ones, cfg, Rng(1), Rng(2), x, x);
  CHECK(views.view_q.values == x_adain.values);  // strong branch everywhere
  CHECK(views.view_k.values == x.values);        // normal-only key view
}

TEST_CASE("compose views: jd = 1 everywhere plus disabled transforms is exact") {
  // 2-regular cycle graph: every JD weight is exactly 1.
  const auto cycle = SkeletonGraph::from_edges(
      6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
  const auto jd = joint_degree_weights(cycle);
  const auto x = random_seq(7, 6, 83);
  const auto style = random_seq(7, 6, 89);
  const auto x_adain = style_transfer(x, style, jd);
  CHECK(x_adain.values == x.values);

  AugmentationConfig cfg = identity_config();
  KeyRegionMask mask = all_ones_mask(7, 6);
  Rng mrng(97);
  for (std::size_t i = 0; i < mask.mask.size(); ++i) {
    mask.mask[i] = mrng.bernoulli(0.5) ? 1 : 0;
  }
  const auto views = compose_views(x, x_adain, mask, cfg, Rng(10), Rng(11), x, x);
  CHECK(views.view_q.values == x.values);
  CHECK(views.view_k.values == x.values);
}
