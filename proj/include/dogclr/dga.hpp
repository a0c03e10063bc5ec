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

#include <array>
#include <string>
#include <vector>

#include "dogclr/dwkrm.hpp"
#include "dogclr/jdam.hpp"
#include "dogclr/rng.hpp"
#include "dogclr/skeleton.hpp"

namespace dogclr {

// Dominance-game partitioned augmentation. The strong catalog holds eight
// transforms applied in fixed order (shear, flip, rotation, axis mask, crop,
// temporal flip, Gaussian noise, Gaussian blur); the normal catalog is
// high-variance Gaussian noise plus skeleton mixing. Key regions of the
// style-transferred sample get the strong branch, non-key regions of the
// original get the normal branch, and the mask composes the two.

struct AugmentationConfig {
  // strong catalog
  double shear_amplitude = 0.5;
  double rotation_max_deg = 30.0;
  std::array<bool, 3> axis_mask_axes = {true, true, true};
  double crop_ratio_min = 0.6;
  double crop_ratio_max = 1.0;
  double noise_sigma_strong = 0.05;
  int blur_kernel = 5;
  double blur_sigma = 1.0;
  // per-transform application probabilities, catalog order
  std::array<double, 8> strong_probs = {0.5, 0.5, 0.5, 0.5,
                                        0.5, 0.5, 0.5, 0.5};
  bool force_one = true;  // redraw until at least one strong transform fires
  // normal catalog
  double noise_sigma_normal = 0.1;
  double mix_prob = 0.5;
  double mix_ratio_min = 0.6;
  double mix_ratio_max = 0.9;
  // both views through the full pipeline; false = key view normal-only
  bool symmetric_views = true;

  void validate() const;
};

enum class Strategy { strong, normal };

struct RegionAssignment {
  Strategy key_strategy = Strategy::strong;
  Strategy nonkey_strategy = Strategy::normal;
};

/// Audit record of one augmented view: names of the transforms that fired and
/// their sampled parameters.
struct AugmentRecord {
  struct Entry {
    std::string name;
    std::vector<double> params;
  };
  std::vector<Entry> entries;
};

struct AugmentedViews {
  SkeletonSequence view_q;
  SkeletonSequence view_k;
  RegionAssignment assignment;
  AugmentRecord audit_q;
  AugmentRecord audit_k;
};

/// JD-weighted style transfer: joints with clamped JD weight w keep w of the
/// content sample and take 1-w of the partner's statistics-transferred
/// signal. mu is the per-channel mean, sigma the per-channel standard
/// deviation (population), both over all (t, v). Zero content sigma is
/// floored at 1e-6 with a warning.
SkeletonSequence style_transfer(const SkeletonSequence& xi,
                                const SkeletonSequence& xj,
                                const JointDegreeWeights& jd);

SkeletonSequence strong_augment(const SkeletonSequence& x,
                                const AugmentationConfig& cfg, Rng& rng,
                                AugmentRecord* record = nullptr);

SkeletonSequence normal_augment(const SkeletonSequence& x,
                                const AugmentationConfig& cfg, Rng& rng,
                                const SkeletonSequence& mix_partner,
                                AugmentRecord* record = nullptr);

/// Region-game payoff under the default score table
/// (Sim(strong)=1, Sim(normal)=2, Dissim=3-Sim).
double payoff_u1(const Tensor<std::uint8_t>& mask,
                 const RegionAssignment& assignment);

/// Same payoff under a perturbed score table (for the robustness property).
double payoff_u1_scored(const Tensor<std::uint8_t>& mask,
                        const RegionAssignment& assignment, double sim_strong,
                        double sim_normal);

/// The dominance strategy: strong on key regions, normal elsewhere,
/// unconditionally.
RegionAssignment dominance_assignment(const Tensor<std::uint8_t>& mask);

/// Builds both augmented views: X_Key = strong(x_adain), X_Non = normal(x),
/// X_Final = M o X_Key + (1-M) o X_Non with the mask broadcast over
/// channels. The two views draw independent transform randomness.
AugmentedViews compose_views(const SkeletonSequence& x,
                             const SkeletonSequence& x_adain,
                             const KeyRegionMask& mask,
                             const AugmentationConfig& cfg, Rng rng_q,
                             Rng rng_k, const SkeletonSequence& mix_partner_q,
                             const SkeletonSequence& mix_partner_k);

// Individual strong transforms (deterministic given their parameters);
// exposed for tests and the audit trail.
namespace aug {
SkeletonSequence shear(const SkeletonSequence& x, const std::array<double, 6>& s);
SkeletonSequence flip_axis(const SkeletonSequence& x, std::size_t axis);
SkeletonSequence rotate(const SkeletonSequence& x, double rx_deg, double ry_deg,
                        double rz_deg);
SkeletonSequence axis_mask(const SkeletonSequence& x, std::size_t axis);
SkeletonSequence crop_resample(const SkeletonSequence& x, std::size_t start,
                               std::size_t length);
SkeletonSequence temporal_flip(const SkeletonSequence& x);
SkeletonSequence add_noise(const SkeletonSequence& x, double sigma, Rng& rng);
SkeletonSequence temporal_blur(const SkeletonSequence& x, int kernel,
                               double sigma);
}  // namespace aug

}  // namespace dogclr
