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

#include <cstdint>
#include <string>
#include <vector>

#include "dogclr/skeleton.hpp"

namespace dogclr {

// Parametric stick-figure motion templates over the toy_graph() skeleton.
// Each is a closed-form function of (t, v, latent phase):
//   wave:  circular oscillation of the "left" limb chain, amplitude growing
//          with chain depth
//   kick:  rotation of the "down" limb chain about the root in the x-y plane
//   jump:  global vertical bounce
//   still: rest pose only
// Gaussian noise of the configured sigma is added everywhere afterwards.
// Per-sample latent phases are disjoint between train ([0, pi)) and test
// ([pi, 2*pi)).

struct ToySpec {
  std::vector<std::string> classes;  // template ids
  std::size_t per_class = 0;         // train samples per class
  std::size_t per_class_test = 0;    // test samples per class (0 = per_class/2, min 1)
  std::size_t T = 32;
  std::size_t V = 9;
  double noise_sigma = 0.02;
};

struct ToyDataset {
  DatasetSplit train;
  DatasetSplit test;
};

bool is_known_toy_template(const std::string& id);

/// Deterministic in (spec, seed): the same inputs produce bit-identical
/// splits. Throws UnknownTemplate / ConfigError on bad specs.
ToyDataset generate_toy_dataset(const ToySpec& spec, std::uint64_t seed);

}  // namespace dogclr
