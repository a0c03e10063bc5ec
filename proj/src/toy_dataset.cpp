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

#include "dogclr/toy_dataset.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "dogclr/error.hpp"
#include "dogclr/graphio.hpp"
#include "dogclr/rng.hpp"

namespace dogclr {

namespace {

constexpr double kPi = std::numbers::pi;

enum class Template { wave, kick, jump, still };

Template template_from_id(const std::string& id) {
  if (id == "wave") return Template::wave;
  if (id == "kick") return Template::kick;
  if (id == "jump") return Template::jump;
  if (id == "still") return Template::still;
  throw Error(ErrorKind::UnknownTemplate, "unknown toy template '" + id + "'");
}

// Limb chain layout matching toy_graph(): joint 0 is the root, joint v > 0
// sits on limb (v-1) % 4 at depth (v-1)/4 + 1.
struct JointSite {
  int limb;      // -1 for root
  int depth;     // 0 for root
};

JointSite site_of(std::size_t v) {
  if (v == 0) return {-1, 0};
  return {static_cast<int>((v - 1) % 4), static_cast<int>((v - 1) / 4 + 1)};
}

std::array<double, 3> rest_pose(std::size_t v) {
  const JointSite s = site_of(v);
  const double d = s.depth;
  switch (s.limb) {
    case 0: return {0.0, 0.4 * d, 0.0};    // up (spine/head)
    case 1: return {-0.4 * d, 0.2 * d, 0.0};  // left arm
    case 2: return {0.4 * d, 0.2 * d, 0.0};   // right arm
    case 3: return {0.0, -0.4 * d, 0.0};   // leg
    default: return {0.0, 0.0, 0.0};       // root
  }
}

std::array<double, 3> template_pose(Template tpl, std::size_t v, double tau,
                                    double phase, double amp) {
  std::array<double, 3> p = rest_pose(v);
  const JointSite s = site_of(v);
  switch (tpl) {
    case Template::wave:
      if (s.limb == 1) {
        const double a = 0.3 * amp * s.depth;
        p[0] += a * std::sin(2.0 * kPi * 2.0 * tau + phase);
        p[2] += 0.5 * a * std::cos(2.0 * kPi * 2.0 * tau + phase);
      }
      break;
    case Template::kick:
      if (s.limb == 3) {
        const double theta = 0.6 * amp * std::sin(2.0 * kPi * 1.5 * tau + phase);
        const double x = p[0], y = p[1];
        p[0] = x * std::cos(theta) - y * std::sin(theta);
        p[1] = x * std::sin(theta) + y * std::cos(theta);
      }
      break;
    case Template::jump:
      p[1] += 0.5 * amp * std::abs(std::sin(2.0 * kPi * tau + phase));
      break;
    case Template::still:
      break;
  }
  return p;
}

SkeletonSequence make_sample(Template tpl, int label, const ToySpec& spec,
                             std::uint64_t seed, RngStream split_stream,
                             std::size_t class_idx, std::size_t sample_idx) {
  Rng rng = Rng::derive({seed, stream_key(split_stream), class_idx, sample_idx});
  const bool is_test = split_stream == RngStream::ToyTest;
  const double phase = is_test ? rng.uniform(kPi, 2.0 * kPi)
                               : rng.uniform(0.0, kPi);
  const double amp = rng.uniform(0.8, 1.2);

  SkeletonSequence seq;
  seq.values = Tensor<float>({3, spec.T, spec.V});
  seq.label = label;
  seq.source = "toy";
  for (std::size_t t = 0; t < spec.T; ++t) {
    const double tau = spec.T > 1
                           ? static_cast<double>(t) / static_cast<double>(spec.T - 1)
                           : 0.0;
    for (std::size_t v = 0; v < spec.V; ++v) {
      const auto p = template_pose(tpl, v, tau, phase, amp);
      for (std::size_t c = 0; c < 3; ++c) {
        double value = p[c];
        if (spec.noise_sigma > 0.0) value += rng.normal(0.0, spec.noise_sigma);
        seq.values(c, t, v) = static_cast<float>(value);
      }
    }
  }
  return seq;
}

}  // namespace

bool is_known_toy_template(const std::string& id) {
  return id == "wave" || id == "kick" || id == "jump" || id == "still";
}

ToyDataset generate_toy_dataset(const ToySpec& spec, std::uint64_t seed) {
  if (spec.classes.empty()) {
    throw Error(ErrorKind::ConfigError, "toy spec needs at least one class");
  }
  if (spec.per_class < 1) {
    throw Error(ErrorKind::ConfigError, "per_class must be >= 1");
  }
  if (spec.V < 5) {
    throw Error(ErrorKind::ConfigError, "toy skeleton needs V >= 5");
  }
  if (spec.T < 2) {
    throw Error(ErrorKind::ConfigError, "toy sequences need T >= 2");
  }
  std::vector<Template> templates;
  templates.reserve(spec.classes.size());
  for (const auto& id : spec.classes) templates.push_back(template_from_id(id));

  const std::size_t per_test =
      spec.per_class_test > 0 ? spec.per_class_test
                              : std::max<std::size_t>(1, spec.per_class / 2);

  ToyDataset out;
  out.train.role = SplitRole::train;
  out.test.role = SplitRole::test;
  out.train.graph = toy_graph(spec.V);
  out.test.graph = out.train.graph;

  for (std::size_t ci = 0; ci < templates.size(); ++ci) {
    for (std::size_t i = 0; i < spec.per_class; ++i) {
      out.train.sequences.push_back(make_sample(
          templates[ci], static_cast<int>(ci), spec, seed, RngStream::ToyTrain,
          ci, i));
    }
    for (std::size_t i = 0; i < per_test; ++i) {
      out.test.sequences.push_back(make_sample(
          templates[ci], static_cast<int>(ci), spec, seed, RngStream::ToyTest,
          ci, i));
    }
  }
  out.train.validate();
  out.test.validate();
  return out;
}

}  // namespace dogclr
