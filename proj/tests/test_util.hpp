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
#include <span>
#include <vector>

#include "dogclr/edgrq.hpp"
#include "dogclr/rng.hpp"
#include "dogclr/tensor.hpp"

namespace dogclr::testutil {

template <typename T>
Tensor<T> random_tensor(std::vector<std::size_t> shape, std::uint64_t seed,
                        double lo = -1.0, double hi = 1.0) {
  Tensor<T> t(std::move(shape));
  Rng rng = Rng::derive({seed, stream_key(RngStream::Oracle)});
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<T>(rng.uniform(lo, hi));
  }
  return t;
}

inline std::vector<float> random_unit_embedding(std::size_t dim,
                                                std::uint64_t seed) {
  Rng rng = Rng::derive({seed, stream_key(RngStream::Oracle), 1});
  std::vector<float> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    x = static_cast<float>(rng.normal());
    norm += static_cast<double>(x) * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x = static_cast<float>(x / norm);
  return v;
}

/// Unit 2-d embedding whose cosine similarity to (1, 0) is exactly `sim`.
inline std::vector<float> embedding_with_sim(double sim) {
  return {static_cast<float>(sim),
          static_cast<float>(std::sqrt(std::max(0.0, 1.0 - sim * sim)))};
}

/// O(|M|^2) replacement-game oracle: for every candidate slot, rebuild the
/// bank with that slot replaced and score it through the public
/// similarity_distribution + entropy_payoff path. Independent of the fast
/// incremental implementation.
inline ReplacementDecision select_replacement_bruteforce(
    const MemoryBank& bank, std::span<const float> incoming,
    std::span<const float> probe) {
  if (!bank.full()) {
    throw Error(ErrorKind::BankNotFull, "oracle requires a full bank");
  }
  ReplacementDecision decision;
  decision.payoffs.resize(bank.capacity());
  double best = 0.0;
  for (std::size_t i = 0; i < bank.capacity(); ++i) {
    std::vector<std::span<const float>> entries;
    entries.reserve(bank.capacity());
    for (std::size_t j = 0; j < bank.capacity(); ++j) {
      entries.push_back(j == i ? incoming : bank.entry(j));
    }
    const auto p = similarity_distribution(probe, entries);
    const double h = entropy_payoff(p);
    decision.payoffs[i] = h;
    if (i == 0 || h > best) {
      best = h;
      decision.index = i;
      decision.tie_count = 1;
    } else if (h == best) {
      ++decision.tie_count;
    }
  }
  return decision;
}

inline double rel_err(double got, double want, double floor = 1e-10) {
  const double denom = std::max({std::abs(got), std::abs(want), floor});
  return std::abs(got - want) / denom;
}

}  // namespace dogclr::testutil
