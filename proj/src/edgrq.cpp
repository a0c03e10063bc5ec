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

#include "dogclr/edgrq.hpp"

#include <cmath>
#include <cstring>

#include "dogclr/kernels/kernels.hpp"

namespace dogclr {

const char* bank_policy_name(BankPolicy p) {
  return p == BankPolicy::fifo ? "fifo" : "edgrq";
}

BankPolicy bank_policy_from_name(const std::string& name) {
  if (name == "fifo") return BankPolicy::fifo;
  if (name == "edgrq") return BankPolicy::edgrq;
  throw Error(ErrorKind::ConfigError, "unknown bank policy '" + name + "'");
}

std::vector<double> similarity_distribution(
    std::span<const float> query,
    const std::vector<std::span<const float>>& entries) {
  if (entries.empty()) {
    throw Error(ErrorKind::EmptyBank, "similarity distribution over no entries");
  }
  std::vector<double> p(entries.size());
  double denom = 0.0;
  for (std::size_t j = 0; j < entries.size(); ++j) {
    if (entries[j].size() != query.size()) {
      throw Error(ErrorKind::ShapeMismatch, "entry dimension mismatch");
    }
    const double sim = kernels::dot<float>(query.data(), entries[j].data(),
                                           query.size());
    p[j] = std::exp(sim);
    denom += p[j];
  }
  for (double& v : p) v /= denom;
  return p;
}

double entropy_payoff(std::span<const double> p) {
  double total = 0.0;
  for (double v : p) {
    if (v < -1e-12 || !std::isfinite(v)) {
      throw Error(ErrorKind::InvalidDistribution, "negative or non-finite mass");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw Error(ErrorKind::InvalidDistribution, "probabilities must sum to 1");
  }
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

MemoryBank::MemoryBank(std::size_t capacity, std::size_t dim, BankPolicy policy)
    : capacity_(capacity), dim_(dim), policy_(policy) {
  if (capacity == 0 || dim == 0) {
    throw Error(ErrorKind::ConfigError, "bank capacity and dim must be > 0");
  }
  store_.assign(capacity * dim, 0.0f);
}

std::vector<std::span<const float>> MemoryBank::entries() const {
  std::vector<std::span<const float>> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < count_; ++i) out.push_back(entry(i));
  return out;
}

std::vector<std::span<const float>> MemoryBank::ordered_entries() const {
  std::vector<std::span<const float>> out;
  out.reserve(count_);
  if (count_ < capacity_) {
    for (std::size_t i = 0; i < count_; ++i) out.push_back(entry(i));
    return out;
  }
  for (std::size_t i = 0; i < capacity_; ++i) {
    out.push_back(entry((cursor_ + i) % capacity_));
  }
  return out;
}

ReplacementDecision MemoryBank::select_replacement(
    std::span<const float> incoming, std::span<const float> probe) const {
  if (!full()) {
    throw Error(ErrorKind::BankNotFull,
                "replacement game requires a full bank");
  }
  if (incoming.size() != dim_ || probe.size() != dim_) {
    throw Error(ErrorKind::ShapeMismatch, "embedding dimension mismatch");
  }
  // One similarity pass; each candidate bank then differs from the current
  // one in a single exponential term.
  std::vector<double> exps(capacity_), sims(capacity_);
  double sum_exp = 0.0, sum_exp_sim = 0.0;
  for (std::size_t j = 0; j < capacity_; ++j) {
    const double sim =
        kernels::dot<float>(probe.data(), store_.data() + j * dim_, dim_);
    sims[j] = sim;
    exps[j] = std::exp(sim);
    sum_exp += exps[j];
    sum_exp_sim += exps[j] * sim;
  }
  const double sim_in = kernels::dot<float>(probe.data(), incoming.data(), dim_);
  const double exp_in = std::exp(sim_in);

  ReplacementDecision decision;
  decision.payoffs.resize(capacity_);
  double best = -1.0;
  for (std::size_t i = 0; i < capacity_; ++i) {
    const double S = sum_exp - exps[i] + exp_in;
    const double W = sum_exp_sim - exps[i] * sims[i] + exp_in * sim_in;
    // H = -sum_j p_j ln p_j with p_j = e_j / S and ln p_j = sim_j - ln S.
    const double h = std::log(S) - W / S;
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

void MemoryBank::enqueue(const std::vector<std::span<const float>>& keys,
                         const std::vector<std::span<const float>>& probes,
                         std::vector<BankEvent>* events) {
  if (policy_ == BankPolicy::edgrq && probes.size() != keys.size()) {
    throw Error(ErrorKind::ShapeMismatch, "probe batch must match key batch");
  }
  for (std::size_t n = 0; n < keys.size(); ++n) {
    const auto& key = keys[n];
    if (key.size() != dim_) {
      throw Error(ErrorKind::ShapeMismatch, "key dimension mismatch");
    }
    if (!full()) {
      // Fill phase: both policies append.
      std::memcpy(store_.data() + cursor_ * dim_, key.data(),
                  dim_ * sizeof(float));
      cursor_ = (cursor_ + 1) % capacity_;
      ++count_;
      ++stats_.appends;
      continue;
    }
    if (policy_ == BankPolicy::fifo) {
      std::memcpy(store_.data() + cursor_ * dim_, key.data(),
                  dim_ * sizeof(float));
      cursor_ = (cursor_ + 1) % capacity_;
      ++stats_.appends;
      continue;
    }
    const ReplacementDecision d = select_replacement(key, probes[n]);
    BankEvent event;
    event.chosen_index = d.index;
    event.max_payoff = d.payoffs[d.index];
    event.fifo_payoff = d.payoffs[cursor_];
    event.tie_count = d.tie_count;
    if (events) events->push_back(event);
    stats_.replacements += 1;
    stats_.sum_max_payoff += event.max_payoff;
    stats_.sum_fifo_payoff += event.fifo_payoff;
    std::memcpy(store_.data() + d.index * dim_, key.data(),
                dim_ * sizeof(float));
    // Keep the virtual FIFO pointer moving so the fifo-equivalent payoff in
    // the telemetry stays meaningful.
    cursor_ = (cursor_ + 1) % capacity_;
  }
}

void MemoryBank::restore(std::vector<float> store, std::size_t count,
                         std::size_t cursor, BankStats stats) {
  if (store.size() != capacity_ * dim_ || count > capacity_ ||
      cursor >= std::max<std::size_t>(capacity_, 1)) {
    throw Error(ErrorKind::ShapeMismatch, "bank restore shape mismatch");
  }
  store_ = std::move(store);
  count_ = count;
  cursor_ = cursor;
  stats_ = stats;
}

}  // namespace dogclr
