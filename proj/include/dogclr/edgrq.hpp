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
#include <span>
#include <string>
#include <vector>

#include "dogclr/error.hpp"

namespace dogclr {

// Negative-sample memory bank. Both policies append until the bank is full;
// once full, FIFO overwrites the oldest slot while EDGRQ plays the
// replacement game: put the incoming key into the slot whose replacement
// maximizes the entropy of the softmax similarity distribution between a
// probe embedding and the bank.

enum class BankPolicy { fifo, edgrq };

const char* bank_policy_name(BankPolicy p);
BankPolicy bank_policy_from_name(const std::string& name);

struct ReplacementDecision {
  std::size_t index = 0;         // smallest argmax of the payoff vector
  std::vector<double> payoffs;   // u2 per candidate slot
  std::size_t tie_count = 1;     // number of slots attaining the max
};

/// Per-replacement telemetry: the chosen slot, its payoff, and the payoff of
/// the slot FIFO would have replaced.
struct BankEvent {
  std::size_t chosen_index = 0;
  double max_payoff = 0.0;
  double fifo_payoff = 0.0;
  std::size_t tie_count = 1;
};

struct BankStats {
  std::uint64_t appends = 0;
  std::uint64_t replacements = 0;
  double sum_max_payoff = 0.0;
  double sum_fifo_payoff = 0.0;
};

/// Softmax of cosine similarities between the query and every entry
/// (embeddings are expected L2-normalized, so the dot product is the
/// cosine). Components are positive and sum to 1.
std::vector<double> similarity_distribution(
    std::span<const float> query, const std::vector<std::span<const float>>& entries);

/// Shannon entropy -sum p ln p with 0 ln 0 := 0. Validates p >= 0 and
/// sum(p) = 1 within 1e-6.
double entropy_payoff(std::span<const double> p);

class MemoryBank {
 public:
  MemoryBank() = default;
  MemoryBank(std::size_t capacity, std::size_t dim, BankPolicy policy);

  std::size_t capacity() const { return capacity_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return count_; }
  bool full() const { return count_ == capacity_; }
  BankPolicy policy() const { return policy_; }
  const BankStats& stats() const { return stats_; }

  std::span<const float> entry(std::size_t i) const {
    return {store_.data() + i * dim_, dim_};
  }
  std::vector<std::span<const float>> entries() const;

  /// Entries in logical FIFO order (oldest first). Meaningful for the fifo
  /// policy; under edgrq the storage order is returned once replacements
  /// begin.
  std::vector<std::span<const float>> ordered_entries() const;

  /// Entropy-game slot selection for one incoming key against a probe.
  /// O(capacity) after the O(capacity * dim) similarity pass: replacing one
  /// entry changes a single exponential term, so each candidate's softmax
  /// sum and entropy come from O(1) delta updates. Requires a full bank.
  ReplacementDecision select_replacement(std::span<const float> incoming,
                                         std::span<const float> probe) const;

  /// Inserts a batch of keys. probes must be key-aligned (used by the edgrq
  /// policy once the bank is full; ignored before that and by fifo). Events,
  /// when requested, record one entry per played game.
  void enqueue(const std::vector<std::span<const float>>& keys,
               const std::vector<std::span<const float>>& probes,
               std::vector<BankEvent>* events = nullptr);

  // checkpoint access
  const std::vector<float>& raw_store() const { return store_; }
  std::size_t cursor() const { return cursor_; }
  void restore(std::vector<float> store, std::size_t count, std::size_t cursor,
               BankStats stats);

 private:
  std::size_t capacity_ = 0;
  std::size_t dim_ = 0;
  BankPolicy policy_ = BankPolicy::fifo;
  std::vector<float> store_;  // capacity * dim
  std::size_t count_ = 0;
  std::size_t cursor_ = 0;  // next FIFO slot
  BankStats stats_;
};

}  // namespace dogclr
