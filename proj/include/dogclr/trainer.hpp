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
#include <functional>
#include <span>
#include <vector>

#include "dogclr/dga.hpp"
#include "dogclr/dwkrm.hpp"
#include "dogclr/edgrq.hpp"
#include "dogclr/encoder.hpp"
#include "dogclr/skeleton.hpp"

namespace dogclr {

// MoCo-style contrastive pretraining: per step, (1) key-region masks on the
// unaugmented batch (key branch + benchmark-pose embedding), (2) two
// partitioned augmented views per sample, (3) query/key encoding with no
// gradient into the key branch, (4) InfoNCE against the bank, (5) SGD step
// on the query branch, (6) momentum update, (7) bank enqueue.

struct OptimizerConfig {
  double lr = 0.1;  // scaled by batch_size / 128 when scale_lr_by_batch
  double weight_decay = 1e-4;
  double momentum = 0.9;
  enum class Schedule { cosine, constant } schedule = Schedule::cosine;
  bool scale_lr_by_batch = true;
};

struct TrainConfig {
  StreamKind stream = StreamKind::joint;
  int epochs = 300;
  int batch_size = 128;
  OptimizerConfig optimizer;
  double temperature = 0.2;
  double momentum = 0.99;  // key-branch momentum coefficient
  std::size_t bank_capacity = 32768;
  enum class ProbeMode { key, batch_mean } probe = ProbeMode::key;
  bool use_dwkrm = true;
  bool use_dga = true;
  bool use_edgrq = true;  // false = FIFO bank (the Basic Augmentation bank)
  std::uint64_t seed = 1;
  ThetaSpec theta;
  AugmentationConfig augment;
  EncoderConfig encoder;

  BankPolicy effective_policy() const {
    return use_edgrq ? BankPolicy::edgrq : BankPolicy::fifo;
  }
  void validate() const;
};

struct StepMetrics {
  std::int64_t step = 0;
  int epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
  std::size_t bank_size = 0;
  // bank telemetry for this step (games played once the bank is full)
  std::size_t games = 0;
  double mean_max_payoff = 0.0;
  double mean_fifo_payoff = 0.0;
  // code-path audit flags
  bool mask_from_dwkrm = false;
  bool dga_path = false;
  const char* bank_policy = "fifo";
  double wall_ms = 0.0;  // timing sidecar only; never part of metrics files
  std::vector<BankEvent> events;  // one per replacement game this step
};

struct TrainState {
  EncoderPair<float> pair;
  MemoryBank bank;
  std::vector<float> opt_velocity;
  std::int64_t step = 0;
  int epoch = 0;  // next epoch to run
};

/// Mean InfoNCE over the batch:
///   -log exp(q.k/tau) / (exp(q.k/tau) + sum_j exp(q.m_j/tau)).
/// An empty bank leaves only the positive logit (loss 0 at q = k).
double info_nce_loss(const std::vector<std::vector<float>>& q,
                     const std::vector<std::vector<float>>& k,
                     const MemoryBank& bank, double tau);

class Trainer {
 public:
  /// data must already be stream-derived and normalized; gsbp is the mean of
  /// that same data.
  Trainer(TrainConfig cfg, DatasetSplit data, Gsbp gsbp);

  const TrainConfig& config() const { return cfg_; }
  TrainState& state() { return state_; }
  const TrainState& state() const { return state_; }
  const DatasetSplit& data() const { return data_; }
  const JointDegreeWeights& jd() const { return jd_; }
  const Gsbp& gsbp() const { return gsbp_; }

  int steps_per_epoch() const;
  std::int64_t total_steps() const;
  double lr_at(std::int64_t step) const;
  /// Deterministic shuffled sample order for one epoch.
  std::vector<std::size_t> epoch_order(int epoch) const;

  StepMetrics train_step(std::span<const std::size_t> indices);

  /// Runs epochs [state.epoch, cfg.epochs). on_step fires after every step;
  /// on_epoch_end after each epoch (checkpoint hook) and may return false to
  /// stop early (an interruption).
  void run(const std::function<void(const StepMetrics&)>& on_step,
           const std::function<bool(int)>& on_epoch_end = nullptr);

  /// Per-sample key-region masks for a batch (the step-1 computation),
  /// exposed for the visualize command.
  std::vector<KeyRegionMask> compute_masks(
      std::span<const std::size_t> indices) const;

  /// Optional augmentation audit hook, fired per (sample, view) in batch
  /// order: (step, sample index, view, record).
  std::function<void(std::int64_t, std::size_t, int, const AugmentRecord&)>
      audit_sink;

 private:
  TrainConfig cfg_;
  DatasetSplit data_;
  Gsbp gsbp_;
  JointDegreeWeights jd_;
  TrainState state_;
};

}  // namespace dogclr
