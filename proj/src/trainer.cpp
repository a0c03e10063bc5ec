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

#include "dogclr/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "dogclr/parallel.hpp"

namespace dogclr {

void TrainConfig::validate() const {
  if (temperature <= 0.0) {
    throw Error(ErrorKind::ConfigError, "temperature must be positive");
  }
  if (momentum < 0.0 || momentum > 1.0) {
    throw Error(ErrorKind::ConfigError, "momentum must lie in [0, 1]");
  }
  if (epochs < 0) {
    throw Error(ErrorKind::ConfigError, "epochs must be non-negative");
  }
  if (batch_size < 1) {
    throw Error(ErrorKind::ConfigError, "batch_size must be >= 1");
  }
  if (bank_capacity == 0) {
    throw Error(ErrorKind::ConfigError,
                "bank capacity 0 conflicts with contrastive training");
  }
  if (theta.mode == ThetaSpec::Mode::quantile &&
      (theta.value <= 0.0 || theta.value >= 1.0)) {
    throw Error(ErrorKind::InvalidTheta, "theta quantile must lie in (0,1)");
  }
  augment.validate();
  encoder.validate();
}

double info_nce_loss(const std::vector<std::vector<float>>& q,
                     const std::vector<std::vector<float>>& k,
                     const MemoryBank& bank, double tau) {
  if (q.empty() || q.size() != k.size()) {
    throw Error(ErrorKind::EmptyBatch, "InfoNCE needs aligned non-empty batches");
  }
  const auto negatives = bank.entries();
  double total = 0.0;
  std::vector<double> logits(negatives.size() + 1);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto& qi = q[i];
    logits[0] = kernels::dot<float>(qi.data(), k[i].data(), qi.size()) / tau;
    for (std::size_t j = 0; j < negatives.size(); ++j) {
      logits[j + 1] =
          kernels::dot<float>(qi.data(), negatives[j].data(), qi.size()) / tau;
    }
    double max_logit = logits[0];
    for (double l : logits) max_logit = std::max(max_logit, l);
    double denom = 0.0;
    for (double l : logits) denom += std::exp(l - max_logit);
    total += -(logits[0] - max_logit - std::log(denom));
  }
  return total / static_cast<double>(q.size());
}

Trainer::Trainer(TrainConfig cfg, DatasetSplit data, Gsbp gsbp)
    : cfg_(std::move(cfg)), data_(std::move(data)), gsbp_(std::move(gsbp)) {
  cfg_.validate();
  data_.validate();
  if (!gsbp_.values.same_shape(data_.sequences.front().values)) {
    throw Error(ErrorKind::ShapeMismatch, "GSBP shape mismatch with data");
  }
  jd_ = joint_degree_weights(data_.graph);
  state_.pair = EncoderPair<float>(cfg_.encoder, data_.graph, cfg_.seed,
                                   cfg_.momentum);
  // Embedding width as realized by the projection head.
  const std::size_t dim =
      state_.pair.query.embed(data_.sequences.front().values).size();
  state_.bank = MemoryBank(cfg_.bank_capacity, dim, cfg_.effective_policy());
  state_.opt_velocity.assign(state_.pair.query.parameter_count(), 0.0f);
}

int Trainer::steps_per_epoch() const {
  const std::size_t n = data_.size();
  const std::size_t b = static_cast<std::size_t>(cfg_.batch_size);
  return static_cast<int>(std::max<std::size_t>(1, n / b));
}

std::int64_t Trainer::total_steps() const {
  return static_cast<std::int64_t>(cfg_.epochs) * steps_per_epoch();
}

double Trainer::lr_at(std::int64_t step) const {
  double lr = cfg_.optimizer.lr;
  if (cfg_.optimizer.scale_lr_by_batch) {
    lr *= static_cast<double>(cfg_.batch_size) / 128.0;
  }
  if (cfg_.optimizer.schedule == OptimizerConfig::Schedule::cosine) {
    const double total = static_cast<double>(std::max<std::int64_t>(1, total_steps()));
    const double progress = std::min(1.0, static_cast<double>(step) / total);
    lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  }
  return lr;
}

std::vector<std::size_t> Trainer::epoch_order(int epoch) const {
  std::vector<std::size_t> order(data_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = Rng::derive({cfg_.seed, stream_key(RngStream::Shuffle),
                         static_cast<std::uint64_t>(epoch)});
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_int(i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

std::vector<KeyRegionMask> Trainer::compute_masks(
    std::span<const std::size_t> indices) const {
  const std::size_t B = indices.size();
  const std::size_t T = data_.sequences.front().frames();
  const std::size_t V = data_.sequences.front().joints();
  std::vector<KeyRegionMask> masks(B);
  if (!cfg_.use_dwkrm) {
    for (auto& m : masks) m = all_ones_mask(T, V);
    return masks;
  }
  const std::vector<float> gsbp_embedding =
      state_.pair.key.embed(gsbp_.values);
  parallel_for(B, [&](std::size_t i) {
    masks[i] = key_region_mask_for_sample<float>(
        state_.pair.key, data_.sequences[indices[i]].values, gsbp_embedding,
        jd_, data_.graph, cfg_.theta);
  });
  return masks;
}

StepMetrics Trainer::train_step(std::span<const std::size_t> indices) {
  const auto t_begin = std::chrono::steady_clock::now();
  if (indices.empty()) {
    throw Error(ErrorKind::EmptyBatch, "train_step needs a non-empty batch");
  }
  const std::size_t B = indices.size();
  const std::uint64_t step_u = static_cast<std::uint64_t>(state_.step);

  // (1) key-region masks on the unaugmented inputs
  const std::vector<KeyRegionMask> masks = compute_masks(indices);

  // (2) two augmented views per sample
  std::vector<SkeletonSequence> view_q(B), view_k(B);
  std::vector<AugmentRecord> audit_q(B), audit_k(B);
  const bool want_audit = static_cast<bool>(audit_sink);
  parallel_for(B, [&](std::size_t i) {
    const SkeletonSequence& x = data_.sequences[indices[i]];
    auto partner_of = [&](RngStream stream, std::uint64_t view) {
      Rng r = Rng::derive({cfg_.seed, stream_key(stream), step_u, i, view});
      if (B == 1) return indices[0];
      const std::size_t j = r.uniform_int(B - 1);
      return indices[j >= i ? j + 1 : j];
    };
    Rng rng_q = Rng::derive(
        {cfg_.seed, stream_key(RngStream::StrongAugment), step_u, i, 0});
    Rng rng_k = Rng::derive(
        {cfg_.seed, stream_key(RngStream::StrongAugment), step_u, i, 1});
    const SkeletonSequence& mix_q =
        data_.sequences[partner_of(RngStream::MixPartner, 0)];
    const SkeletonSequence& mix_k =
        data_.sequences[partner_of(RngStream::MixPartner, 1)];
    if (cfg_.use_dga) {
      const SkeletonSequence& style =
          data_.sequences[partner_of(RngStream::StylePartner, 0)];
      const SkeletonSequence x_adain = style_transfer(x, style, jd_);
      AugmentedViews views = compose_views(x, x_adain, masks[i], cfg_.augment,
                                           rng_q, rng_k, mix_q, mix_k);
      view_q[i] = std::move(views.view_q);
      view_k[i] = std::move(views.view_k);
      if (want_audit) {
        audit_q[i] = std::move(views.audit_q);
        audit_k[i] = std::move(views.audit_k);
      }
    } else {
      view_q[i] = normal_augment(x, cfg_.augment, rng_q, mix_q,
                                 want_audit ? &audit_q[i] : nullptr);
      view_k[i] = normal_augment(x, cfg_.augment, rng_k, mix_k,
                                 want_audit ? &audit_k[i] : nullptr);
    }
  });
  if (want_audit) {
    for (std::size_t i = 0; i < B; ++i) {
      audit_sink(state_.step, indices[i], 0, audit_q[i]);
      audit_sink(state_.step, indices[i], 1, audit_k[i]);
    }
  }

  // (3) encode: query with caches, key without gradients
  std::vector<StgcnEncoder<float>::Forward> q_fwd(B);
  std::vector<std::vector<float>> k_emb(B);
  parallel_for(B, [&](std::size_t i) {
    q_fwd[i] = state_.pair.query.forward(view_q[i].values);
    k_emb[i] = state_.pair.key.embed(view_k[i].values);
  });

  // (4) InfoNCE loss and per-sample gradients
  const auto negatives = state_.bank.entries();
  const double tau = cfg_.temperature;
  std::vector<std::vector<float>> grads(B);
  std::vector<double> losses(B);
  parallel_for(B, [&](std::size_t i) {
    const auto& q = q_fwd[i].embedding;
    const std::size_t E = q.size();
    std::vector<double> logits(negatives.size() + 1);
    logits[0] = kernels::dot<float>(q.data(), k_emb[i].data(), E) / tau;
    for (std::size_t j = 0; j < negatives.size(); ++j) {
      logits[j + 1] =
          kernels::dot<float>(q.data(), negatives[j].data(), E) / tau;
    }
    double max_logit = logits[0];
    for (double l : logits) max_logit = std::max(max_logit, l);
    double denom = 0.0;
    for (double& l : logits) {
      l = std::exp(l - max_logit);
      denom += l;
    }
    losses[i] = -std::log(logits[0] / denom);
    // d(loss_i)/dq = (1/tau) [ (p0 - 1) k + sum_j p_j m_j ], then 1/B for
    // the batch mean.
    std::vector<float> dq(E, 0.0f);
    const double scale = 1.0 / (tau * static_cast<double>(B));
    kernels::axpy<float>(
        static_cast<float>((logits[0] / denom - 1.0) * scale),
        k_emb[i].data(), dq.data(), E);
    for (std::size_t j = 0; j < negatives.size(); ++j) {
      kernels::axpy<float>(static_cast<float>(logits[j + 1] / denom * scale),
                           negatives[j].data(), dq.data(), E);
    }
    grads[i] = state_.pair.query.make_grad_buffer();
    state_.pair.query.backward(q_fwd[i], dq, &grads[i], false);
  });

  double loss = 0.0;
  for (double l : losses) loss += l;
  loss /= static_cast<double>(B);

  // (5) SGD step with momentum and weight decay; per-sample gradients are
  // reduced in sample order so results do not depend on the worker count.
  std::vector<float>& params = state_.pair.query.parameters();
  std::vector<float> grad(params.size(), 0.0f);
  for (std::size_t i = 0; i < B; ++i) {
    kernels::axpy<float>(1.0f, grads[i].data(), grad.data(), grad.size());
  }
  const double lr = lr_at(state_.step);
  const float wd = static_cast<float>(cfg_.optimizer.weight_decay);
  const float mom = static_cast<float>(cfg_.optimizer.momentum);
  if (wd != 0.0f) kernels::axpy<float>(wd, params.data(), grad.data(), grad.size());
  kernels::scal<float>(mom, state_.opt_velocity.data(), state_.opt_velocity.size());
  kernels::axpy<float>(1.0f, grad.data(), state_.opt_velocity.data(), grad.size());
  kernels::axpy<float>(static_cast<float>(-lr), state_.opt_velocity.data(),
                       params.data(), params.size());

  // (6) momentum update of the key branch
  momentum_update(state_.pair);

  // (7) bank enqueue
  std::vector<std::span<const float>> keys;
  keys.reserve(B);
  for (const auto& k : k_emb) keys.emplace_back(k.data(), k.size());
  std::vector<float> mean_probe;
  std::vector<std::span<const float>> probes;
  if (cfg_.probe == TrainConfig::ProbeMode::batch_mean) {
    mean_probe.assign(k_emb.front().size(), 0.0f);
    for (const auto& k : k_emb) {
      kernels::axpy<float>(1.0f, k.data(), mean_probe.data(), mean_probe.size());
    }
    const float norm = std::sqrt(
        kernels::sumsq<float>(mean_probe.data(), mean_probe.size()));
    if (norm > 0.0f) {
      kernels::scal<float>(1.0f / norm, mean_probe.data(), mean_probe.size());
    }
    probes.assign(B, {mean_probe.data(), mean_probe.size()});
  } else {
    probes = keys;
  }
  std::vector<BankEvent> events;
  state_.bank.enqueue(keys, probes, &events);

  StepMetrics metrics;
  metrics.step = state_.step;
  metrics.epoch = state_.epoch;
  metrics.loss = loss;
  metrics.lr = lr;
  metrics.bank_size = state_.bank.size();
  metrics.games = events.size();
  if (!events.empty()) {
    double sum_max = 0.0, sum_fifo = 0.0;
    for (const auto& e : events) {
      sum_max += e.max_payoff;
      sum_fifo += e.fifo_payoff;
    }
    metrics.mean_max_payoff = sum_max / static_cast<double>(events.size());
    metrics.mean_fifo_payoff = sum_fifo / static_cast<double>(events.size());
  }
  metrics.mask_from_dwkrm = cfg_.use_dwkrm;
  metrics.dga_path = cfg_.use_dga;
  metrics.bank_policy = bank_policy_name(cfg_.effective_policy());
  metrics.events = std::move(events);
  metrics.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t_begin)
                        .count();
  ++state_.step;
  return metrics;
}

void Trainer::run(const std::function<void(const StepMetrics&)>& on_step,
                  const std::function<bool(int)>& on_epoch_end) {
  const int steps = steps_per_epoch();
  const std::size_t B = static_cast<std::size_t>(cfg_.batch_size);
  for (; state_.epoch < cfg_.epochs;) {
    const std::vector<std::size_t> order = epoch_order(state_.epoch);
    for (int s = 0; s < steps; ++s) {
      const std::size_t begin = static_cast<std::size_t>(s) * B;
      const std::size_t count = std::min(B, order.size() - begin);
      const StepMetrics m =
          train_step(std::span<const std::size_t>(order.data() + begin, count));
      if (on_step) on_step(m);
    }
    ++state_.epoch;
    if (on_epoch_end && !on_epoch_end(state_.epoch)) return;
  }
}

}  // namespace dogclr
