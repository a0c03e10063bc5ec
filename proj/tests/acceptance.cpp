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

// Acceptance suite: every criterion prints one PASS/FAIL line with the
// measured quantities. The process exits with the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "dogclr/checkpoint.hpp"
#include "dogclr/cli.hpp"
#include "dogclr/config.hpp"
#include "dogclr/dwkrm.hpp"
#include "dogclr/eval.hpp"
#include "dogclr/graphio.hpp"
#include "dogclr/ntu_parser.hpp"
#include "dogclr/skelpack.hpp"
#include "dogclr/toy_dataset.hpp"
#include "dogclr/trainer.hpp"
#include "test_util.hpp"

using namespace dogclr;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path g_work;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

int run_cli(const std::string& command, const fs::path& config,
            std::vector<std::string> sets, const std::string& resume = "") {
  cli::CliOptions options;
  options.command = command;
  options.config_path = config.string();
  options.sets = std::move(sets);
  options.resume = resume;
  return cli::run(options);
}

/// The desk-scale experiment profile: 4 classes, 400 train / 200 test,
/// T=32, V=9, tiny encoder, bank 512, batch 32.
fs::path write_desk_config() {
  const json cfg = {
      {"seed", 42},
      {"data", {{"dir", (g_work / "data").string()}}},
      {"toy",
       {{"classes", json::array({"wave", "kick", "jump", "still"})},
        {"per_class", 100},
        {"per_class_test", 50},
        {"T", 32},
        {"V", 9},
        {"noise_sigma", 0.02}}},
      {"encoder", {{"preset", "tiny"}, {"embedding_dim", 128}}},
      {"train",
       {{"epochs", 30},
        {"batch_size", 32},
        {"bank_capacity", 512},
        {"lr", 0.4},
        {"checkpoint_every", 10}}},
      {"eval", {{"epochs", 100}, {"k", 20}}},
  };
  const fs::path path = g_work / "desk.json";
  std::ofstream out(path);
  out << cfg.dump(2) << "\n";
  return path;
}

std::vector<double> epoch_mean_losses(const fs::path& metrics_path) {
  std::vector<double> sums, counts;
  for (const auto& line : lines_of(metrics_path)) {
    const json rec = json::parse(line);
    const std::size_t epoch = rec.at("epoch").get<std::size_t>();
    if (epoch >= sums.size()) {
      sums.resize(epoch + 1, 0.0);
      counts.resize(epoch + 1, 0.0);
    }
    sums[epoch] += rec.at("loss").get<double>();
    counts[epoch] += 1.0;
  }
  std::vector<double> means(sums.size());
  for (std::size_t e = 0; e < sums.size(); ++e) {
    means[e] = counts[e] > 0 ? sums[e] / counts[e] : 0.0;
  }
  return means;
}

// ---------------------------------------------------------------------------

bool c01_gradient_oracle(std::string& detail) {
  const auto graph = toy_graph(9);
  StgcnEncoder<double> enc(EncoderConfig::tiny(32), graph, 3);
  const auto x = testutil::random_tensor<double>({3, 32, 9}, 81);
  const auto gsbp = testutil::random_tensor<double>({3, 32, 9}, 82);
  const auto zbar = enc.embed(gsbp);
  const auto dh = similarity_gradient(enc, x, zbar);
  const auto fwd = enc.forward(x);
  const Tensor<double> h = fwd.feature(enc.feature_stage());

  auto sim_of = [&](const Tensor<double>& hh) {
    const auto z = enc.embed_from_feature(hh);
    return kernels::dot<double>(z.data(), zbar.data(), z.size());
  };
  const double eps = 1e-5;
  Rng rng(83);
  int checked = 0;
  double worst = 0.0;
  while (checked < 120) {
    const std::size_t idx = rng.uniform_int(h.size());
    Tensor<double> hp = h, hm = h;
    hp[idx] += eps;
    hm[idx] -= eps;
    const double fd = (sim_of(hp) - sim_of(hm)) / (2.0 * eps);
    const double got = -dh[idx];
    ++checked;
    if (std::abs(fd) < 1e-10 && std::abs(got) < 1e-10) continue;
    worst = std::max(worst, testutil::rel_err(got, fd, 1e-8));
  }
  char buffer[96];
  std::snprintf(buffer, sizeof(buffer), "%d coords, max rel err %.3g", checked,
                worst);
  detail = buffer;
  return worst <= 1e-4;
}

bool c02_c03_edgrq_oracle(std::string& detail, bool check_bound) {
  double worst_payoff_gap = 0.0;
  for (std::size_t M : {4u, 16u, 64u}) {
    const double ln_m = std::log(static_cast<double>(M));
    for (std::uint64_t trial = 0; trial < 1000; ++trial) {
      std::vector<std::vector<float>> entries;
      entries.reserve(M);
      for (std::size_t i = 0; i < M; ++i) {
        entries.push_back(
            testutil::random_unit_embedding(8, trial * 4096 + i + M));
      }
      MemoryBank bank(M, 8, BankPolicy::edgrq);
      std::vector<std::span<const float>> spans;
      for (const auto& e : entries) spans.emplace_back(e.data(), e.size());
      bank.enqueue(spans, spans);
      const auto incoming =
          testutil::random_unit_embedding(8, trial * 4096 + 2000 + M);
      const auto probe =
          testutil::random_unit_embedding(8, trial * 4096 + 3000 + M);
      const std::span<const float> in_span{incoming.data(), incoming.size()};
      const std::span<const float> probe_span{probe.data(), probe.size()};

      const auto fast = bank.select_replacement(in_span, probe_span);
      if (!check_bound) {
        const auto brute =
            testutil::select_replacement_bruteforce(bank, in_span, probe_span);
        if (fast.index != brute.index) {
          detail = "argmax index mismatch at M=" + std::to_string(M) +
                   " trial " + std::to_string(trial);
          return false;
        }
        for (std::size_t i = 0; i < M; ++i) {
          worst_payoff_gap = std::max(
              worst_payoff_gap, std::abs(fast.payoffs[i] - brute.payoffs[i]));
        }
        if (worst_payoff_gap > 1e-9) {
          detail = "payoff gap " + std::to_string(worst_payoff_gap);
          return false;
        }
      } else {
        // entropy bound and the equality condition
        std::vector<double> sims(M);
        for (std::size_t j = 0; j < M; ++j) {
          sims[j] = kernels::dot<float>(probe.data(), bank.entry(j).data(), 8);
        }
        const double sim_in =
            kernels::dot<float>(probe.data(), incoming.data(), 8);
        for (std::size_t i = 0; i < M; ++i) {
          if (fast.payoffs[i] > ln_m + 1e-9) {
            detail = "payoff exceeds ln M";
            return false;
          }
          double lo = sim_in, hi = sim_in;
          for (std::size_t j = 0; j < M; ++j) {
            if (j == i) continue;
            lo = std::min(lo, sims[j]);
            hi = std::max(hi, sims[j]);
          }
          const bool constant = (hi - lo) <= 1e-12;
          const bool at_max = std::abs(fast.payoffs[i] - ln_m) <= 1e-9;
          if (constant != at_max) {
            detail = "equality condition violated";
            return false;
          }
        }
      }
    }
    if (check_bound) {
      // constructed uniform case: all similarities identical
      const auto e = testutil::embedding_with_sim(0.3);
      std::vector<std::vector<float>> entries(M, e);
      MemoryBank bank(M, 2, BankPolicy::edgrq);
      std::vector<std::span<const float>> spans;
      for (const auto& v : entries) spans.emplace_back(v.data(), v.size());
      bank.enqueue(spans, spans);
      const auto probe = testutil::embedding_with_sim(1.0);
      const auto d = bank.select_replacement({e.data(), e.size()},
                                             {probe.data(), probe.size()});
      for (double h : d.payoffs) {
        if (std::abs(h - ln_m) > 1e-9) {
          detail = "constructed uniform case missed ln M";
          return false;
        }
      }
    }
  }
  detail = check_bound
               ? "bound and equality condition hold for M in {4,16,64}"
               : "3000 trials, max payoff gap " + std::to_string(worst_payoff_gap);
  return true;
}

bool c04_dominance(std::string& detail) {
  Rng rng(2024);
  const RegionAssignment profiles[4] = {
      {Strategy::strong, Strategy::normal},
      {Strategy::strong, Strategy::strong},
      {Strategy::normal, Strategy::normal},
      {Strategy::normal, Strategy::strong}};
  int checked = 0;
  while (checked < 1000) {
    const std::size_t T = 1 + rng.uniform_int(6);
    const std::size_t V = 1 + rng.uniform_int(8);
    Tensor<std::uint8_t> mask({T, V});
    bool any0 = false, any1 = false;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      mask[i] = rng.bernoulli(0.5) ? 1 : 0;
      (mask[i] ? any1 : any0) = true;
    }
    if (!any0 || !any1) continue;
    ++checked;
    const double best = payoff_u1(mask, profiles[0]);
    for (int p = 1; p < 4; ++p) {
      if (best <= payoff_u1(mask, profiles[p])) {
        detail = "profile " + std::to_string(p) + " not dominated";
        return false;
      }
    }
    if (checked <= 100) {
      const double s_strong = 1.0 + rng.uniform(-0.499, 0.499);
      const double s_normal = 2.0 + rng.uniform(-0.499, 0.499);
      int argmax = 0;
      double top = payoff_u1_scored(mask, profiles[0], s_strong, s_normal);
      for (int p = 1; p < 4; ++p) {
        const double u = payoff_u1_scored(mask, profiles[p], s_strong, s_normal);
        if (u > top) {
          top = u;
          argmax = p;
        }
      }
      if (argmax != 0) {
        detail = "perturbed score table flipped the argmax";
        return false;
      }
    }
  }
  detail = "1000 masks strict, 100 perturbed tables stable";
  return true;
}

bool c05_style_identities(std::string& detail) {
  const auto graph = toy_graph(9);
  const auto jd = joint_degree_weights(graph);
  SkeletonSequence x;
  x.values = testutil::random_tensor<float>({3, 8, 9}, 5, -1.0, 1.0);
  const auto same = style_transfer(x, x, jd);
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    if (std::abs(same.values[i] - x.values[i]) > 1e-6f) {
      detail = "xi = xj identity violated";
      return false;
    }
  }

  JointDegreeWeights ones;
  ones.weights.assign(9, 1.7);  // clamps to 1
  SkeletonSequence y;
  y.values = testutil::random_tensor<float>({3, 8, 9}, 6, -1.0, 1.0);
  if (!(style_transfer(x, y, ones).values == x.values)) {
    detail = "jd >= 1 identity violated";
    return false;
  }

  SkeletonSequence xi, xj;
  xi.values = Tensor<float>({1, 2, 1});
  xj.values = Tensor<float>({1, 2, 1});
  xi.values(0, 0, 0) = 0.0f;
  xi.values(0, 1, 0) = 2.0f;
  xj.values(0, 0, 0) = 4.0f;
  xj.values(0, 1, 0) = 6.0f;
  JointDegreeWeights zero;
  zero.weights = {0.0};
  const auto out = style_transfer(xi, xj, zero);
  if (out.values(0, 0, 0) != 8.0f || out.values(0, 1, 0) != 10.0f) {
    detail = "hand case (8, 10) missed";
    return false;
  }
  detail = "identity, clamped, and hand cases exact";
  return true;
}

bool c06_jd_exactness(std::string& detail) {
  const auto path3 = SkeletonGraph::from_edges(3, {{0, 1}, {1, 2}});
  const auto wp = joint_degree_weights(path3);
  if (wp[0] != 0.75 || wp[1] != 1.5 || wp[2] != 0.75) {
    detail = "path-3 weights off";
    return false;
  }
  const auto star5 =
      SkeletonGraph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const auto ws = joint_degree_weights(star5);
  if (ws[0] != 2.5 || ws[1] != 0.625 || ws[2] != 0.625 || ws[3] != 0.625 ||
      ws[4] != 0.625) {
    detail = "star-5 weights off";
    return false;
  }
  const auto tri = SkeletonGraph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
  const auto wt = joint_degree_weights(tri);
  if (wt[0] != 1.0 || wt[1] != 1.0 || wt[2] != 1.0) {
    detail = "triangle weights off";
    return false;
  }
  const fs::path graph_file =
      fs::path(DOGCLR_SOURCE_DIR) / "graphs" / "ntu25.json";
  const auto ntu = load_graph(graph_file.string());
  const auto wn = joint_degree_weights(ntu);
  double mean = 0.0;
  for (double w : wn.weights) mean += w;
  mean /= static_cast<double>(wn.size());
  if (std::abs(mean - 1.0) > 1e-9) {
    detail = "ntu25 mean weight " + std::to_string(mean);
    return false;
  }
  detail = "fixtures exact; ntu25 file mean weight within 1e-9";
  return true;
}

bool c07_mask_invariants(std::string& detail) {
  const auto graph = toy_graph(9);
  const auto jd = joint_degree_weights(graph);
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto dh = testutil::random_tensor<double>({3, 12, 9}, 7000 + trial);
    const auto h =
        testutil::random_tensor<double>({3, 12, 9}, 8000 + trial, 0.0, 1.0);
    const double lambda = std::exp(rng.uniform(-6.0, 6.0));
    const auto a1 = composite_weights(dh, jd);
    Tensor<double> dh2 = dh;
    kernels::scal<double>(lambda, dh2.data(), dh2.size());
    const auto a2 = composite_weights(dh2, jd);
    const ThetaSpec theta{ThetaSpec::Mode::quantile, 0.7};
    const auto m1 = key_region_mask(a1, h, graph, theta);
    const auto m2 = key_region_mask(a2, h, graph, theta);
    if (!(m1.mask == m2.mask)) {
      detail = "rescaling changed the mask";
      return false;
    }
    const double slack = 9.0 / (12.0 * 9.0);
    if (std::abs(m1.key_fraction() - 0.3) > slack + 1e-12) {
      detail = "key fraction " + std::to_string(m1.key_fraction());
      return false;
    }
  }
  // staged vs fused, bit for bit, on the tiny encoder
  StgcnEncoder<float> enc(EncoderConfig::tiny(32), graph, 17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = testutil::random_tensor<float>(
        {3, 12, 9}, 9000 + static_cast<std::uint64_t>(trial));
    const auto gsbp = testutil::random_tensor<float>(
        {3, 12, 9}, 9500 + static_cast<std::uint64_t>(trial));
    const auto zbar = enc.embed(gsbp);
    const ThetaSpec theta{ThetaSpec::Mode::quantile, 0.7};
    const auto dh = similarity_gradient(enc, x, zbar);
    const auto fwd = enc.forward(x);
    const auto alpha = composite_weights(dh, jd);
    const auto staged = key_region_mask(
        alpha, fwd.feature(enc.feature_stage()), graph, theta, x.dim(1));
    const auto fused =
        key_region_mask_for_sample(enc, x, zbar, jd, graph, theta);
    if (!(staged.importance == fused.importance) ||
        !(staged.mask == fused.mask) ||
        staged.realized_threshold != fused.realized_threshold) {
      detail = "staged and fused pipelines diverge";
      return false;
    }
  }
  detail = "rescaling, key fraction, staged-vs-fused all hold";
  return true;
}

bool c08_momentum_contract(std::string& detail) {
  const auto graph = toy_graph(9);
  EncoderPair<double> pair(EncoderConfig::tiny(16), graph, 7, 0.99);
  Rng rng(55);
  for (auto& p : pair.key.parameters()) p = rng.uniform(-1.0, 1.0);
  for (auto& p : pair.query.parameters()) p = rng.uniform(-1.0, 1.0);
  const auto k0 = pair.key.parameters();
  const auto q0 = pair.query.parameters();
  momentum_update(pair);
  double worst = 0.0;
  for (std::size_t i = 0; i < k0.size(); ++i) {
    worst = std::max(worst, std::abs(pair.key.parameters()[i] -
                                     (0.99 * k0[i] + 0.01 * q0[i])));
  }
  if (worst > 1e-12) {
    detail = "update rule error " + std::to_string(worst);
    return false;
  }

  // float trainer: 10 steps, key drift must equal a pure momentum replay
  ToySpec spec;
  spec.classes = {"wave", "kick", "jump", "still"};
  spec.per_class = 16;
  spec.per_class_test = 4;
  spec.T = 16;
  spec.V = 9;
  const auto data = generate_toy_dataset(spec, 11);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.batch_size = 8;
  cfg.bank_capacity = 64;
  cfg.encoder = EncoderConfig::tiny(32);
  cfg.seed = 5;
  cfg.optimizer.lr = 0.4;
  Trainer trainer(cfg, data.train, compute_gsbp(data.train));
  std::vector<float> replay = trainer.state().pair.key.parameters();
  const auto order = trainer.epoch_order(0);
  for (int step = 0; step < 10; ++step) {
    std::vector<std::size_t> batch;
    for (std::size_t i = 0; i < 8; ++i) {
      batch.push_back(order[(static_cast<std::size_t>(step) * 8 + i) %
                            order.size()]);
    }
    (void)trainer.train_step(batch);
    const float m = static_cast<float>(cfg.momentum);
    kernels::scal<float>(m, replay.data(), replay.size());
    kernels::axpy<float>(1.0f - m,
                         trainer.state().pair.query.parameters().data(),
                         replay.data(), replay.size());
  }
  if (!(replay == trainer.state().pair.key.parameters())) {
    detail = "key branch drifted beyond the momentum replay";
    return false;
  }
  detail = "max update error " + std::to_string(worst) +
           "; 10-step replay bitwise equal";
  return true;
}

bool c09_desk_scale(std::string& detail) {
  const auto begin = std::chrono::steady_clock::now();
  const fs::path cfg = write_desk_config();
  const fs::path run_dir = g_work / "desk_run";
  if (run_cli("pretrain", cfg, {"run_dir=" + run_dir.string()}) != 0) {
    detail = "pretraining failed";
    return false;
  }
  const auto means = epoch_mean_losses(run_dir / "metrics.jsonl");
  if (means.size() != 30) {
    detail = "expected 30 epochs of metrics";
    return false;
  }
  const double drop = (means.front() - means.back()) / means.front();

  const fs::path eval_dir = g_work / "desk_eval";
  if (run_cli("eval", cfg,
              {"run_dir=" + (eval_dir / "linear").string(),
               "eval.checkpoint=" + (run_dir / "ckpt_final.ckpt").string()}) !=
      0) {
    detail = "linear eval failed";
    return false;
  }
  json linear;
  std::ifstream(eval_dir / "linear" / "report.json") >> linear;
  if (run_cli("eval", cfg,
              {"run_dir=" + (eval_dir / "knn").string(), "eval.protocol=knn",
               "eval.checkpoint=" + (run_dir / "ckpt_final.ckpt").string()}) !=
      0) {
    detail = "knn eval failed";
    return false;
  }
  json knn;
  std::ifstream(eval_dir / "knn" / "report.json") >> knn;

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - begin)
          .count();
  const double linear_top1 = linear.at("top1").get<double>();
  const double knn_top1 = knn.at("top1").get<double>();
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer),
                "loss %.3f->%.3f (drop %.0f%%), linear %.3f, knn %.3f, %.0fs",
                means.front(), means.back(), 100.0 * drop, linear_top1,
                knn_top1, wall);
  detail = buffer;
  return drop >= 0.20 && linear_top1 >= 0.50 && knn_top1 >= 0.45 &&
         wall <= 1200.0;
}

bool c10_bank_policy_report(std::string& detail) {
  const fs::path cfg = write_desk_config();
  const fs::path run_dir = g_work / "bank_ablate";
  if (run_cli("ablate", cfg,
              {"run_dir=" + run_dir.string(), "ablate.mode=bank_policy",
               "ablate.epochs=8"}) != 0) {
    detail = "ablate command failed";
    return false;
  }
  const auto runs = lines_of(run_dir / "ablate_bank_runs.csv");
  const auto summary = lines_of(run_dir / "ablate_bank_summary.csv");
  if (runs.size() != 7 || runs[0] != "policy,seed,linear_top1,knn_top1") {
    detail = "runs CSV schema invalid";
    return false;
  }
  for (std::size_t i = 1; i < runs.size(); ++i) {
    std::stringstream ss(runs[i]);
    std::string policy, seed, lin, knn;
    std::getline(ss, policy, ',');
    std::getline(ss, seed, ',');
    std::getline(ss, lin, ',');
    std::getline(ss, knn, ',');
    if ((policy != "fifo" && policy != "edgrq")) {
      detail = "unknown policy row";
      return false;
    }
    const double l = std::stod(lin), k = std::stod(knn);
    if (l < 0.0 || l > 1.0 || k < 0.0 || k > 1.0) {
      detail = "accuracy out of range";
      return false;
    }
  }
  if (summary.size() != 3 ||
      summary[0] !=
          "policy,n,linear_top1_mean,linear_top1_std,knn_top1_mean,knn_top1_std") {
    detail = "summary CSV schema invalid";
    return false;
  }
  double fifo_mean = 0.0, edgrq_mean = 0.0;
  for (std::size_t i = 1; i < summary.size(); ++i) {
    std::stringstream ss(summary[i]);
    std::string policy, n, lm, ls, km, ks;
    std::getline(ss, policy, ',');
    std::getline(ss, n, ',');
    std::getline(ss, lm, ',');
    std::getline(ss, ls, ',');
    std::getline(ss, km, ',');
    std::getline(ss, ks, ',');
    if (n != "3" || std::stod(ls) < 0.0 || std::stod(ks) < 0.0) {
      detail = "summary row invalid";
      return false;
    }
    (policy == "fifo" ? fifo_mean : edgrq_mean) = std::stod(lm);
  }
  char buffer[128];
  std::snprintf(buffer, sizeof(buffer),
                "schema valid; linear mean edgrq %.3f vs fifo %.3f "
                "(informational)",
                edgrq_mean, fifo_mean);
  detail = buffer;
  return true;
}

bool c11_determinism(std::string& detail) {
  const json cfg_json = {
      {"seed", 7},
      {"data", {{"dir", (g_work / "data").string()}}},
      {"toy",
       {{"classes", json::array({"wave", "kick", "jump", "still"})},
        {"per_class", 100},
        {"per_class_test", 50},
        {"T", 32},
        {"V", 9},
        {"noise_sigma", 0.02}}},
      {"encoder", {{"preset", "tiny"}, {"embedding_dim", 128}}},
      {"train",
       {{"epochs", 6},
        {"batch_size", 32},
        {"bank_capacity", 512},
        {"lr", 0.4},
        {"checkpoint_every", 3}}},
  };
  const fs::path cfg = g_work / "determinism.json";
  {
    std::ofstream out(cfg);
    out << cfg_json.dump(2) << "\n";
  }
  const fs::path dir_a = g_work / "det_a";
  const fs::path dir_b = g_work / "det_b";
  if (run_cli("pretrain", cfg, {"run_dir=" + dir_a.string()}) != 0 ||
      run_cli("pretrain", cfg, {"run_dir=" + dir_b.string()}) != 0) {
    detail = "pretraining failed";
    return false;
  }
  if (slurp(dir_a / "metrics.jsonl") != slurp(dir_b / "metrics.jsonl")) {
    detail = "metrics files differ between identical runs";
    return false;
  }
  // resume from the midpoint checkpoint
  const fs::path dir_c = g_work / "det_c";
  if (run_cli("pretrain", cfg, {"run_dir=" + dir_c.string()},
              (dir_a / "ckpt_epoch_0003.ckpt").string()) != 0) {
    detail = "resume run failed";
    return false;
  }
  const auto full = lines_of(dir_a / "metrics.jsonl");
  const auto tail = lines_of(dir_c / "metrics.jsonl");
  if (tail.empty() || tail.size() >= full.size()) {
    detail = "resume produced an unexpected number of steps";
    return false;
  }
  for (std::size_t i = 0; i < tail.size(); ++i) {
    if (tail[i] != full[full.size() - tail.size() + i]) {
      detail = "resumed trajectory diverged at line " + std::to_string(i);
      return false;
    }
  }
  detail = "two runs byte-identical; resume matches the tail (" +
           std::to_string(tail.size()) + " steps)";
  return true;
}

bool c12_format_round_trips(std::string& detail) {
  // SKELPACK bit-exact round trip
  SkelpackData data;
  data.C = 3;
  data.T = 5;
  data.V = 9;
  data.N = 4;
  Rng rng(91);
  data.values.resize(data.N * data.C * data.T * data.V);
  for (auto& v : data.values) v = static_cast<float>(rng.normal(0.0, 100.0));
  data.values[0] = -0.0f;
  data.values[1] = 1.17549421e-38f;
  for (std::size_t i = 0; i < data.N; ++i) {
    data.labels.push_back(static_cast<int>(i % 3));
  }
  const fs::path path = g_work / "roundtrip.skp";
  write_skelpack(path.string(), data);
  const auto back = read_skelpack(path.string());
  if (std::memcmp(back.values.data(), data.values.data(),
                  data.values.size() * sizeof(float)) != 0 ||
      back.labels.size() != data.labels.size()) {
    detail = "SKELPACK round trip not bit-exact";
    return false;
  }

  // NTU parser fixtures
  std::ostringstream good;
  good << "2\n";
  for (int t = 0; t < 2; ++t) {
    good << "1\nmeta 0 0 0\n25\n";
    for (int v = 0; v < 25; ++v) good << v << " " << t << " 0 extra\n";
  }
  const auto seq = parse_ntu_skeleton(good.str(), 2);
  if (seq.values(0, 1, 7) != 7.0f || seq.values(1, 1, 7) != 1.0f) {
    detail = "well-formed fixture parsed wrong";
    return false;
  }
  auto expect_kind = [&](const std::string& text, ErrorKind kind) {
    try {
      (void)parse_ntu_skeleton(text, 4);
      return false;
    } catch (const Error& e) {
      return e.kind() == kind;
    }
  };
  std::string truncated = "2\n1\nmeta\n25\n";
  for (int v = 0; v < 25; ++v) truncated += "0 0 0\n";
  std::string bad_joints = "1\n1\nmeta\n24\n";
  for (int v = 0; v < 24; ++v) bad_joints += "0 0 0\n";
  if (!expect_kind(truncated, ErrorKind::MalformedHeader) ||
      !expect_kind(bad_joints, ErrorKind::JointCountMismatch) ||
      !expect_kind("", ErrorKind::EmptyFile) ||
      !expect_kind("0\n", ErrorKind::NoFrames)) {
    detail = "parser error fixtures misbehaved";
    return false;
  }
  detail = "SKELPACK bit-exact; parser fixtures as specified";
  return true;
}

struct Criterion {
  int id;
  const char* name;
  std::function<bool(std::string&)> fn;
  double budget_seconds;  // 0 = unbounded
};

}  // namespace

int main() {
  g_work = fs::temp_directory_path() / "dogclr_acceptance";
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  const Criterion criteria[] = {
      {1, "gradient-oracle", c01_gradient_oracle, 60.0},
      {2, "edgrq-oracle",
       [](std::string& d) { return c02_c03_edgrq_oracle(d, false); }, 60.0},
      {3, "entropy-bound",
       [](std::string& d) { return c02_c03_edgrq_oracle(d, true); }, 60.0},
      {4, "dominance-brute-force", c04_dominance, 0.0},
      {5, "style-transfer-identities", c05_style_identities, 0.0},
      {6, "jd-exactness", c06_jd_exactness, 0.0},
      {7, "mask-invariants", c07_mask_invariants, 0.0},
      {8, "momentum-contract", c08_momentum_contract, 0.0},
      {9, "desk-scale-end-to-end", c09_desk_scale, 1200.0},
      {10, "bank-policy-report", c10_bank_policy_report, 0.0},
      {11, "determinism-and-resume", c11_determinism, 0.0},
      {12, "format-round-trips", c12_format_round_trips, 0.0},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto begin = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = criterion.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - begin)
            .count();
    if (criterion.budget_seconds > 0.0 && seconds > criterion.budget_seconds) {
      ok = false;
      detail += " [over time budget]";
    }
    std::printf("C%02d %s %-28s %s [%.1fs]\n", criterion.id,
                ok ? "PASS" : "FAIL", criterion.name, detail.c_str(), seconds);
    std::fflush(stdout);
    failures += ok ? 0 : 1;
  }
  if (failures == 0) {
    std::printf("acceptance: all %zu criteria passed\n",
                std::size(criteria));
  } else {
    std::printf("acceptance: %d criteria FAILED\n", failures);
  }
  return failures;
}
