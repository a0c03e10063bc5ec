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

#include "dogclr/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dogclr/checkpoint.hpp"
#include "dogclr/config.hpp"
#include "dogclr/eval.hpp"
#include "dogclr/graphio.hpp"
#include "dogclr/pngio.hpp"
#include "dogclr/skelpack.hpp"
#include "dogclr/toy_dataset.hpp"

namespace dogclr::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

fs::path runs_root() {
  if (const char* env = std::getenv("DOGCLR_RUNS_DIR")) {
    if (*env) return fs::path(env);
  }
  return fs::path("./runs");
}

std::string run_id(const std::string& command, const json& resolved) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(
                    fnv1a64(command + "\n" + resolved.dump())));
  return buffer;
}

struct RunContext {
  json resolved;
  fs::path run_dir;
  bool already_complete = false;
};

json resolve_from_options(const CliOptions& options) {
  json user = load_config_file(options.config_path);
  apply_overrides(user, options.sets);
  if (options.seed) user["seed"] = *options.seed;
  return resolve_config(user);
}

/// Sets up the artifact directory and its manifest. An existing manifest
/// with the same resolved config marks the run complete (no-op without
/// --force).
RunContext prepare_run(const std::string& command, json resolved,
                       const fs::path& dir, bool force) {
  RunContext ctx;
  ctx.resolved = std::move(resolved);
  ctx.run_dir = dir;
  const fs::path manifest_path = ctx.run_dir / "manifest.json";
  if (!force && fs::exists(manifest_path)) {
    try {
      json manifest;
      std::ifstream in(manifest_path);
      in >> manifest;
      if (manifest.value("completed", false) &&
          manifest.value("config", json{}) == ctx.resolved &&
          manifest.value("command", "") == command) {
        ctx.already_complete = true;
        return ctx;
      }
    } catch (...) {
      // unreadable manifest: redo the run
    }
  }
  fs::create_directories(ctx.run_dir);
  ordered_json manifest;
  manifest["command"] = command;
  manifest["run_id"] = run_id(command, ctx.resolved);
  manifest["seed"] = ctx.resolved.at("seed");
  manifest["config"] = ctx.resolved;
  manifest["completed"] = false;
  manifest["created"] = static_cast<std::int64_t>(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
  std::ofstream out(manifest_path);
  out << manifest.dump(2) << "\n";
  return ctx;
}

void finalize_run(const RunContext& ctx, const std::string& command) {
  const fs::path manifest_path = ctx.run_dir / "manifest.json";
  ordered_json manifest;
  {
    std::ifstream in(manifest_path);
    in >> manifest;
  }
  manifest["completed"] = true;
  (void)command;
  std::ofstream out(manifest_path);
  out << manifest.dump(2) << "\n";
}

fs::path default_run_dir(const std::string& command, const json& resolved) {
  if (resolved.contains("run_dir") && resolved.at("run_dir").is_string() &&
      !resolved.at("run_dir").get<std::string>().empty()) {
    return fs::path(resolved.at("run_dir").get<std::string>());
  }
  return runs_root() / (command + "-" + run_id(command, resolved));
}

SkeletonGraph resolve_graph(const json& resolved) {
  const std::string spec = resolved.at("data").at("graph").get<std::string>();
  if (spec.rfind("builtin:", 0) == 0) return load_graph(spec);
  fs::path p(spec);
  if (!p.is_absolute()) {
    const fs::path beside =
        fs::path(resolved.at("data").at("dir").get<std::string>()) / p;
    if (fs::exists(beside)) p = beside;
  }
  return load_graph(p.string());
}

void write_toy_files(const json& resolved, const fs::path& out_dir) {
  const ToySpec spec = toy_spec_from(resolved);
  const auto seed = resolved.at("seed").get<std::uint64_t>();
  const ToyDataset dataset = generate_toy_dataset(spec, seed);
  fs::create_directories(out_dir);
  write_skelpack((out_dir / resolved.at("data").at("train").get<std::string>())
                     .string(),
                 pack_split(dataset.train));
  write_skelpack((out_dir / resolved.at("data").at("test").get<std::string>())
                     .string(),
                 pack_split(dataset.test));
  save_graph(dataset.train.graph, (out_dir / "graph.json").string());
}

/// Loads a split file, generating the toy dataset first when it is missing.
DatasetSplit load_split(const json& resolved, bool test_split) {
  const fs::path dir(resolved.at("data").at("dir").get<std::string>());
  const std::string name =
      resolved.at("data").at(test_split ? "test" : "train").get<std::string>();
  const fs::path path = dir / name;
  if (!fs::exists(path)) {
    warn("dataset file " + path.string() + " missing; generating toy data");
    write_toy_files(resolved, dir);
  }
  const auto graph = resolve_graph(resolved);
  return unpack_split(read_skelpack(path.string()), graph,
                      test_split ? SplitRole::test : SplitRole::train,
                      path.string());
}

DatasetSplit preprocess(const DatasetSplit& raw, StreamKind stream,
                        NormalizeMode mode) {
  return derive_stream(normalize(raw, mode), stream);
}

/// GSBP for a preprocessed training split, cached beside the dataset files.
Gsbp cached_gsbp(const json& resolved, const DatasetSplit& preprocessed,
                 StreamKind stream, NormalizeMode mode) {
  const fs::path dir(resolved.at("data").at("dir").get<std::string>());
  const std::string tag = std::string("gsbp_") + stream_name(stream) + "_" +
                          (mode == NormalizeMode::center_root ? "cr" : "none") +
                          ".skp";
  const fs::path path = dir / tag;
  if (fs::exists(path)) {
    Gsbp g = read_gsbp(path.string());
    if (g.values.same_shape(preprocessed.sequences.front().values)) return g;
    warn("cached GSBP shape mismatch; recomputing");
  }
  Gsbp g = compute_gsbp(preprocessed);
  fs::create_directories(dir);
  write_gsbp(path.string(), g);
  return g;
}

struct PretrainOutcome {
  fs::path final_checkpoint;
  double first_epoch_loss = 0.0;
  double last_epoch_loss = 0.0;
};

ordered_json metrics_record(const StepMetrics& m) {
  ordered_json rec;
  rec["step"] = m.step;
  rec["epoch"] = m.epoch;
  rec["loss"] = m.loss;
  rec["lr"] = m.lr;
  rec["bank_size"] = m.bank_size;
  rec["games"] = m.games;
  rec["mean_max_payoff"] = m.mean_max_payoff;
  rec["mean_fifo_payoff"] = m.mean_fifo_payoff;
  rec["mask_source"] = m.mask_from_dwkrm ? "dwkrm" : "ones";
  rec["augment_path"] = m.dga_path ? "dga" : "normal_only";
  rec["bank_policy"] = m.bank_policy;
  return rec;
}

PretrainOutcome do_pretrain(const json& resolved, const fs::path& run_dir,
                            const std::string& resume) {
  const StreamKind stream = data_stream_from(resolved);
  const NormalizeMode mode = normalize_mode_from(resolved);
  const DatasetSplit raw = load_split(resolved, false);
  const DatasetSplit data = preprocess(raw, stream, mode);
  const Gsbp gsbp = cached_gsbp(resolved, data, stream, mode);
  const TrainConfig cfg = train_config_from(resolved);

  Trainer trainer(cfg, data, gsbp);
  const bool resuming = !resume.empty();
  if (resuming) {
    restore_checkpoint(trainer, load_checkpoint(resume));
  }

  fs::create_directories(run_dir);
  const auto open_mode = resuming ? std::ios::app : std::ios::trunc;
  std::ofstream metrics(run_dir / "metrics.jsonl", open_mode);
  std::ofstream timing(run_dir / "timing.jsonl", open_mode);
  std::ofstream telemetry;
  if (resolved.at("train").at("telemetry").get<bool>()) {
    telemetry.open(run_dir / "telemetry.jsonl", open_mode);
  }
  std::ofstream audit;
  if (resolved.at("train").at("audit_augment").get<bool>()) {
    audit.open(run_dir / "augment_audit.jsonl", open_mode);
    trainer.audit_sink = [&](std::int64_t step, std::size_t sample, int view,
                             const AugmentRecord& record) {
      ordered_json rec;
      rec["step"] = step;
      rec["sample"] = sample;
      rec["view"] = view;
      ordered_json transforms = ordered_json::array();
      for (const auto& e : record.entries) {
        transforms.push_back({{"name", e.name}, {"params", e.params}});
      }
      rec["transforms"] = transforms;
      audit << rec.dump() << "\n";
    };
  }

  const int checkpoint_every =
      resolved.at("train").at("checkpoint_every").get<int>();
  std::vector<double> epoch_losses;
  double epoch_acc = 0.0;
  int epoch_steps = 0;
  PretrainOutcome outcome;

  trainer.run(
      [&](const StepMetrics& m) {
        metrics << metrics_record(m).dump() << "\n";
        timing << ordered_json{{"step", m.step}, {"wall_ms", m.wall_ms}}.dump()
               << "\n";
        if (telemetry.is_open()) {
          for (const auto& e : m.events) {
            telemetry << ordered_json{{"step", m.step},
                                      {"chosen_index", e.chosen_index},
                                      {"max_payoff", e.max_payoff},
                                      {"fifo_payoff", e.fifo_payoff}}
                             .dump()
                      << "\n";
          }
        }
        epoch_acc += m.loss;
        ++epoch_steps;
      },
      [&](int epoch) {
        epoch_losses.push_back(epoch_steps ? epoch_acc / epoch_steps : 0.0);
        epoch_acc = 0.0;
        epoch_steps = 0;
        if (checkpoint_every > 0 && epoch % checkpoint_every == 0 &&
            epoch < cfg.epochs) {
          char name[32];
          std::snprintf(name, sizeof(name), "ckpt_epoch_%04d.ckpt", epoch);
          save_checkpoint((run_dir / name).string(),
                          make_checkpoint(trainer, resolved));
        }
        return true;
      });

  outcome.final_checkpoint = run_dir / "ckpt_final.ckpt";
  save_checkpoint(outcome.final_checkpoint.string(),
                  make_checkpoint(trainer, resolved));
  if (!epoch_losses.empty()) {
    outcome.first_epoch_loss = epoch_losses.front();
    outcome.last_epoch_loss = epoch_losses.back();
  }
  return outcome;
}

/// Rebuilds the frozen query encoder recorded in a checkpoint.
StgcnEncoder<float> encoder_from_checkpoint(const Checkpoint& ckpt,
                                            const SkeletonGraph& graph) {
  const EncoderConfig cfg = encoder_config_from(ckpt.config_echo);
  StgcnEncoder<float> enc(cfg, graph, ckpt.seed);
  if (enc.parameter_count() != ckpt.query_params.size()) {
    throw Error(ErrorKind::ShapeMismatch,
                "checkpoint does not match the encoder geometry");
  }
  enc.parameters() = ckpt.query_params;
  return enc;
}

struct CheckpointEval {
  EvalReport linear;
  EvalReport knn;
  int epoch = 0;
  std::vector<std::vector<float>> test_embeddings;
};

CheckpointEval eval_checkpoint(const json& resolved, const std::string& path,
                               bool want_linear, bool want_knn) {
  const Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.config_echo.is_null() || !ckpt.config_echo.contains("data")) {
    throw Error(ErrorKind::IoError,
                "checkpoint " + path + " carries no config echo");
  }
  // preprocessing must match the pretraining run
  const StreamKind stream = data_stream_from(ckpt.config_echo);
  const NormalizeMode mode = normalize_mode_from(ckpt.config_echo);
  const DatasetSplit train_raw = load_split(resolved, false);
  const DatasetSplit test_raw = load_split(resolved, true);
  const DatasetSplit train = preprocess(train_raw, stream, mode);
  const DatasetSplit test = preprocess(test_raw, stream, mode);
  const auto encoder = encoder_from_checkpoint(ckpt, train.graph);
  const EvalConfig cfg = eval_config_from(resolved);

  CheckpointEval out;
  out.epoch = ckpt.epoch;
  if (want_linear) {
    out.linear = linear_eval(encoder, train, test, cfg);
    out.linear.config_echo["stream"] = stream_name(stream);
  }
  if (want_knn) {
    out.knn = knn_eval(encoder, train, test, cfg);
    out.knn.config_echo["stream"] = stream_name(stream);
  }
  out.test_embeddings =
      extract_features(encoder, test, EvalConfig::Features::embedding).rows;
  return out;
}

void write_report(const fs::path& path, const EvalReport& report,
                  bool include_scores) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << report_to_json(report, include_scores).dump(2) << "\n";
}

int cmd_make_toy(const CliOptions& options) {
  json resolved = resolve_from_options(options);
  std::string out_dir = resolved.at("toy").at("out_dir").get<std::string>();
  if (out_dir.empty()) {
    out_dir = resolved.at("data").at("dir").get<std::string>();
  }
  RunContext ctx = prepare_run("make-toy", resolved, fs::path(out_dir),
                               options.force);
  if (ctx.already_complete) {
    std::printf("make-toy: %s is already complete (use --force to redo)\n",
                out_dir.c_str());
    return 0;
  }
  write_toy_files(ctx.resolved, fs::path(out_dir));
  finalize_run(ctx, "make-toy");
  std::printf("make-toy: dataset written to %s\n", out_dir.c_str());
  return 0;
}

int cmd_pretrain(const CliOptions& options) {
  json resolved = resolve_from_options(options);
  (void)train_config_from(resolved);  // validate before any compute or io
  RunContext ctx = prepare_run("pretrain", resolved,
                               default_run_dir("pretrain", resolved),
                               options.force || !options.resume.empty());
  if (ctx.already_complete) {
    std::printf("pretrain: run %s is already complete\n",
                ctx.run_dir.string().c_str());
    return 0;
  }
  const PretrainOutcome outcome =
      do_pretrain(ctx.resolved, ctx.run_dir, options.resume);
  finalize_run(ctx, "pretrain");
  std::printf("pretrain: %s\n  first-epoch loss %.4f, last-epoch loss %.4f\n",
              outcome.final_checkpoint.string().c_str(),
              outcome.first_epoch_loss, outcome.last_epoch_loss);
  return 0;
}

int cmd_eval(const CliOptions& options) {
  json resolved = resolve_from_options(options);
  (void)eval_config_from(resolved);  // validate before any compute or io
  RunContext ctx = prepare_run("eval", resolved,
                               default_run_dir("eval", resolved), options.force);
  if (ctx.already_complete) {
    std::printf("eval: run %s is already complete\n",
                ctx.run_dir.string().c_str());
    return 0;
  }
  const std::string protocol =
      ctx.resolved.at("eval").at("protocol").get<std::string>();
  const bool figures = ctx.resolved.at("eval").at("export_figures").get<bool>();
  const auto seed = ctx.resolved.at("seed").get<std::uint64_t>();

  if (protocol == "linear" || protocol == "knn") {
    const std::string ckpt =
        ctx.resolved.at("eval").at("checkpoint").get<std::string>();
    if (ckpt.empty()) {
      throw Error(ErrorKind::ConfigError, "eval.checkpoint is required");
    }
    const auto result = eval_checkpoint(ctx.resolved, ckpt,
                                        protocol == "linear",
                                        protocol == "knn");
    const EvalReport& report =
        protocol == "linear" ? result.linear : result.knn;
    write_report(ctx.run_dir / "report.json", report, true);
    if (figures) {
      export_figures(report, result.test_embeddings, report.labels, {},
                     ctx.run_dir.string(), seed);
    }
    std::printf("eval(%s): top1 %.4f top5 %.4f\n", protocol.c_str(),
                report.top1, report.top5);
  } else if (protocol == "ensemble") {
    const auto& list = ctx.resolved.at("eval").at("checkpoints");
    if (!list.is_array() || list.empty()) {
      throw Error(ErrorKind::ConfigError,
                  "eval.checkpoints must list the per-stream checkpoints");
    }
    std::vector<EvalReport> reports;
    std::vector<std::vector<float>> embeddings;
    for (const auto& entry : list) {
      auto result = eval_checkpoint(ctx.resolved, entry.get<std::string>(),
                                    true, false);
      reports.push_back(std::move(result.linear));
      if (embeddings.empty()) embeddings = std::move(result.test_embeddings);
    }
    std::vector<double> weights(reports.size(), 1.0);
    const auto& wj = ctx.resolved.at("eval").at("weights");
    for (std::size_t i = 0; i < reports.size() && i < wj.size(); ++i) {
      weights[i] = wj[i].get<double>();
    }
    for (std::size_t i = 0; i < reports.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "report_stream%zu.json", i);
      write_report(ctx.run_dir / name, reports[i], true);
    }
    const EvalReport fused = ensemble_eval(reports, weights);
    write_report(ctx.run_dir / "report.json", fused, true);
    if (figures) {
      export_figures(fused, embeddings, fused.labels, {},
                     ctx.run_dir.string(), seed);
    }
    std::printf("eval(ensemble): top1 %.4f top5 %.4f over %zu streams\n",
                fused.top1, fused.top5, reports.size());
  } else if (protocol == "knn_curve") {
    const auto& list = ctx.resolved.at("eval").at("checkpoints");
    if (!list.is_array() || list.empty()) {
      throw Error(ErrorKind::ConfigError,
                  "eval.checkpoints must list epoch checkpoints");
    }
    std::vector<std::pair<int, double>> curve;
    EvalReport last;
    std::vector<std::vector<float>> embeddings;
    for (const auto& entry : list) {
      auto result = eval_checkpoint(ctx.resolved, entry.get<std::string>(),
                                    false, true);
      curve.emplace_back(result.epoch, result.knn.top1);
      last = std::move(result.knn);
      embeddings = std::move(result.test_embeddings);
    }
    std::sort(curve.begin(), curve.end());
    write_report(ctx.run_dir / "report.json", last, true);
    export_figures(last, embeddings, last.labels, curve, ctx.run_dir.string(),
                   seed);
    std::printf("eval(knn_curve): %zu checkpoints, final top1 %.4f\n",
                curve.size(), curve.empty() ? 0.0 : curve.back().second);
  } else {
    throw Error(ErrorKind::ConfigError,
                "eval.protocol must be linear|knn|ensemble|knn_curve");
  }
  finalize_run(ctx, "eval");
  return 0;
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

int cmd_ablate(const CliOptions& options) {
  json resolved = resolve_from_options(options);
  (void)train_config_from(resolved);
  (void)eval_config_from(resolved);
  RunContext ctx = prepare_run("ablate", resolved,
                               default_run_dir("ablate", resolved),
                               options.force);
  if (ctx.already_complete) {
    std::printf("ablate: run %s is already complete\n",
                ctx.run_dir.string().c_str());
    return 0;
  }
  const std::string mode =
      ctx.resolved.at("ablate").at("mode").get<std::string>();
  const int epochs = ctx.resolved.at("ablate").at("epochs").get<int>();

  auto run_variant = [&](json variant, const std::string& tag)
      -> std::pair<EvalReport, EvalReport> {
    variant["train"]["epochs"] = epochs;
    const fs::path sub = ctx.run_dir / tag;
    const PretrainOutcome outcome = do_pretrain(variant, sub, "");
    auto result = eval_checkpoint(variant, outcome.final_checkpoint.string(),
                                  true, true);
    write_report(sub / "report_linear.json", result.linear, false);
    write_report(sub / "report_knn.json", result.knn, false);
    return {result.linear, result.knn};
  };

  if (mode == "modules") {
    // Progressive toggle lattice: basic augmentation, +DW-KRM, +DGA, +EDGRQ.
    const bool lattice[4][3] = {{false, false, false},
                                {true, false, false},
                                {true, true, false},
                                {true, true, true}};
    std::string csv = "use_dwkrm,use_dga,use_edgrq,linear_top1,linear_top5,knn_top1\n";
    for (const auto& row : lattice) {
      json variant = ctx.resolved;
      variant["train"]["use_dwkrm"] = row[0];
      variant["train"]["use_dga"] = row[1];
      variant["train"]["use_edgrq"] = row[2];
      const std::string tag = std::string("modules_") + (row[0] ? "1" : "0") +
                              (row[1] ? "1" : "0") + (row[2] ? "1" : "0");
      const auto [linear, knn] = run_variant(variant, tag);
      char line[160];
      std::snprintf(line, sizeof(line), "%d,%d,%d,%.6f,%.6f,%.6f\n", row[0],
                    row[1], row[2], linear.top1, linear.top5, knn.top1);
      csv += line;
    }
    std::ofstream out(ctx.run_dir / "ablate_modules.csv");
    out << csv;
  } else if (mode == "bank_policy") {
    std::string runs_csv = "policy,seed,linear_top1,knn_top1\n";
    std::string summary_csv =
        "policy,n,linear_top1_mean,linear_top1_std,knn_top1_mean,knn_top1_std\n";
    for (const std::string policy : {"fifo", "edgrq"}) {
      std::vector<double> lin, knn_acc;
      for (const auto& seed : ctx.resolved.at("ablate").at("seeds")) {
        json variant = ctx.resolved;
        variant["seed"] = seed;
        variant["train"]["use_edgrq"] = (policy == "edgrq");
        const std::string tag =
            "bank_" + policy + "_s" + std::to_string(seed.get<int>());
        const auto [linear, knn] = run_variant(variant, tag);
        lin.push_back(linear.top1);
        knn_acc.push_back(knn.top1);
        char line[120];
        std::snprintf(line, sizeof(line), "%s,%d,%.6f,%.6f\n", policy.c_str(),
                      seed.get<int>(), linear.top1, knn.top1);
        runs_csv += line;
      }
      char line[160];
      std::snprintf(line, sizeof(line), "%s,%zu,%.6f,%.6f,%.6f,%.6f\n",
                    policy.c_str(), lin.size(), mean_of(lin), std_of(lin),
                    mean_of(knn_acc), std_of(knn_acc));
      summary_csv += line;
    }
    std::ofstream runs_out(ctx.run_dir / "ablate_bank_runs.csv");
    runs_out << runs_csv;
    std::ofstream summary_out(ctx.run_dir / "ablate_bank_summary.csv");
    summary_out << summary_csv;
  } else if (mode == "embedding") {
    std::string csv = "embedding_dim,linear_top1,linear_top5,knn_top1\n";
    for (const auto& dim : ctx.resolved.at("ablate").at("embedding_dims")) {
      json variant = ctx.resolved;
      variant["encoder"]["embedding_dim"] = dim;
      const std::string tag = "embed_" + std::to_string(dim.get<int>());
      // record the generated run config
      {
        std::ofstream cfg_out(ctx.run_dir / ("config_" + tag + ".json"));
        cfg_out << variant.dump(2) << "\n";
      }
      const auto [linear, knn] = run_variant(variant, tag);
      char line[120];
      std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f\n", dim.get<int>(),
                    linear.top1, linear.top5, knn.top1);
      csv += line;
    }
    std::ofstream out(ctx.run_dir / "ablate_embedding.csv");
    out << csv;
  } else {
    throw Error(ErrorKind::ConfigError,
                "ablate.mode must be modules|bank_policy|embedding");
  }
  finalize_run(ctx, "ablate");
  std::printf("ablate(%s): results under %s\n", mode.c_str(),
              ctx.run_dir.string().c_str());
  return 0;
}

int cmd_visualize(const CliOptions& options) {
  json resolved = resolve_from_options(options);
  RunContext ctx = prepare_run("visualize", resolved,
                               default_run_dir("visualize", resolved),
                               options.force);
  if (ctx.already_complete) {
    std::printf("visualize: run %s is already complete\n",
                ctx.run_dir.string().c_str());
    return 0;
  }
  const auto& viz = ctx.resolved.at("visualize");
  const std::size_t samples = viz.at("samples").get<std::size_t>();
  const std::size_t frames_shown = viz.at("frames").get<std::size_t>();
  const bool use_test = viz.at("split").get<std::string>() == "test";

  const StreamKind stream = data_stream_from(ctx.resolved);
  const NormalizeMode mode = normalize_mode_from(ctx.resolved);
  const DatasetSplit raw = load_split(ctx.resolved, use_test);
  const DatasetSplit data = preprocess(raw, stream, mode);
  const std::size_t count = std::min(samples, data.size());
  const std::size_t T = data.sequences.front().frames();
  const std::size_t V = data.sequences.front().joints();

  // Masks from a checkpointed key branch when given, else all ones.
  std::vector<KeyRegionMask> masks(count);
  const std::string ckpt_path = viz.at("checkpoint").get<std::string>();
  if (!ckpt_path.empty()) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const EncoderConfig enc_cfg = encoder_config_from(ckpt.config_echo);
    StgcnEncoder<float> key(enc_cfg, data.graph, ckpt.seed);
    key.parameters() = ckpt.key_params;
    const Gsbp gsbp = cached_gsbp(ctx.resolved, data, stream, mode);
    const auto zbar = key.embed(gsbp.values);
    const auto jd = joint_degree_weights(data.graph);
    const TrainConfig tcfg = train_config_from(ctx.resolved);
    for (std::size_t i = 0; i < count; ++i) {
      masks[i] = key_region_mask_for_sample<float>(
          key, data.sequences[i].values, zbar, jd, data.graph, tcfg.theta);
    }
  } else {
    for (auto& m : masks) m = all_ones_mask(T, V);
  }

  // Mask dump: importance in channel 0, binary mask in channel 1.
  {
    SkelpackData dump;
    dump.C = 2;
    dump.T = T;
    dump.V = V;
    dump.N = count;
    dump.values.reserve(count * 2 * T * V);
    for (std::size_t i = 0; i < count; ++i) {
      dump.values.insert(dump.values.end(), masks[i].importance.storage().begin(),
                         masks[i].importance.storage().end());
      for (std::size_t j = 0; j < T * V; ++j) {
        dump.values.push_back(static_cast<float>(masks[i].mask[j]));
      }
      dump.labels.push_back(static_cast<int>(i));
    }
    write_skelpack((ctx.run_dir / "masks.skp").string(), dump);
  }

  // Renders plus the joint screen-coordinate table.
  const auto jd = joint_degree_weights(data.graph);
  std::string coords_csv = "sample,frame,joint,px,py\n";
  const long cell = 120, margin = 12;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& seq = data.sequences[i];
    // augmented counterpart for the lower strip
    const auto& style = data.sequences[(i + 1) % data.size()];
    const SkeletonSequence x_adain = style_transfer(seq, style, jd);
    const AugmentationConfig aug_cfg = augment_config_from(ctx.resolved);
    const auto views = compose_views(
        seq, x_adain, masks[i], aug_cfg,
        Rng::derive({ctx.resolved.at("seed").get<std::uint64_t>(), 900, i, 0}),
        Rng::derive({ctx.resolved.at("seed").get<std::uint64_t>(), 900, i, 1}),
        style, style);

    // screen bounds from the original sequence
    float min_x = seq.values(0, 0, 0), max_x = min_x;
    float min_y = seq.values(1, 0, 0), max_y = min_y;
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t v = 0; v < V; ++v) {
        min_x = std::min(min_x, seq.values(0, t, v));
        max_x = std::max(max_x, seq.values(0, t, v));
        min_y = std::min(min_y, seq.values(1, t, v));
        max_y = std::max(max_y, seq.values(1, t, v));
      }
    }
    const double span_x = std::max(1e-6, static_cast<double>(max_x - min_x));
    const double span_y = std::max(1e-6, static_cast<double>(max_y - min_y));

    const std::size_t shown = std::min(frames_shown, T);
    Canvas canvas(static_cast<std::size_t>(2 * margin + cell * static_cast<long>(shown)),
                  static_cast<std::size_t>(2 * margin + cell * 2));
    auto to_px = [&](float x, long frame_slot) {
      return margin + cell * frame_slot +
             static_cast<long>((x - min_x) / span_x * (cell - 10)) + 5;
    };
    auto to_py = [&](float y, long row) {
      return margin + cell * row + (cell - 10) -
             static_cast<long>((y - min_y) / span_y * (cell - 10)) + 5;
    };

    for (std::size_t f = 0; f < shown; ++f) {
      const std::size_t t = shown <= 1 ? 0 : f * (T - 1) / (shown - 1);
      for (int row = 0; row < 2; ++row) {
        const auto& src = row == 0 ? seq : views.view_q;
        for (const auto& [a, b] : data.graph.edges) {
          canvas.draw_line(
              to_px(src.values(0, t, static_cast<std::size_t>(a)),
                    static_cast<long>(f)),
              to_py(src.values(1, t, static_cast<std::size_t>(a)), row),
              to_px(src.values(0, t, static_cast<std::size_t>(b)),
                    static_cast<long>(f)),
              to_py(src.values(1, t, static_cast<std::size_t>(b)), row), 180,
              180, 180);
        }
        for (std::size_t v = 0; v < V; ++v) {
          const bool key = masks[i].mask(t, v) != 0;
          const long px = to_px(src.values(0, t, v), static_cast<long>(f));
          const long py = to_py(src.values(1, t, v), row);
          canvas.draw_dot(px, py, 2, key ? 220 : 60, 60, key ? 60 : 200);
          if (row == 0) {
            char line[96];
            std::snprintf(line, sizeof(line), "%zu,%zu,%zu,%ld,%ld\n", i, t, v,
                          px, py);
            coords_csv += line;
          }
        }
      }
    }
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%03zu.png", i);
    canvas.save((ctx.run_dir / name).string());
  }
  {
    std::ofstream out(ctx.run_dir / "visualize_coords.csv");
    out << coords_csv;
  }
  finalize_run(ctx, "visualize");
  std::printf("visualize: %zu overlays under %s\n", count,
              ctx.run_dir.string().c_str());
  return 0;
}

int dispatch(const CliOptions& options) {
  if (options.config_path.empty()) {
    throw Error(ErrorKind::ConfigError, "--config is required");
  }
  if (options.command == "make-toy") return cmd_make_toy(options);
  if (options.command == "pretrain") return cmd_pretrain(options);
  if (options.command == "eval") return cmd_eval(options);
  if (options.command == "ablate") return cmd_ablate(options);
  if (options.command == "visualize") return cmd_visualize(options);
  throw Error(ErrorKind::ConfigError,
              "unknown command '" + options.command + "'");
}

bool is_validation_error(ErrorKind kind) {
  return kind == ErrorKind::ConfigError || kind == ErrorKind::InvalidTheta ||
         kind == ErrorKind::UnknownTemplate ||
         kind == ErrorKind::NonDifferentiableConfig;
}

}  // namespace

int run(const CliOptions& options) noexcept {
  try {
    return dispatch(options);
  } catch (const Error& e) {
    const ordered_json diag = {{"error", error_kind_name(e.kind())},
                               {"message", e.what()}};
    std::fprintf(stderr, "%s\n", diag.dump().c_str());
    return is_validation_error(e.kind()) ? 2 : 3;
  } catch (const std::exception& e) {
    const ordered_json diag = {{"error", "Unhandled"}, {"message", e.what()}};
    std::fprintf(stderr, "%s\n", diag.dump().c_str());
    return 3;
  }
}

}  // namespace dogclr::cli
