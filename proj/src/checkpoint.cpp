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

#include "dogclr/checkpoint.hpp"

#include <fstream>

#include "dogclr/error.hpp"

namespace dogclr {

namespace {

using nlohmann::json;

constexpr int kVersion = 1;

struct BlobRef {
  const std::vector<float>* data;
  const char* name;
};

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json manifest;
  manifest["format"] = "dogclr-ckpt";
  manifest["version"] = kVersion;
  manifest["config"] = ckpt.config_echo;
  manifest["step"] = ckpt.step;
  manifest["epoch"] = ckpt.epoch;
  manifest["rng"] = {{"scheme", "counter"}, {"seed", ckpt.seed}};
  manifest["bank"] = {{"capacity", ckpt.bank_capacity},
                      {"dim", ckpt.bank_dim},
                      {"count", ckpt.bank_count},
                      {"cursor", ckpt.bank_cursor},
                      {"policy", bank_policy_name(ckpt.bank_policy)},
                      {"appends", ckpt.bank_stats.appends},
                      {"replacements", ckpt.bank_stats.replacements},
                      {"sum_max_payoff", ckpt.bank_stats.sum_max_payoff},
                      {"sum_fifo_payoff", ckpt.bank_stats.sum_fifo_payoff}};

  const BlobRef blobs[] = {{&ckpt.query_params, "query_params"},
                           {&ckpt.key_params, "key_params"},
                           {&ckpt.opt_velocity, "opt_velocity"},
                           {&ckpt.bank_store, "bank_store"}};
  json dir = json::array();
  std::size_t offset = 0;
  for (const auto& b : blobs) {
    dir.push_back({{"name", b.name},
                   {"dtype", "f32le"},
                   {"count", b.data->size()},
                   {"offset", offset}});
    offset += b.data->size() * sizeof(float);
  }
  manifest["blobs"] = dir;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write checkpoint " + path);
  const std::string line = manifest.dump();
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.put('\n');
  for (const auto& b : blobs) {
    out.write(reinterpret_cast<const char*>(b.data->data()),
              static_cast<std::streamsize>(b.data->size() * sizeof(float)));
  }
  if (!out) throw Error(ErrorKind::IoError, "checkpoint write failed " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open checkpoint " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::IoError, "missing checkpoint manifest in " + path);
  }
  json manifest;
  try {
    manifest = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::IoError,
                "bad checkpoint manifest in " + path + ": " + e.what());
  }
  if (manifest.value("format", "") != "dogclr-ckpt") {
    throw Error(ErrorKind::IoError, path + " is not a checkpoint file");
  }

  Checkpoint ckpt;
  ckpt.config_echo = manifest.value("config", json{});
  ckpt.step = manifest.at("step").get<std::int64_t>();
  ckpt.epoch = manifest.at("epoch").get<int>();
  ckpt.seed = manifest.at("rng").at("seed").get<std::uint64_t>();
  const auto& bank = manifest.at("bank");
  ckpt.bank_capacity = bank.at("capacity").get<std::size_t>();
  ckpt.bank_dim = bank.at("dim").get<std::size_t>();
  ckpt.bank_count = bank.at("count").get<std::size_t>();
  ckpt.bank_cursor = bank.at("cursor").get<std::size_t>();
  ckpt.bank_policy = bank_policy_from_name(bank.at("policy").get<std::string>());
  ckpt.bank_stats.appends = bank.at("appends").get<std::uint64_t>();
  ckpt.bank_stats.replacements = bank.at("replacements").get<std::uint64_t>();
  ckpt.bank_stats.sum_max_payoff = bank.at("sum_max_payoff").get<double>();
  ckpt.bank_stats.sum_fifo_payoff = bank.at("sum_fifo_payoff").get<double>();

  std::vector<float>* slots[4] = {&ckpt.query_params, &ckpt.key_params,
                                  &ckpt.opt_velocity, &ckpt.bank_store};
  const char* names[4] = {"query_params", "key_params", "opt_velocity",
                          "bank_store"};
  const auto& dir = manifest.at("blobs");
  if (dir.size() != 4) {
    throw Error(ErrorKind::IoError, "unexpected blob directory in " + path);
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (dir[i].at("name").get<std::string>() != names[i] ||
        dir[i].value("dtype", "") != "f32le") {
      throw Error(ErrorKind::IoError, "unexpected blob layout in " + path);
    }
    slots[i]->resize(dir[i].at("count").get<std::size_t>());
    in.read(reinterpret_cast<char*>(slots[i]->data()),
            static_cast<std::streamsize>(slots[i]->size() * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) !=
        slots[i]->size() * sizeof(float)) {
      throw Error(ErrorKind::IoError, "truncated checkpoint blob in " + path);
    }
  }
  return ckpt;
}

Checkpoint make_checkpoint(const Trainer& trainer, nlohmann::json config_echo) {
  const TrainState& state = trainer.state();
  Checkpoint ckpt;
  ckpt.config_echo = std::move(config_echo);
  ckpt.step = state.step;
  ckpt.epoch = state.epoch;
  ckpt.seed = trainer.config().seed;
  ckpt.query_params = state.pair.query.parameters();
  ckpt.key_params = state.pair.key.parameters();
  ckpt.opt_velocity = state.opt_velocity;
  ckpt.bank_capacity = state.bank.capacity();
  ckpt.bank_dim = state.bank.dim();
  ckpt.bank_count = state.bank.size();
  ckpt.bank_cursor = state.bank.cursor();
  ckpt.bank_policy = state.bank.policy();
  ckpt.bank_store = state.bank.raw_store();
  ckpt.bank_stats = state.bank.stats();
  return ckpt;
}

void restore_checkpoint(Trainer& trainer, const Checkpoint& ckpt) {
  TrainState& state = trainer.state();
  if (ckpt.query_params.size() != state.pair.query.parameter_count() ||
      ckpt.key_params.size() != state.pair.key.parameter_count() ||
      ckpt.opt_velocity.size() != state.opt_velocity.size()) {
    throw Error(ErrorKind::ShapeMismatch,
                "checkpoint parameter geometry does not match the model");
  }
  if (ckpt.bank_capacity != state.bank.capacity() ||
      ckpt.bank_dim != state.bank.dim() ||
      ckpt.bank_policy != state.bank.policy()) {
    throw Error(ErrorKind::ShapeMismatch,
                "checkpoint bank geometry does not match the config");
  }
  state.pair.query.parameters() = ckpt.query_params;
  state.pair.key.parameters() = ckpt.key_params;
  state.opt_velocity = ckpt.opt_velocity;
  state.bank.restore(ckpt.bank_store, ckpt.bank_count, ckpt.bank_cursor,
                     ckpt.bank_stats);
  state.step = ckpt.step;
  state.epoch = ckpt.epoch;
}

}  // namespace dogclr
