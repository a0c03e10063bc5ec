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

#include <json.hpp>

#include "dogclr/trainer.hpp"

namespace dogclr {

// Checkpoint container: one JSON manifest line (config echo, counters, seed,
// bank geometry, blob directory) followed by raw little-endian float32
// blobs. Round-trips are bit-exact, which is what makes resume reproduce the
// uninterrupted trajectory.

struct Checkpoint {
  nlohmann::json config_echo;  // resolved run config (opaque to the loader)
  std::int64_t step = 0;
  int epoch = 0;
  std::uint64_t seed = 0;
  std::vector<float> query_params;
  std::vector<float> key_params;
  std::vector<float> opt_velocity;
  // bank state
  std::size_t bank_capacity = 0;
  std::size_t bank_dim = 0;
  std::size_t bank_count = 0;
  std::size_t bank_cursor = 0;
  BankPolicy bank_policy = BankPolicy::fifo;
  std::vector<float> bank_store;
  BankStats bank_stats;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Snapshot of a trainer's mutable state.
Checkpoint make_checkpoint(const Trainer& trainer,
                           nlohmann::json config_echo = {});

/// Restores a checkpoint into a freshly constructed trainer (same config and
/// data). Validates parameter and bank geometry.
void restore_checkpoint(Trainer& trainer, const Checkpoint& ckpt);

}  // namespace dogclr
