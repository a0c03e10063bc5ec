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

#include <optional>
#include <string>
#include <vector>

namespace dogclr::cli {

// Command surface:
//   dogclr make-toy|pretrain|eval|ablate|visualize --config PATH
//          [--seed N] [--resume PATH] [--force] [--set key.path=value ...]
// Environment: DOGCLR_RUNS_DIR (default ./runs), DOGCLR_THREADS.
// Exit codes: 0 success, 2 config validation failure, 3 runtime failure.
// Errors go to stderr as one structured JSON line.

struct CliOptions {
  std::string command;
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string resume;
  bool force = false;
};

int run(const CliOptions& options) noexcept;

}  // namespace dogclr::cli
