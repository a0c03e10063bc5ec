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

#include <CLI11.hpp>

#include "dogclr/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"DoGCLR: dominance-game contrastive pretraining for "
               "skeleton action recognition"};
  app.require_subcommand(1);

  dogclr::cli::CliOptions options;
  long long seed_flag = -1;

  auto add_common = [&](CLI::App* cmd, bool with_resume) {
    cmd->add_option("--config", options.config_path, "config file (JSON)")
        ->required();
    cmd->add_option("--seed", seed_flag, "override the config seed");
    cmd->add_flag("--force", options.force, "redo a completed run");
    cmd->add_option("--set", options.sets,
                    "override config values (key.path=value)");
    if (with_resume) {
      cmd->add_option("--resume", options.resume,
                      "resume from a checkpoint file");
    }
  };

  add_common(app.add_subcommand("make-toy", "generate the toy dataset"), false);
  add_common(app.add_subcommand("pretrain", "contrastive pretraining"), true);
  add_common(app.add_subcommand("eval", "linear / KNN / ensemble evaluation"),
             false);
  add_common(app.add_subcommand("ablate", "module / bank / embedding sweeps"),
             false);
  add_common(app.add_subcommand("visualize", "mask and augmentation overlays"),
             false);

  CLI11_PARSE(app, argc, argv);

  options.command = app.get_subcommands().front()->get_name();
  if (seed_flag >= 0) {
    options.seed = static_cast<std::uint64_t>(seed_flag);
  }
  return dogclr::cli::run(options);
}
