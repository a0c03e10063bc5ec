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

#include <string>
#include <vector>

#include <json.hpp>

#include "dogclr/eval.hpp"
#include "dogclr/toy_dataset.hpp"
#include "dogclr/trainer.hpp"

namespace dogclr {

// One structured config file drives every command. Unknown keys are
// rejected; omitted keys take defaults. CLI --set key.path=value overrides
// file values.

/// The full default configuration.
nlohmann::json default_config();

/// Parses a config file (JSON). Throws ConfigError on syntax errors.
nlohmann::json load_config_file(const std::string& path);

/// Applies dotted-path overrides ("train.epochs=30"). Values parse as JSON
/// scalars where possible, else as strings.
void apply_overrides(nlohmann::json& config,
                     const std::vector<std::string>& sets);

/// Merges user config over the defaults, rejecting unknown keys, and
/// performs structural validation. Returns the resolved snapshot.
nlohmann::json resolve_config(const nlohmann::json& user);

// Typed extractors over a resolved config. Each throws ConfigError (or a
// more specific kind) naming the offending field.
ToySpec toy_spec_from(const nlohmann::json& resolved);
EncoderConfig encoder_config_from(const nlohmann::json& resolved);
AugmentationConfig augment_config_from(const nlohmann::json& resolved);
TrainConfig train_config_from(const nlohmann::json& resolved);
EvalConfig eval_config_from(const nlohmann::json& resolved);
StreamKind data_stream_from(const nlohmann::json& resolved);
NormalizeMode normalize_mode_from(const nlohmann::json& resolved);

}  // namespace dogclr
