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

#include "dogclr/config.hpp"

#include <fstream>

#include "dogclr/error.hpp"

namespace dogclr {

namespace {

using nlohmann::json;

// Arrays whose element layout is free-form (not merged key-by-key).
bool is_leaf_array(const std::string& path) {
  return path == "toy.classes" || path == "encoder.stages" ||
         path == "eval.weights" || path == "eval.checkpoints" ||
         path == "ablate.seeds" || path == "ablate.embedding_dims" ||
         path == "augment.strong_probs";
}

void merge_into(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) {
    throw Error(ErrorKind::ConfigError,
                "config section '" + (path.empty() ? "<root>" : path) +
                    "' must be an object");
  }
  for (const auto& [key, value] : user.items()) {
    const std::string child = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) {
      throw Error(ErrorKind::ConfigError, "unknown config key '" + child + "'");
    }
    if (base[key].is_object() && !is_leaf_array(child)) {
      merge_into(base[key], value, child);
    } else {
      base[key] = value;
    }
  }
}

double get_number(const json& j, const std::string& path) {
  const json* cur = &j;
  std::size_t begin = 0;
  while (true) {
    const std::size_t dot = path.find('.', begin);
    const std::string key = path.substr(begin, dot - begin);
    if (!cur->contains(key)) {
      throw Error(ErrorKind::ConfigError, "missing config key '" + path + "'");
    }
    cur = &(*cur)[key];
    if (dot == std::string::npos) break;
    begin = dot + 1;
  }
  if (!cur->is_number()) {
    throw Error(ErrorKind::ConfigError,
                "config key '" + path + "' must be a number");
  }
  return cur->get<double>();
}

std::string get_string(const json& j, const std::string& path) {
  const json* cur = &j;
  std::size_t begin = 0;
  while (true) {
    const std::size_t dot = path.find('.', begin);
    const std::string key = path.substr(begin, dot - begin);
    if (!cur->contains(key)) {
      throw Error(ErrorKind::ConfigError, "missing config key '" + path + "'");
    }
    cur = &(*cur)[key];
    if (dot == std::string::npos) break;
    begin = dot + 1;
  }
  if (!cur->is_string()) {
    throw Error(ErrorKind::ConfigError,
                "config key '" + path + "' must be a string");
  }
  return cur->get<std::string>();
}

bool get_bool(const json& j, const std::string& section, const char* key) {
  const auto& v = j.at(section).at(key);
  if (!v.is_boolean()) {
    throw Error(ErrorKind::ConfigError, "config key '" + section + "." + key +
                                            "' must be a boolean");
  }
  return v.get<bool>();
}

}  // namespace

nlohmann::json default_config() {
  return json{
      {"seed", 1},
      {"run_dir", nullptr},
      {"data",
       {{"dir", "./data/toy"},
        {"train", "train.skp"},
        {"test", "test.skp"},
        {"graph", "builtin:toy9"},
        {"stream", "joint"},
        {"normalize", "center_root"}}},
      {"toy",
       {{"classes", json::array({"wave", "kick", "jump", "still"})},
        {"per_class", 100},
        {"per_class_test", 50},
        {"T", 32},
        {"V", 9},
        {"noise_sigma", 0.02},
        {"out_dir", ""}}},  // "" = data.dir
      {"encoder",
       {{"preset", "tiny"},
        {"stages", nullptr},  // custom: [[channels, temporal_kernel], ...]
        {"embedding_dim", 256},
        {"feature_stage", -1},
        {"pool", "average"},
        {"projection", "mlp"}}},
      {"augment",
       {{"shear_amplitude", 0.5},
        {"rotation_max_deg", 30.0},
        {"axis_mask_axes", json::array({true, true, true})},
        {"crop_ratio_min", 0.6},
        {"crop_ratio_max", 1.0},
        {"noise_sigma_strong", 0.05},
        {"blur_kernel", 5},
        {"blur_sigma", 1.0},
        {"strong_probs", json::array({0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5})},
        {"force_one", true},
        {"noise_sigma_normal", 0.1},
        {"mix_prob", 0.5},
        {"mix_ratio_min", 0.6},
        {"mix_ratio_max", 0.9},
        {"symmetric_views", true}}},
      {"mask", {{"theta_mode", "quantile"}, {"theta_value", 0.7}}},
      {"train",
       {{"epochs", 300},
        {"batch_size", 128},
        {"lr", 0.1},
        {"weight_decay", 1e-4},
        {"opt_momentum", 0.9},
        {"schedule", "cosine"},
        {"scale_lr_by_batch", true},
        {"temperature", 0.2},
        {"momentum", 0.99},
        {"bank_capacity", 32768},
        {"probe", "key"},
        {"use_dwkrm", true},
        {"use_dga", true},
        {"use_edgrq", true},
        {"checkpoint_every", 10},
        {"telemetry", false},
        {"audit_augment", false}}},
      {"eval",
       {{"protocol", "linear"},
        {"epochs", 100},
        {"lr", 0.1},
        {"momentum", 0.9},
        {"batch_size", 128},
        {"k", 20},
        {"weighted_vote", false},
        {"features", "backbone"},
        {"checkpoint", ""},
        {"checkpoints", json::array()},
        {"weights", json::array({1.0, 1.0, 1.0})},
        {"export_figures", true}}},
      {"visualize",
       {{"samples", 8}, {"frames", 4}, {"checkpoint", ""}, {"split", "test"}}},
      {"ablate",
       {{"mode", "modules"},
        {"seeds", json::array({1, 2, 3})},
        {"epochs", 5},
        {"embedding_dims", json::array({128, 256, 512, 1024})}}},
  };
}

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::ConfigError, "cannot open config file " + path);
  }
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError,
                "config file " + path + " is not valid JSON: " + e.what());
  }
}

void apply_overrides(nlohmann::json& config,
                     const std::vector<std::string>& sets) {
  for (const auto& entry : sets) {
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorKind::ConfigError,
                  "--set expects key.path=value, got '" + entry + "'");
    }
    const std::string path = entry.substr(0, eq);
    const std::string text = entry.substr(eq + 1);
    json value;
    try {
      value = json::parse(text);
    } catch (const json::exception&) {
      value = text;  // bare strings are fine
    }
    json* cur = &config;
    std::size_t begin = 0;
    while (true) {
      const std::size_t dot = path.find('.', begin);
      const std::string key = path.substr(begin, dot - begin);
      if (key.empty()) {
        throw Error(ErrorKind::ConfigError, "bad --set path '" + path + "'");
      }
      if (dot == std::string::npos) {
        (*cur)[key] = value;
        break;
      }
      cur = &(*cur)[key];
      begin = dot + 1;
    }
  }
}

nlohmann::json resolve_config(const nlohmann::json& user) {
  json resolved = default_config();
  merge_into(resolved, user, "");
  return resolved;
}

ToySpec toy_spec_from(const nlohmann::json& resolved) {
  const auto& toy = resolved.at("toy");
  ToySpec spec;
  for (const auto& c : toy.at("classes")) {
    if (!c.is_string() || !is_known_toy_template(c.get<std::string>())) {
      throw Error(ErrorKind::UnknownTemplate,
                  "toy.classes: unknown toy template " + c.dump());
    }
    spec.classes.push_back(c.get<std::string>());
  }
  spec.per_class = static_cast<std::size_t>(get_number(resolved, "toy.per_class"));
  spec.per_class_test =
      static_cast<std::size_t>(get_number(resolved, "toy.per_class_test"));
  spec.T = static_cast<std::size_t>(get_number(resolved, "toy.T"));
  spec.V = static_cast<std::size_t>(get_number(resolved, "toy.V"));
  spec.noise_sigma = get_number(resolved, "toy.noise_sigma");
  return spec;
}

EncoderConfig encoder_config_from(const nlohmann::json& resolved) {
  const auto& enc = resolved.at("encoder");
  const std::string preset = get_string(resolved, "encoder.preset");
  const std::size_t dim =
      static_cast<std::size_t>(get_number(resolved, "encoder.embedding_dim"));
  EncoderConfig cfg;
  if (preset == "tiny") {
    cfg = EncoderConfig::tiny(dim);
  } else if (preset == "small") {
    cfg = EncoderConfig::small(dim);
  } else if (preset == "identity") {
    cfg = EncoderConfig::identity();
  } else if (preset == "custom") {
    if (!enc.at("stages").is_array()) {
      throw Error(ErrorKind::ConfigError,
                  "encoder.stages must be [[channels, kernel], ...] for the "
                  "custom preset");
    }
    cfg.embedding_dim = dim;
    for (const auto& s : enc.at("stages")) {
      if (!s.is_array() || s.size() != 2) {
        throw Error(ErrorKind::ConfigError,
                    "encoder.stages entries must be [channels, kernel]");
      }
      cfg.stages.push_back(
          {s[0].get<std::size_t>(), s[1].get<std::size_t>()});
    }
  } else {
    throw Error(ErrorKind::ConfigError,
                "encoder.preset must be tiny|small|identity|custom");
  }
  if (preset != "identity") {
    cfg.feature_stage = static_cast<int>(get_number(resolved, "encoder.feature_stage"));
    const std::string pool = get_string(resolved, "encoder.pool");
    if (pool == "average") {
      cfg.pool = EncoderConfig::Pool::average;
    } else if (pool == "flatten") {
      cfg.pool = EncoderConfig::Pool::flatten;
    } else {
      throw Error(ErrorKind::ConfigError, "encoder.pool must be average|flatten");
    }
    const std::string proj = get_string(resolved, "encoder.projection");
    if (proj == "mlp") {
      cfg.projection = EncoderConfig::Projection::mlp;
    } else if (proj == "identity") {
      cfg.projection = EncoderConfig::Projection::identity;
    } else {
      throw Error(ErrorKind::ConfigError,
                  "encoder.projection must be mlp|identity");
    }
  }
  cfg.validate();
  return cfg;
}

AugmentationConfig augment_config_from(const nlohmann::json& resolved) {
  const auto& a = resolved.at("augment");
  AugmentationConfig cfg;
  cfg.shear_amplitude = get_number(resolved, "augment.shear_amplitude");
  cfg.rotation_max_deg = get_number(resolved, "augment.rotation_max_deg");
  const auto& axes = a.at("axis_mask_axes");
  if (!axes.is_array() || axes.size() != 3) {
    throw Error(ErrorKind::ConfigError,
                "augment.axis_mask_axes must be 3 booleans");
  }
  for (std::size_t i = 0; i < 3; ++i) cfg.axis_mask_axes[i] = axes[i].get<bool>();
  cfg.crop_ratio_min = get_number(resolved, "augment.crop_ratio_min");
  cfg.crop_ratio_max = get_number(resolved, "augment.crop_ratio_max");
  cfg.noise_sigma_strong = get_number(resolved, "augment.noise_sigma_strong");
  cfg.blur_kernel = static_cast<int>(get_number(resolved, "augment.blur_kernel"));
  cfg.blur_sigma = get_number(resolved, "augment.blur_sigma");
  const auto& probs = a.at("strong_probs");
  if (!probs.is_array() || probs.size() != 8) {
    throw Error(ErrorKind::ConfigError,
                "augment.strong_probs must hold 8 probabilities");
  }
  for (std::size_t i = 0; i < 8; ++i) cfg.strong_probs[i] = probs[i].get<double>();
  cfg.force_one = get_bool(resolved, "augment", "force_one");
  cfg.noise_sigma_normal = get_number(resolved, "augment.noise_sigma_normal");
  cfg.mix_prob = get_number(resolved, "augment.mix_prob");
  cfg.mix_ratio_min = get_number(resolved, "augment.mix_ratio_min");
  cfg.mix_ratio_max = get_number(resolved, "augment.mix_ratio_max");
  cfg.symmetric_views = get_bool(resolved, "augment", "symmetric_views");
  cfg.validate();
  return cfg;
}

StreamKind data_stream_from(const nlohmann::json& resolved) {
  return stream_from_name(get_string(resolved, "data.stream"));
}

NormalizeMode normalize_mode_from(const nlohmann::json& resolved) {
  const std::string mode = get_string(resolved, "data.normalize");
  if (mode == "center_root") return NormalizeMode::center_root;
  if (mode == "none") return NormalizeMode::none;
  throw Error(ErrorKind::ConfigError,
              "data.normalize must be center_root|none");
}

TrainConfig train_config_from(const nlohmann::json& resolved) {
  TrainConfig cfg;
  cfg.stream = data_stream_from(resolved);
  cfg.epochs = static_cast<int>(get_number(resolved, "train.epochs"));
  cfg.batch_size = static_cast<int>(get_number(resolved, "train.batch_size"));
  cfg.optimizer.lr = get_number(resolved, "train.lr");
  cfg.optimizer.weight_decay = get_number(resolved, "train.weight_decay");
  cfg.optimizer.momentum = get_number(resolved, "train.opt_momentum");
  const std::string schedule = get_string(resolved, "train.schedule");
  if (schedule == "cosine") {
    cfg.optimizer.schedule = OptimizerConfig::Schedule::cosine;
  } else if (schedule == "constant") {
    cfg.optimizer.schedule = OptimizerConfig::Schedule::constant;
  } else {
    throw Error(ErrorKind::ConfigError, "train.schedule must be cosine|constant");
  }
  cfg.optimizer.scale_lr_by_batch = get_bool(resolved, "train", "scale_lr_by_batch");
  cfg.temperature = get_number(resolved, "train.temperature");
  cfg.momentum = get_number(resolved, "train.momentum");
  cfg.bank_capacity =
      static_cast<std::size_t>(get_number(resolved, "train.bank_capacity"));
  const std::string probe = get_string(resolved, "train.probe");
  if (probe == "key") {
    cfg.probe = TrainConfig::ProbeMode::key;
  } else if (probe == "batch_mean") {
    cfg.probe = TrainConfig::ProbeMode::batch_mean;
  } else {
    throw Error(ErrorKind::ConfigError, "train.probe must be key|batch_mean");
  }
  cfg.use_dwkrm = get_bool(resolved, "train", "use_dwkrm");
  cfg.use_dga = get_bool(resolved, "train", "use_dga");
  cfg.use_edgrq = get_bool(resolved, "train", "use_edgrq");
  cfg.seed = static_cast<std::uint64_t>(get_number(resolved, "seed"));

  const std::string theta_mode = get_string(resolved, "mask.theta_mode");
  if (theta_mode == "quantile") {
    cfg.theta.mode = ThetaSpec::Mode::quantile;
  } else if (theta_mode == "absolute") {
    cfg.theta.mode = ThetaSpec::Mode::absolute;
  } else {
    throw Error(ErrorKind::ConfigError, "mask.theta_mode must be quantile|absolute");
  }
  cfg.theta.value = get_number(resolved, "mask.theta_value");
  cfg.augment = augment_config_from(resolved);
  cfg.encoder = encoder_config_from(resolved);
  cfg.validate();
  return cfg;
}

EvalConfig eval_config_from(const nlohmann::json& resolved) {
  EvalConfig cfg;
  cfg.epochs = static_cast<int>(get_number(resolved, "eval.epochs"));
  cfg.lr = get_number(resolved, "eval.lr");
  cfg.momentum = get_number(resolved, "eval.momentum");
  cfg.batch_size = static_cast<int>(get_number(resolved, "eval.batch_size"));
  cfg.k = static_cast<int>(get_number(resolved, "eval.k"));
  cfg.weighted_vote = get_bool(resolved, "eval", "weighted_vote");
  const std::string features = get_string(resolved, "eval.features");
  if (features == "backbone") {
    cfg.features = EvalConfig::Features::backbone;
  } else if (features == "embedding") {
    cfg.features = EvalConfig::Features::embedding;
  } else {
    throw Error(ErrorKind::ConfigError, "eval.features must be backbone|embedding");
  }
  cfg.seed = static_cast<std::uint64_t>(get_number(resolved, "seed"));
  if (cfg.epochs < 1 || cfg.lr <= 0.0 || cfg.k < 1) {
    throw Error(ErrorKind::ConfigError, "eval section has out-of-range values");
  }
  return cfg;
}

}  // namespace dogclr
