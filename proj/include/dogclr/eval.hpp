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
#include <vector>

#include <json.hpp>

#include "dogclr/encoder.hpp"
#include "dogclr/skeleton.hpp"

namespace dogclr {

// Downstream protocols over a frozen pretrained encoder: linear probe, KNN,
// and the stream-score ensemble, plus the CSV/PNG figure exports.

struct EvalConfig {
  int epochs = 100;
  double lr = 0.1;
  double momentum = 0.9;
  int batch_size = 128;
  int k = 20;                  // KNN neighbours
  bool weighted_vote = false;  // similarity-weighted KNN voting
  enum class Features { backbone, embedding } features = Features::backbone;
  std::uint64_t seed = 1;
};

struct EvalReport {
  std::string protocol;
  double top1 = 0.0;
  double top5 = 0.0;
  std::vector<double> per_class;           // accuracy per class
  std::vector<std::vector<int>> confusion; // [true][predicted]
  nlohmann::json config_echo;
  // per-test-sample class scores (softmax for linear, vote shares for KNN);
  // the ensemble consumes these
  std::vector<std::vector<double>> scores;
  std::vector<int> labels;  // test labels aligned with scores
};

nlohmann::json report_to_json(const EvalReport& report,
                              bool include_scores = false);

struct FeatureMatrix {
  std::vector<std::vector<float>> rows;
  std::vector<int> labels;
  std::size_t dim() const { return rows.empty() ? 0 : rows.front().size(); }
};

/// Frozen-encoder features for a split: pooled backbone output (default) or
/// the normalized projection embedding.
FeatureMatrix extract_features(const StgcnEncoder<float>& encoder,
                               const DatasetSplit& split,
                               EvalConfig::Features kind);

/// Multinomial logistic probe trained with SGD (momentum, step decay at 60%
/// and 80% of the epochs). Returns scores for the test rows.
EvalReport train_linear_probe(const FeatureMatrix& train,
                              const FeatureMatrix& test, const EvalConfig& cfg);

/// Linear evaluation protocol: freeze the encoder, fit the probe, report.
EvalReport linear_eval(const StgcnEncoder<float>& encoder,
                       const DatasetSplit& train, const DatasetSplit& test,
                       const EvalConfig& cfg);

/// Cosine-similarity KNN with majority voting; ties break on summed
/// similarity.
EvalReport knn_eval(const StgcnEncoder<float>& encoder,
                    const DatasetSplit& train, const DatasetSplit& test,
                    const EvalConfig& cfg);

EvalReport knn_eval_features(const FeatureMatrix& train,
                             const FeatureMatrix& test, const EvalConfig& cfg);

/// Weighted score-sum fusion of per-stream reports.
EvalReport ensemble_eval(const std::vector<EvalReport>& stream_reports,
                         const std::vector<double>& weights);

/// Deterministic 2-d PCA projection of embeddings (power iteration with a
/// seeded start).
std::vector<std::array<double, 2>> project_2d(
    const std::vector<std::vector<float>>& embeddings, std::uint64_t seed);

struct FigureFiles {
  std::vector<std::string> paths;
};

/// Writes confusion CSV+PNG, a 2-d scatter CSV+PNG of the embeddings, and,
/// when curve points are supplied, an accuracy-curve CSV+PNG.
FigureFiles export_figures(
    const EvalReport& report,
    const std::vector<std::vector<float>>& embeddings,
    const std::vector<int>& labels,
    const std::vector<std::pair<int, double>>& accuracy_curve,
    const std::string& out_dir, std::uint64_t seed);

}  // namespace dogclr
