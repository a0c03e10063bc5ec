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

#include "dogclr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "dogclr/error.hpp"
#include "dogclr/parallel.hpp"
#include "dogclr/pngio.hpp"
#include "dogclr/rng.hpp"

namespace dogclr {

namespace {

namespace fs = std::filesystem;

std::size_t num_classes_of(const FeatureMatrix& train,
                           const FeatureMatrix& test) {
  std::set<int> train_labels(train.labels.begin(), train.labels.end());
  int max_label = -1;
  for (int l : train.labels) {
    if (l < 0) throw Error(ErrorKind::LabelMismatch, "negative train label");
    max_label = std::max(max_label, l);
  }
  for (int l : test.labels) {
    if (!train_labels.count(l)) {
      throw Error(ErrorKind::LabelMismatch,
                  "test label " + std::to_string(l) + " unseen in train");
    }
  }
  return static_cast<std::size_t>(max_label + 1);
}

/// Fills top1/top5/per-class/confusion from per-sample class scores.
/// Prediction ties break to the lowest class index; an explicit prediction
/// vector (KNN's similarity tie-break) overrides the score argmax.
void finalize_report(EvalReport& report, std::size_t num_classes,
                     const std::vector<int>* predictions = nullptr) {
  const std::size_t n = report.scores.size();
  report.confusion.assign(num_classes, std::vector<int>(num_classes, 0));
  std::vector<int> class_total(num_classes, 0);
  std::vector<int> class_hit(num_classes, 0);
  const std::size_t top_k = std::min<std::size_t>(5, num_classes);
  std::size_t hit1 = 0, hit5 = 0;

  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = report.scores[i];
    std::size_t pred = 0;
    if (predictions) {
      pred = static_cast<std::size_t>((*predictions)[i]);
    } else {
      for (std::size_t c = 1; c < num_classes; ++c) {
        if (s[c] > s[pred]) pred = c;
      }
    }
    const std::size_t truth = static_cast<std::size_t>(report.labels[i]);
    report.confusion[truth][pred] += 1;
    class_total[truth] += 1;
    if (pred == truth) {
      ++hit1;
      class_hit[truth] += 1;
    }
    // top-k membership by score ordering
    std::vector<std::size_t> order(num_classes);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    for (std::size_t r = 0; r < top_k; ++r) {
      if (order[r] == truth) {
        ++hit5;
        break;
      }
    }
  }
  report.top1 = n ? static_cast<double>(hit1) / static_cast<double>(n) : 0.0;
  report.top5 = n ? static_cast<double>(hit5) / static_cast<double>(n) : 0.0;
  report.per_class.assign(num_classes, 0.0);
  for (std::size_t c = 0; c < num_classes; ++c) {
    report.per_class[c] = class_total[c]
                              ? static_cast<double>(class_hit[c]) /
                                    static_cast<double>(class_total[c])
                              : 0.0;
  }
}

void write_csv(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path);
}

std::string fmt(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.9g", v);
  return buffer;
}

}  // namespace

nlohmann::json report_to_json(const EvalReport& report, bool include_scores) {
  nlohmann::ordered_json j;
  j["protocol"] = report.protocol;
  j["top1"] = report.top1;
  j["top5"] = report.top5;
  j["per_class"] = report.per_class;
  j["confusion"] = report.confusion;
  j["config"] = report.config_echo;
  if (include_scores) {
    j["scores"] = report.scores;
    j["labels"] = report.labels;
  }
  return j;
}

FeatureMatrix extract_features(const StgcnEncoder<float>& encoder,
                               const DatasetSplit& split,
                               EvalConfig::Features kind) {
  split.validate();
  FeatureMatrix out;
  out.rows.resize(split.size());
  out.labels.resize(split.size());
  parallel_for(split.size(), [&](std::size_t i) {
    const auto fwd = encoder.forward(split.sequences[i].values);
    out.rows[i] =
        kind == EvalConfig::Features::backbone ? fwd.pooled : fwd.embedding;
  });
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (!split.sequences[i].label.has_value()) {
      throw Error(ErrorKind::LabelMismatch,
                  "evaluation requires labeled sequences");
    }
    out.labels[i] = *split.sequences[i].label;
  }
  return out;
}

EvalReport train_linear_probe(const FeatureMatrix& train,
                              const FeatureMatrix& test,
                              const EvalConfig& cfg) {
  if (train.rows.empty()) {
    throw Error(ErrorKind::EmptyTrain, "linear probe needs training features");
  }
  const std::size_t C = num_classes_of(train, test);
  const std::size_t d = train.dim();
  const std::size_t n = train.rows.size();

  // The backbone has no normalization layers, so raw pooled features can sit
  // at arbitrary scales. Standardize per dimension on the training split;
  // the probe's learning rate then behaves the same for every feature kind.
  std::vector<double> f_mean(d, 0.0), f_std(d, 0.0);
  for (const auto& row : train.rows) {
    for (std::size_t k = 0; k < d; ++k) f_mean[k] += row[k];
  }
  for (auto& m : f_mean) m /= static_cast<double>(n);
  for (const auto& row : train.rows) {
    for (std::size_t k = 0; k < d; ++k) {
      const double c = row[k] - f_mean[k];
      f_std[k] += c * c;
    }
  }
  for (auto& s : f_std) s = std::max(std::sqrt(s / static_cast<double>(n)), 1e-6);
  auto standardized = [&](const std::vector<std::vector<float>>& rows) {
    std::vector<std::vector<double>> out(rows.size(),
                                         std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        out[i][k] = (rows[i][k] - f_mean[k]) / f_std[k];
      }
    }
    return out;
  };
  const auto train_rows = standardized(train.rows);
  const auto test_rows = standardized(test.rows);

  std::vector<double> W(C * d, 0.0), b(C, 0.0);
  std::vector<double> vW(C * d, 0.0), vb(C, 0.0);
  const int decay1 = static_cast<int>(0.6 * cfg.epochs);
  const int decay2 = static_cast<int>(0.8 * cfg.epochs);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> logits(C), probs(C);
  std::vector<double> gW(C * d), gb(C);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double lr = cfg.lr;
    if (epoch >= decay1) lr *= 0.1;
    if (epoch >= decay2) lr *= 0.1;
    Rng rng = Rng::derive({cfg.seed, stream_key(RngStream::LinearProbe),
                           static_cast<std::uint64_t>(epoch)});
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[rng.uniform_int(i)]);
    }
    const std::size_t batch = std::max<std::size_t>(
        1, std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n));
    for (std::size_t begin = 0; begin < n; begin += batch) {
      const std::size_t end = std::min(begin + batch, n);
      std::fill(gW.begin(), gW.end(), 0.0);
      std::fill(gb.begin(), gb.end(), 0.0);
      for (std::size_t s = begin; s < end; ++s) {
        const auto& x = train_rows[order[s]];
        const std::size_t y = static_cast<std::size_t>(train.labels[order[s]]);
        for (std::size_t c = 0; c < C; ++c) {
          double acc = b[c];
          const double* w = W.data() + c * d;
          for (std::size_t k = 0; k < d; ++k) acc += w[k] * x[k];
          logits[c] = acc;
        }
        const double mx = *std::max_element(logits.begin(), logits.end());
        double denom = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
          probs[c] = std::exp(logits[c] - mx);
          denom += probs[c];
        }
        for (std::size_t c = 0; c < C; ++c) {
          const double g = probs[c] / denom - (c == y ? 1.0 : 0.0);
          gb[c] += g;
          double* gw = gW.data() + c * d;
          for (std::size_t k = 0; k < d; ++k) gw[k] += g * x[k];
        }
      }
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (std::size_t j = 0; j < C * d; ++j) {
        vW[j] = cfg.momentum * vW[j] + gW[j] * inv;
        W[j] -= lr * vW[j];
      }
      for (std::size_t c = 0; c < C; ++c) {
        vb[c] = cfg.momentum * vb[c] + gb[c] * inv;
        b[c] -= lr * vb[c];
      }
    }
  }

  EvalReport report;
  report.protocol = "linear";
  report.labels = test.labels;
  report.scores.resize(test.rows.size());
  for (std::size_t i = 0; i < test.rows.size(); ++i) {
    const auto& x = test_rows[i];
    std::vector<double> s(C);
    for (std::size_t c = 0; c < C; ++c) {
      double acc = b[c];
      const double* w = W.data() + c * d;
      for (std::size_t k = 0; k < d; ++k) acc += w[k] * x[k];
      s[c] = acc;
    }
    const double mx = *std::max_element(s.begin(), s.end());
    double denom = 0.0;
    for (auto& v : s) {
      v = std::exp(v - mx);
      denom += v;
    }
    for (auto& v : s) v /= denom;
    report.scores[i] = std::move(s);
  }
  finalize_report(report, C);
  return report;
}

EvalReport linear_eval(const StgcnEncoder<float>& encoder,
                       const DatasetSplit& train, const DatasetSplit& test,
                       const EvalConfig& cfg) {
  const auto ftrain = extract_features(encoder, train, cfg.features);
  const auto ftest = extract_features(encoder, test, cfg.features);
  EvalReport report = train_linear_probe(ftrain, ftest, cfg);
  report.config_echo = {{"epochs", cfg.epochs},
                        {"lr", cfg.lr},
                        {"features",
                         cfg.features == EvalConfig::Features::backbone
                             ? "backbone"
                             : "embedding"}};
  return report;
}

EvalReport knn_eval_features(const FeatureMatrix& train,
                             const FeatureMatrix& test, const EvalConfig& cfg) {
  if (train.rows.empty()) {
    throw Error(ErrorKind::EmptyTrain, "KNN needs training features");
  }
  if (cfg.k < 1 || static_cast<std::size_t>(cfg.k) > train.rows.size()) {
    throw Error(ErrorKind::ConfigError, "k must lie in [1, |train|]");
  }
  const std::size_t C = num_classes_of(train, test);
  const std::size_t d = train.dim();
  const std::size_t k = static_cast<std::size_t>(cfg.k);

  // cosine similarity = dot of normalized rows
  auto normalized = [&](const std::vector<std::vector<float>>& rows) {
    std::vector<std::vector<float>> out = rows;
    for (auto& r : out) {
      const float norm = std::sqrt(kernels::sumsq<float>(r.data(), r.size()));
      if (norm > 0.0f) kernels::scal<float>(1.0f / norm, r.data(), r.size());
    }
    return out;
  };
  const auto ntrain = normalized(train.rows);
  const auto ntest = normalized(test.rows);

  EvalReport report;
  report.protocol = "knn";
  report.labels = test.labels;
  report.scores.resize(ntest.size());
  std::vector<int> predictions(ntest.size(), 0);

  parallel_for(ntest.size(), [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> sims(ntrain.size());
    for (std::size_t j = 0; j < ntrain.size(); ++j) {
      sims[j] = {kernels::dot<float>(ntest[i].data(), ntrain[j].data(), d), j};
    }
    std::partial_sort(sims.begin(), sims.begin() + static_cast<long>(k),
                      sims.end(), [](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first > b.first;
                        return a.second < b.second;
                      });
    std::vector<double> votes(C, 0.0), sim_sum(C, 0.0);
    for (std::size_t r = 0; r < k; ++r) {
      const std::size_t cls =
          static_cast<std::size_t>(train.labels[sims[r].second]);
      votes[cls] += cfg.weighted_vote ? std::max(0.0, sims[r].first) : 1.0;
      sim_sum[cls] += sims[r].first;
    }
    // majority vote; ties break on summed similarity, then lowest index
    std::size_t best = 0;
    for (std::size_t c = 1; c < C; ++c) {
      if (votes[c] > votes[best] ||
          (votes[c] == votes[best] && sim_sum[c] > sim_sum[best])) {
        best = c;
      }
    }
    predictions[i] = static_cast<int>(best);
    double total = 0.0;
    for (double v : votes) total += v;
    if (total > 0.0) {
      for (auto& v : votes) v /= total;
    }
    report.scores[i] = std::move(votes);
  });

  finalize_report(report, C, &predictions);
  report.config_echo = {{"k", cfg.k}, {"weighted_vote", cfg.weighted_vote}};
  return report;
}

EvalReport knn_eval(const StgcnEncoder<float>& encoder,
                    const DatasetSplit& train, const DatasetSplit& test,
                    const EvalConfig& cfg) {
  const auto ftrain = extract_features(encoder, train, cfg.features);
  const auto ftest = extract_features(encoder, test, cfg.features);
  return knn_eval_features(ftrain, ftest, cfg);
}

EvalReport ensemble_eval(const std::vector<EvalReport>& stream_reports,
                         const std::vector<double>& weights) {
  if (stream_reports.empty()) {
    throw Error(ErrorKind::MisalignedStreams, "no stream reports to fuse");
  }
  if (weights.size() != stream_reports.size()) {
    throw Error(ErrorKind::MisalignedStreams,
                "one weight per stream is required");
  }
  const auto& first = stream_reports.front();
  for (const auto& r : stream_reports) {
    if (r.labels != first.labels ||
        r.scores.size() != first.scores.size() ||
        (!r.scores.empty() &&
         r.scores.front().size() != first.scores.front().size())) {
      throw Error(ErrorKind::MisalignedStreams,
                  "stream reports cover different test sets");
    }
  }
  EvalReport out;
  out.protocol = "ensemble";
  out.labels = first.labels;
  const std::size_t n = first.scores.size();
  const std::size_t C = first.scores.empty() ? 0 : first.scores.front().size();
  out.scores.assign(n, std::vector<double>(C, 0.0));
  for (std::size_t s = 0; s < stream_reports.size(); ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < C; ++c) {
        out.scores[i][c] += weights[s] * stream_reports[s].scores[i][c];
      }
    }
  }
  finalize_report(out, C);
  out.config_echo = {{"weights", weights},
                     {"streams", stream_reports.size()}};
  return out;
}

std::vector<std::array<double, 2>> project_2d(
    const std::vector<std::vector<float>>& embeddings, std::uint64_t seed) {
  const std::size_t n = embeddings.size();
  std::vector<std::array<double, 2>> out(n, {0.0, 0.0});
  if (n == 0) return out;
  const std::size_t d = embeddings.front().size();

  std::vector<double> mean(d, 0.0);
  for (const auto& e : embeddings) {
    for (std::size_t k = 0; k < d; ++k) mean[k] += e[k];
  }
  for (auto& m : mean) m /= static_cast<double>(n);

  std::vector<double> cov(d * d, 0.0);
  std::vector<double> centered(d);
  for (const auto& e : embeddings) {
    for (std::size_t k = 0; k < d; ++k) centered[k] = e[k] - mean[k];
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a; b < d; ++b) {
        cov[a * d + b] += centered[a] * centered[b];
      }
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < a; ++b) cov[a * d + b] = cov[b * d + a];
  }

  auto power_iterate = [&](const std::vector<double>& matrix) {
    Rng rng = Rng::derive({seed, stream_key(RngStream::Scatter)});
    std::vector<double> v(d);
    for (auto& x : v) x = rng.normal();
    std::vector<double> next(d);
    for (int iter = 0; iter < 200; ++iter) {
      for (std::size_t a = 0; a < d; ++a) {
        double acc = 0.0;
        for (std::size_t b = 0; b < d; ++b) acc += matrix[a * d + b] * v[b];
        next[a] = acc;
      }
      double norm = 0.0;
      for (double x : next) norm += x * x;
      norm = std::sqrt(norm);
      if (norm == 0.0) break;
      for (std::size_t a = 0; a < d; ++a) v[a] = next[a] / norm;
    }
    return v;
  };

  const auto v1 = power_iterate(cov);
  double lambda1 = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    double acc = 0.0;
    for (std::size_t b = 0; b < d; ++b) acc += cov[a * d + b] * v1[b];
    lambda1 += v1[a] * acc;
  }
  std::vector<double> deflated = cov;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      deflated[a * d + b] -= lambda1 * v1[a] * v1[b];
    }
  }
  const auto v2 = power_iterate(deflated);

  for (std::size_t i = 0; i < n; ++i) {
    double x = 0.0, y = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double c = embeddings[i][k] - mean[k];
      x += c * v1[k];
      y += c * v2[k];
    }
    out[i] = {x, y};
  }
  return out;
}

FigureFiles export_figures(
    const EvalReport& report,
    const std::vector<std::vector<float>>& embeddings,
    const std::vector<int>& labels,
    const std::vector<std::pair<int, double>>& accuracy_curve,
    const std::string& out_dir, std::uint64_t seed) {
  fs::create_directories(out_dir);
  FigureFiles files;
  const std::size_t C = report.confusion.size();

  // confusion matrix: CSV plus a heatmap
  {
    std::string csv = "true_class";
    for (std::size_t c = 0; c < C; ++c) csv += ",pred_" + std::to_string(c);
    csv += "\n";
    int max_count = 1;
    for (const auto& row : report.confusion) {
      for (int v : row) max_count = std::max(max_count, v);
    }
    for (std::size_t r = 0; r < C; ++r) {
      csv += std::to_string(r);
      for (std::size_t c = 0; c < C; ++c) {
        csv += "," + std::to_string(report.confusion[r][c]);
      }
      csv += "\n";
    }
    const auto csv_path = (fs::path(out_dir) / "confusion.csv").string();
    write_csv(csv_path, csv);
    files.paths.push_back(csv_path);

    const long cell = 24, margin = 8;
    Canvas canvas(static_cast<std::size_t>(2 * margin + cell * static_cast<long>(C)),
                  static_cast<std::size_t>(2 * margin + cell * static_cast<long>(C)));
    for (std::size_t r = 0; r < C; ++r) {
      for (std::size_t c = 0; c < C; ++c) {
        const double frac =
            static_cast<double>(report.confusion[r][c]) / max_count;
        const auto shade = static_cast<std::uint8_t>(255.0 * (1.0 - frac));
        canvas.fill_rect(margin + cell * static_cast<long>(c),
                         margin + cell * static_cast<long>(r),
                         margin + cell * static_cast<long>(c + 1) - 2,
                         margin + cell * static_cast<long>(r + 1) - 2, shade,
                         shade, 255);
      }
    }
    const auto png_path = (fs::path(out_dir) / "confusion.png").string();
    canvas.save(png_path);
    files.paths.push_back(png_path);
  }

  // 2-d feature scatter
  if (!embeddings.empty()) {
    const auto pts = project_2d(embeddings, seed);
    std::string csv = "index,x,y,label\n";
    double min_x = pts[0][0], max_x = pts[0][0];
    double min_y = pts[0][1], max_y = pts[0][1];
    for (std::size_t i = 0; i < pts.size(); ++i) {
      csv += std::to_string(i) + "," + fmt(pts[i][0]) + "," + fmt(pts[i][1]) +
             "," + std::to_string(labels[i]) + "\n";
      min_x = std::min(min_x, pts[i][0]);
      max_x = std::max(max_x, pts[i][0]);
      min_y = std::min(min_y, pts[i][1]);
      max_y = std::max(max_y, pts[i][1]);
    }
    const auto csv_path = (fs::path(out_dir) / "scatter.csv").string();
    write_csv(csv_path, csv);
    files.paths.push_back(csv_path);

    const long size = 480, margin = 20;
    Canvas canvas(size, size);
    const double span_x = std::max(max_x - min_x, 1e-12);
    const double span_y = std::max(max_y - min_y, 1e-12);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const long px = margin + static_cast<long>(
          (pts[i][0] - min_x) / span_x * (size - 2 * margin));
      const long py = margin + static_cast<long>(
          (pts[i][1] - min_y) / span_y * (size - 2 * margin));
      std::uint8_t r, g, b;
      class_color(static_cast<std::size_t>(labels[i]), r, g, b);
      canvas.draw_dot(px, py, 2, r, g, b);
    }
    const auto png_path = (fs::path(out_dir) / "scatter.png").string();
    canvas.save(png_path);
    files.paths.push_back(png_path);
  }

  // accuracy-over-epochs curve
  if (!accuracy_curve.empty()) {
    std::string csv = "epoch,accuracy\n";
    for (const auto& [epoch, acc] : accuracy_curve) {
      csv += std::to_string(epoch) + "," + fmt(acc) + "\n";
    }
    const auto csv_path = (fs::path(out_dir) / "accuracy_curve.csv").string();
    write_csv(csv_path, csv);
    files.paths.push_back(csv_path);

    const long w = 480, h = 320, margin = 24;
    Canvas canvas(w, h);
    canvas.draw_line(margin, h - margin, w - margin, h - margin, 0, 0, 0);
    canvas.draw_line(margin, margin, margin, h - margin, 0, 0, 0);
    const int max_epoch =
        std::max(1, accuracy_curve.back().first);
    long prev_x = 0, prev_y = 0;
    for (std::size_t i = 0; i < accuracy_curve.size(); ++i) {
      const long px = margin + static_cast<long>(
          static_cast<double>(accuracy_curve[i].first) / max_epoch *
          (w - 2 * margin));
      const long py = (h - margin) - static_cast<long>(
          std::clamp(accuracy_curve[i].second, 0.0, 1.0) * (h - 2 * margin));
      canvas.draw_dot(px, py, 2, 214, 39, 40);
      if (i > 0) canvas.draw_line(prev_x, prev_y, px, py, 214, 39, 40);
      prev_x = px;
      prev_y = py;
    }
    const auto png_path = (fs::path(out_dir) / "accuracy_curve.png").string();
    canvas.save(png_path);
    files.paths.push_back(png_path);
  }

  return files;
}

}  // namespace dogclr
