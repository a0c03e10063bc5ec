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

#include "dogclr/skeleton.hpp"

#include <cmath>
#include <cstring>

#include "dogclr/error.hpp"

namespace dogclr {

SkeletonGraph SkeletonGraph::from_edges(std::size_t num_joints,
                                        std::vector<std::pair<int, int>> edges,
                                        std::vector<int> parents, int root) {
  SkeletonGraph g;
  g.num_joints = num_joints;
  g.adjacency.assign(num_joints * num_joints, 0);
  for (auto& [v, w] : edges) {
    if (v < 0 || w < 0 || static_cast<std::size_t>(v) >= num_joints ||
        static_cast<std::size_t>(w) >= num_joints) {
      throw Error(ErrorKind::IndexOutOfRange, "edge endpoint out of range");
    }
    if (v == w) {
      throw Error(ErrorKind::ConfigError, "self-loop edge not allowed");
    }
    if (v > w) std::swap(v, w);
    g.adjacency[static_cast<std::size_t>(v) * num_joints + w] = 1;
    g.adjacency[static_cast<std::size_t>(w) * num_joints + v] = 1;
  }
  // Canonical unique edge list.
  for (std::size_t v = 0; v < num_joints; ++v) {
    for (std::size_t w = v + 1; w < num_joints; ++w) {
      if (g.adjacency[v * num_joints + w]) {
        g.edges.emplace_back(static_cast<int>(v), static_cast<int>(w));
      }
    }
  }
  if (!parents.empty() && parents.size() != num_joints) {
    throw Error(ErrorKind::ConfigError, "parent map size must equal num_joints");
  }
  g.parents = std::move(parents);
  g.root = root;
  return g;
}

void DatasetSplit::validate() const {
  if (sequences.empty()) {
    throw Error(ErrorKind::EmptySplit, "dataset split has no sequences");
  }
  const auto& shape = sequences.front().values.shape();
  if (shape.size() != 3) {
    throw Error(ErrorKind::ShapeMismatch, "sequence values must be rank 3");
  }
  if (shape[1] < 2 || shape[2] < 2) {
    throw Error(ErrorKind::ShapeMismatch, "need T >= 2 and V >= 2");
  }
  if (shape[2] != graph.num_joints) {
    throw Error(ErrorKind::ShapeMismatch,
                "sequence joint count does not match graph");
  }
  for (const auto& s : sequences) {
    if (s.values.shape() != shape) {
      throw Error(ErrorKind::ShapeMismatch,
                  "all sequences in a split must share (C,T,V)");
    }
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (!std::isfinite(s.values[i])) {
        throw Error(ErrorKind::ShapeMismatch,
                    "sequence contains NaN/Inf values");
      }
    }
  }
}

const char* stream_name(StreamKind s) {
  switch (s) {
    case StreamKind::joint: return "joint";
    case StreamKind::motion: return "motion";
    case StreamKind::bone: return "bone";
  }
  return "joint";
}

StreamKind stream_from_name(const std::string& name) {
  if (name == "joint") return StreamKind::joint;
  if (name == "motion") return StreamKind::motion;
  if (name == "bone") return StreamKind::bone;
  throw Error(ErrorKind::ConfigError, "unknown stream '" + name + "'");
}

Gsbp compute_gsbp(const DatasetSplit& split) {
  if (split.sequences.empty()) {
    throw Error(ErrorKind::EmptySplit, "cannot compute GSBP of an empty split");
  }
  const auto& shape = split.sequences.front().values.shape();
  std::vector<double> acc(split.sequences.front().values.size(), 0.0);
  for (const auto& s : split.sequences) {
    if (s.values.shape() != shape) {
      throw Error(ErrorKind::ShapeMismatch, "GSBP requires uniform shapes");
    }
    const float* p = s.values.data();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p[i];
  }
  const double inv_n = 1.0 / static_cast<double>(split.sequences.size());
  Gsbp out;
  out.values = Tensor<float>(shape);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    out.values[i] = static_cast<float>(acc[i] * inv_n);
  }
  return out;
}

SkeletonSequence derive_stream(const SkeletonSequence& seq, StreamKind stream,
                               const SkeletonGraph& graph) {
  const std::size_t C = seq.channels(), T = seq.frames(), V = seq.joints();
  SkeletonSequence out = seq;
  switch (stream) {
    case StreamKind::joint:
      return out;
    case StreamKind::motion: {
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t t = 0; t + 1 < T; ++t) {
          const float* cur = seq.values.slice(c, t);
          const float* nxt = seq.values.slice(c, t + 1);
          float* dst = out.values.slice(c, t);
          for (std::size_t v = 0; v < V; ++v) dst[v] = nxt[v] - cur[v];
        }
        float* last = out.values.slice(c, T - 1);
        std::memset(last, 0, V * sizeof(float));
      }
      return out;
    }
    case StreamKind::bone: {
      if (!graph.has_parent_map()) {
        throw Error(ErrorKind::MissingParentMap,
                    "bone stream requires a graph parent map");
      }
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t t = 0; t < T; ++t) {
          const float* src = seq.values.slice(c, t);
          float* dst = out.values.slice(c, t);
          for (std::size_t v = 0; v < V; ++v) {
            const int parent = graph.parents[v];
            dst[v] = parent < 0 ? 0.0f
                                : src[v] - src[static_cast<std::size_t>(parent)];
          }
        }
      }
      return out;
    }
  }
  return out;
}

DatasetSplit derive_stream(const DatasetSplit& split, StreamKind stream) {
  DatasetSplit out;
  out.role = split.role;
  out.graph = split.graph;
  out.sequences.reserve(split.sequences.size());
  for (const auto& s : split.sequences) {
    out.sequences.push_back(derive_stream(s, stream, split.graph));
  }
  return out;
}

SkeletonSequence normalize(const SkeletonSequence& seq, NormalizeMode mode,
                           const SkeletonGraph& graph) {
  if (mode == NormalizeMode::none) return seq;
  if (graph.root < 0) {
    throw Error(ErrorKind::ConfigError,
                "center_root normalization requires a declared root joint");
  }
  const std::size_t C = seq.channels(), T = seq.frames(), V = seq.joints();
  const std::size_t root = static_cast<std::size_t>(graph.root);
  SkeletonSequence out = seq;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t t = 0; t < T; ++t) {
      float* dst = out.values.slice(c, t);
      const float r = dst[root];
      for (std::size_t v = 0; v < V; ++v) dst[v] -= r;
    }
  }
  return out;
}

DatasetSplit normalize(const DatasetSplit& split, NormalizeMode mode) {
  if (mode == NormalizeMode::none) return split;
  DatasetSplit out;
  out.role = split.role;
  out.graph = split.graph;
  out.sequences.reserve(split.sequences.size());
  for (const auto& s : split.sequences) {
    out.sequences.push_back(normalize(s, mode, split.graph));
  }
  return out;
}

}  // namespace dogclr
