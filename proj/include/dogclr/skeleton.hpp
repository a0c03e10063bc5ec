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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dogclr/tensor.hpp"

namespace dogclr {

/// One skeleton sample: [C, T, V] joint coordinates plus metadata.
/// Immutable after construction by convention; every transform returns a new
/// sequence.
struct SkeletonSequence {
  Tensor<float> values;  // [C, T, V]
  std::optional<int> label;
  std::optional<int> subject_id;
  std::optional<int> view_id;
  std::string source;

  std::size_t channels() const { return values.dim(0); }
  std::size_t frames() const { return values.dim(1); }
  std::size_t joints() const { return values.dim(2); }
};

/// Undirected skeleton topology. adjacency is V x V, binary, symmetric, zero
/// diagonal. parents[v] is the bone parent (-1 for the root or when no parent
/// map was declared).
struct SkeletonGraph {
  std::size_t num_joints = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::uint8_t> adjacency;
  std::vector<int> parents;
  int root = -1;

  static SkeletonGraph from_edges(std::size_t num_joints,
                                  std::vector<std::pair<int, int>> edges,
                                  std::vector<int> parents = {},
                                  int root = -1);

  bool has_edge(std::size_t v, std::size_t w) const {
    return adjacency[v * num_joints + w] != 0;
  }
  bool has_parent_map() const { return !parents.empty(); }
};

enum class SplitRole { train, test };

struct DatasetSplit {
  std::vector<SkeletonSequence> sequences;
  SplitRole role = SplitRole::train;
  SkeletonGraph graph;

  std::size_t size() const { return sequences.size(); }
  /// Throws on spec violations: empty split, non-uniform shapes, sequences
  /// not matching the graph's joint count, NaN/Inf values, T or V below 2.
  void validate() const;
};

/// Global Statistical Benchmark Pose: the elementwise mean sequence of a
/// split. Same shape as every member sequence.
struct Gsbp {
  Tensor<float> values;  // [C, T, V]
};

enum class StreamKind { joint, motion, bone };
enum class NormalizeMode { center_root, none };

const char* stream_name(StreamKind s);
StreamKind stream_from_name(const std::string& name);

/// Elementwise mean over the split (accumulated in double, so the result is
/// independent of sequence order).
Gsbp compute_gsbp(const DatasetSplit& split);

/// joint: identity copy. motion: forward frame difference, last frame zero.
/// bone: joint minus parent joint, root bone zero (requires a parent map).
SkeletonSequence derive_stream(const SkeletonSequence& seq, StreamKind stream,
                               const SkeletonGraph& graph);

DatasetSplit derive_stream(const DatasetSplit& split, StreamKind stream);

/// center_root subtracts the root joint's coordinates from every joint, per
/// frame and channel. none is the identity.
SkeletonSequence normalize(const SkeletonSequence& seq, NormalizeMode mode,
                           const SkeletonGraph& graph);

DatasetSplit normalize(const DatasetSplit& split, NormalizeMode mode);

}  // namespace dogclr
