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

#include "dogclr/error.hpp"
#include "dogclr/skeleton.hpp"

namespace dogclr {

/// Joint-Degree weights: node degree scaled by V / sum(deg). Nonnegative,
/// mean exactly 1 in exact arithmetic. Skeleton topology is static across
/// frames, so one vector serves every frame.
struct JointDegreeWeights {
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  double operator[](std::size_t v) const { return weights[v]; }
};

inline int node_degree(const SkeletonGraph& graph, std::size_t v) {
  if (v >= graph.num_joints) {
    throw Error(ErrorKind::IndexOutOfRange,
                "joint index " + std::to_string(v) + " out of range");
  }
  int deg = 0;
  for (std::size_t w = 0; w < graph.num_joints; ++w) {
    if (w != v) deg += graph.adjacency[v * graph.num_joints + w];
  }
  return deg;
}

inline JointDegreeWeights joint_degree_weights(const SkeletonGraph& graph) {
  const std::size_t V = graph.num_joints;
  std::vector<int> degrees(V);
  long total = 0;
  for (std::size_t v = 0; v < V; ++v) {
    degrees[v] = node_degree(graph, v);
    total += degrees[v];
  }
  if (total == 0) {
    throw Error(ErrorKind::DegenerateGraph, "graph has no edges");
  }
  JointDegreeWeights out;
  out.weights.resize(V);
  bool isolated = false;
  for (std::size_t v = 0; v < V; ++v) {
    out.weights[v] = static_cast<double>(V) * static_cast<double>(degrees[v]) /
                     static_cast<double>(total);
    isolated |= degrees[v] == 0;
  }
  if (isolated) {
    warn("graph has isolated joints; their JD weight is 0");
  }
  return out;
}

}  // namespace dogclr
