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

#include "dogclr/skeleton.hpp"

namespace dogclr {

/// Loads a graph definition file:
///   {"num_joints": N, "edges": [[v,w],...], "parents": {"1":0,...},
///    "root": r}
/// "parents" and "root" are optional (bone streams and center_root need
/// them). Accepts "builtin:ntu25" and "builtin:toy<V>" in place of a path.
SkeletonGraph load_graph(const std::string& path_or_builtin);

void save_graph(const SkeletonGraph& graph, const std::string& path);

/// Kinect-v2 25-joint skeleton used by the NTU datasets, rooted at the spine
/// base.
SkeletonGraph ntu25_graph();

/// Deterministic stick figure for toy data: joint 0 is the root, the others
/// hang off four limb chains (up / left / right / down) in round-robin order.
/// Requires num_joints >= 5 so every limb exists.
SkeletonGraph toy_graph(std::size_t num_joints);

}  // namespace dogclr
