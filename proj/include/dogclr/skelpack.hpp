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

#include "dogclr/skeleton.hpp"

namespace dogclr {

// SKELPACK container: one UTF-8 JSON header line
//   {"version":1,"C":c,"T":t,"V":v,"N":n,"dtype":"f32le","labels":[...]}
// terminated by '\n', followed by N*C*T*V little-endian float32 values in
// (sample, channel, frame, joint) order. Round-trips are bit-exact.

struct SkelpackData {
  std::size_t C = 0, T = 0, V = 0, N = 0;
  std::vector<float> values;            // N*C*T*V
  std::vector<std::optional<int>> labels;  // size N; entries may be null
};

void write_skelpack(const std::string& path, const SkelpackData& data);
SkelpackData read_skelpack(const std::string& path);

/// Packs a split's sequences (labels included) into a container.
SkelpackData pack_split(const DatasetSplit& split);

/// Unpacks into a split; the caller provides the graph.
DatasetSplit unpack_split(const SkelpackData& data, const SkeletonGraph& graph,
                          SplitRole role, const std::string& source);

void write_gsbp(const std::string& path, const Gsbp& gsbp);
Gsbp read_gsbp(const std::string& path);

}  // namespace dogclr
