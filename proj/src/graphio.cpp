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

#include "dogclr/graphio.hpp"

#include <fstream>

#include <json.hpp>

#include "dogclr/error.hpp"

namespace dogclr {

namespace {
using nlohmann::json;
}

SkeletonGraph load_graph(const std::string& path_or_builtin) {
  if (path_or_builtin.rfind("builtin:", 0) == 0) {
    const std::string name = path_or_builtin.substr(8);
    if (name == "ntu25") return ntu25_graph();
    if (name.rfind("toy", 0) == 0) {
      const std::string digits = name.substr(3);
      try {
        return toy_graph(static_cast<std::size_t>(std::stoul(digits)));
      } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigError,
                    "bad builtin graph '" + path_or_builtin + "'");
      }
    }
    throw Error(ErrorKind::ConfigError,
                "unknown builtin graph '" + path_or_builtin + "'");
  }

  std::ifstream in(path_or_builtin);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot open graph file " + path_or_builtin);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError,
                std::string("graph file is not valid JSON: ") + e.what());
  }
  if (!j.contains("num_joints") || !j.contains("edges")) {
    throw Error(ErrorKind::ConfigError,
                "graph file needs 'num_joints' and 'edges'");
  }
  const std::size_t V = j.at("num_joints").get<std::size_t>();
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) {
      throw Error(ErrorKind::ConfigError, "graph edge must be a pair");
    }
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  std::vector<int> parents;
  if (j.contains("parents") && !j.at("parents").is_null()) {
    parents.assign(V, -1);
    for (const auto& [key, value] : j.at("parents").items()) {
      const std::size_t child = std::stoul(key);
      if (child >= V) {
        throw Error(ErrorKind::ConfigError, "parent map child out of range");
      }
      parents[child] = value.get<int>();
    }
  }
  const int root = j.contains("root") && !j.at("root").is_null()
                       ? j.at("root").get<int>()
                       : -1;
  return SkeletonGraph::from_edges(V, std::move(edges), std::move(parents), root);
}

void save_graph(const SkeletonGraph& graph, const std::string& path) {
  json j;
  j["num_joints"] = graph.num_joints;
  json edges = json::array();
  for (const auto& [v, w] : graph.edges) edges.push_back({v, w});
  j["edges"] = edges;
  if (graph.has_parent_map()) {
    json parents = json::object();
    for (std::size_t v = 0; v < graph.num_joints; ++v) {
      if (graph.parents[v] >= 0) parents[std::to_string(v)] = graph.parents[v];
    }
    j["parents"] = parents;
  }
  if (graph.root >= 0) j["root"] = graph.root;
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write graph file " + path);
  out << j.dump(2) << "\n";
}

SkeletonGraph ntu25_graph() {
  // Kinect v2 joint order, 0-indexed. Edges oriented child->parent toward the
  // spine base (joint 0).
  static const std::vector<std::pair<int, int>> kEdges = {
      {0, 1},   {1, 20},  {2, 20},  {3, 2},   {4, 20},  {5, 4},
      {6, 5},   {7, 6},   {8, 20},  {9, 8},   {10, 9},  {11, 10},
      {12, 0},  {13, 12}, {14, 13}, {15, 14}, {16, 0},  {17, 16},
      {18, 17}, {19, 18}, {21, 7},  {22, 7},  {23, 11}, {24, 11}};
  std::vector<int> parents(25, -1);
  parents[1] = 0;
  parents[20] = 1;
  parents[2] = 20;
  parents[3] = 2;
  parents[4] = 20;
  parents[5] = 4;
  parents[6] = 5;
  parents[7] = 6;
  parents[8] = 20;
  parents[9] = 8;
  parents[10] = 9;
  parents[11] = 10;
  parents[12] = 0;
  parents[13] = 12;
  parents[14] = 13;
  parents[15] = 14;
  parents[16] = 0;
  parents[17] = 16;
  parents[18] = 17;
  parents[19] = 18;
  parents[21] = 7;
  parents[22] = 7;
  parents[23] = 11;
  parents[24] = 11;
  return SkeletonGraph::from_edges(25, kEdges, parents, /*root=*/0);
}

SkeletonGraph toy_graph(std::size_t num_joints) {
  if (num_joints < 5) {
    throw Error(ErrorKind::ConfigError, "toy graph needs at least 5 joints");
  }
  std::vector<std::pair<int, int>> edges;
  std::vector<int> parents(num_joints, -1);
  for (std::size_t v = 1; v < num_joints; ++v) {
    const std::size_t depth = (v - 1) / 4 + 1;
    const int parent = depth == 1 ? 0 : static_cast<int>(v - 4);
    edges.emplace_back(static_cast<int>(v), parent);
    parents[v] = parent;
  }
  return SkeletonGraph::from_edges(num_joints, std::move(edges),
                                   std::move(parents), /*root=*/0);
}

}  // namespace dogclr
