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

#include "dogclr/skelpack.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "dogclr/error.hpp"

namespace dogclr {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "SKELPACK io assumes a little-endian host");

}  // namespace

void write_skelpack(const std::string& path, const SkelpackData& data) {
  if (data.values.size() != data.N * data.C * data.T * data.V) {
    throw Error(ErrorKind::ShapeMismatch, "SKELPACK value count mismatch");
  }
  if (data.labels.size() != data.N) {
    throw Error(ErrorKind::ShapeMismatch, "SKELPACK label count mismatch");
  }
  json header;
  header["version"] = 1;
  header["C"] = data.C;
  header["T"] = data.T;
  header["V"] = data.V;
  header["N"] = data.N;
  header["dtype"] = "f32le";
  json labels = json::array();
  for (const auto& l : data.labels) {
    if (l.has_value()) {
      labels.push_back(*l);
    } else {
      labels.push_back(nullptr);
    }
  }
  header["labels"] = labels;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  const std::string line = header.dump();
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.put('\n');
  out.write(reinterpret_cast<const char*>(data.values.data()),
            static_cast<std::streamsize>(data.values.size() * sizeof(float)));
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path);
}

SkelpackData read_skelpack(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::IoError, "missing SKELPACK header in " + path);
  }
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::IoError,
                "bad SKELPACK header in " + path + ": " + e.what());
  }
  if (header.value("dtype", "") != "f32le") {
    throw Error(ErrorKind::IoError, "unsupported SKELPACK dtype in " + path);
  }
  SkelpackData data;
  data.C = header.at("C").get<std::size_t>();
  data.T = header.at("T").get<std::size_t>();
  data.V = header.at("V").get<std::size_t>();
  data.N = header.at("N").get<std::size_t>();
  data.labels.reserve(data.N);
  for (const auto& l : header.at("labels")) {
    data.labels.push_back(l.is_null() ? std::optional<int>{}
                                      : std::optional<int>{l.get<int>()});
  }
  if (data.labels.size() != data.N) {
    throw Error(ErrorKind::IoError, "SKELPACK label count mismatch in " + path);
  }
  const std::size_t count = data.N * data.C * data.T * data.V;
  data.values.resize(count);
  in.read(reinterpret_cast<char*>(data.values.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(float)) {
    throw Error(ErrorKind::IoError, "truncated SKELPACK payload in " + path);
  }
  return data;
}

SkelpackData pack_split(const DatasetSplit& split) {
  split.validate();
  SkelpackData data;
  const auto& first = split.sequences.front();
  data.C = first.channels();
  data.T = first.frames();
  data.V = first.joints();
  data.N = split.size();
  data.values.reserve(data.N * data.C * data.T * data.V);
  for (const auto& s : split.sequences) {
    data.values.insert(data.values.end(), s.values.storage().begin(),
                       s.values.storage().end());
    data.labels.push_back(s.label);
  }
  return data;
}

DatasetSplit unpack_split(const SkelpackData& data, const SkeletonGraph& graph,
                          SplitRole role, const std::string& source) {
  DatasetSplit split;
  split.role = role;
  split.graph = graph;
  const std::size_t per = data.C * data.T * data.V;
  split.sequences.reserve(data.N);
  for (std::size_t i = 0; i < data.N; ++i) {
    SkeletonSequence seq;
    seq.values = Tensor<float>({data.C, data.T, data.V});
    std::memcpy(seq.values.data(), data.values.data() + i * per,
                per * sizeof(float));
    seq.label = data.labels[i];
    seq.source = source;
    split.sequences.push_back(std::move(seq));
  }
  split.validate();
  return split;
}

void write_gsbp(const std::string& path, const Gsbp& gsbp) {
  SkelpackData data;
  data.C = gsbp.values.dim(0);
  data.T = gsbp.values.dim(1);
  data.V = gsbp.values.dim(2);
  data.N = 1;
  data.values = gsbp.values.storage();
  data.labels.push_back(std::nullopt);
  write_skelpack(path, data);
}

Gsbp read_gsbp(const std::string& path) {
  const SkelpackData data = read_skelpack(path);
  if (data.N != 1) {
    throw Error(ErrorKind::IoError, "GSBP container must hold exactly one sample");
  }
  Gsbp g;
  g.values = Tensor<float>({data.C, data.T, data.V});
  std::memcpy(g.values.data(), data.values.data(),
              data.values.size() * sizeof(float));
  return g;
}

}  // namespace dogclr
