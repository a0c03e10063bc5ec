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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dogclr/graphio.hpp"
#include "dogclr/ntu_parser.hpp"
#include "dogclr/skelpack.hpp"
#include "dogclr/skeleton.hpp"
#include "dogclr/toy_dataset.hpp"
#include "test_util.hpp"

using namespace dogclr;
namespace fs = std::filesystem;

namespace {

// 2 frames, 1 body, joints at (v, t, 0) with trailing per-joint fields that
// the parser must ignore.
std::string well_formed_fixture() {
  std::ostringstream out;
  out << "2\n";
  for (int t = 0; t < 2; ++t) {
    out << "1\n";
    out << "72057594037931101 0 1 1 1 1 0.1 0.2 -0.3 2\n";
    out << "25\n";
    for (int v = 0; v < 25; ++v) {
      out << v << " " << t << " 0 0.0 0.0 0.0 0.0 1 2 0 0 2\n";
    }
  }
  return out.str();
}

std::string two_body_fixture() {
  std::ostringstream out;
  out << "3\n";
  for (int t = 0; t < 3; ++t) {
    out << "2\n";
    out << "1001 0 1 1 1 1 0 0 0 2\n";
    out << "25\n";
    for (int v = 0; v < 25; ++v) out << "0 0 0\n";  // body 0: static
    out << "1002 0 1 1 1 1 0 0 0 2\n";
    out << "25\n";
    for (int v = 0; v < 25; ++v) out << t << " 0 0\n";  // body 1: drifts in x
  }
  return out.str();
}

SkeletonSequence make_seq(std::size_t C, std::size_t T, std::size_t V,
                          std::uint64_t seed) {
  SkeletonSequence s;
  s.values = testutil::random_tensor<float>({C, T, V}, seed, -2.0, 2.0);
  return s;
}

SkeletonGraph chain2() {
  return SkeletonGraph::from_edges(2, {{0, 1}}, {-1, 0}, 0);
}

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / "dogclr_test_skel";
  fs::create_directories(dir);
  return dir;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("ntu parser: well-formed two-frame fixture, identity resample") {
  const auto seq = parse_ntu_skeleton(well_formed_fixture(), 2);
  REQUIRE(seq.channels() == 3);
  REQUIRE(seq.frames() == 2);
  REQUIRE(seq.joints() == 25);
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t v = 0; v < 25; ++v) {
      CHECK(seq.values(0, t, v) == static_cast<float>(v));
      CHECK(seq.values(1, t, v) == static_cast<float>(t));
      CHECK(seq.values(2, t, v) == 0.0f);
    }
  }
}

TEST_CASE("ntu parser: error fixtures") {
  CHECK_THROWS_WITH_AS(parse_ntu_skeleton("", 8), doctest::Contains("empty"),
                       Error);
  try {
    parse_ntu_skeleton("  \n \n", 8);
    FAIL("expected EmptyFile");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyFile);
  }
  try {
    parse_ntu_skeleton("0\n", 8);
    FAIL("expected NoFrames");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoFrames);
  }
  try {
    parse_ntu_skeleton("abc\n", 8);
    FAIL("expected MalformedHeader");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MalformedHeader);
  }
  // joint-count line of 24
  std::string bad = "1\n1\nmeta 0 0\n24\n";
  for (int v = 0; v < 24; ++v) bad += "0 0 0\n";
  try {
    parse_ntu_skeleton(bad, 8);
    FAIL("expected JointCountMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::JointCountMismatch);
  }
  // declared 2 frames but only 1 present
  std::string truncated = "2\n1\nmeta\n25\n";
  for (int v = 0; v < 25; ++v) truncated += "0 0 0\n";
  try {
    parse_ntu_skeleton(truncated, 8);
    FAIL("expected MalformedHeader");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MalformedHeader);
  }
}

TEST_CASE("ntu parser: primary body selection by displacement") {
  const auto moving = parse_ntu_skeleton(two_body_fixture(), 3, true);
  CHECK(moving.values(0, 2, 0) == 2.0f);  // body 1's x = frame index
  const auto first = parse_ntu_skeleton(two_body_fixture(), 3, false);
  CHECK(first.values(0, 2, 0) == 0.0f);  // body 0 static
}

TEST_CASE("ntu parser: linear interpolation to a longer timeline") {
  std::ostringstream out;
  out << "4\n";
  for (int t = 0; t < 4; ++t) {
    out << "1\nmeta\n25\n";
    for (int v = 0; v < 25; ++v) out << t << " 0 0\n";
  }
  const auto seq = parse_ntu_skeleton(out.str(), 7);
  REQUIRE(seq.frames() == 7);
  for (std::size_t t = 0; t < 7; ++t) {
    const double expect = static_cast<double>(t) * 3.0 / 6.0;
    CHECK(seq.values(0, t, 3) == doctest::Approx(expect).epsilon(1e-7));
  }
}

TEST_CASE("gsbp: mean of identical sequences is the sequence") {
  DatasetSplit split;
  split.graph = toy_graph(5);
  auto base = make_seq(3, 4, 5, 42);
  for (int i = 0; i < 4; ++i) split.sequences.push_back(base);
  const auto g = compute_gsbp(split);
  CHECK(g.values == base.values);
}

TEST_CASE("gsbp: symmetric pair averages to zero") {
  DatasetSplit split;
  split.graph = toy_graph(5);
  auto a = make_seq(3, 4, 5, 7);
  auto b = a;
  for (std::size_t i = 0; i < b.values.size(); ++i) b.values[i] = -b.values[i];
  split.sequences = {a, b};
  const auto g = compute_gsbp(split);
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    CHECK(g.values[i] == 0.0f);
  }
}

TEST_CASE("gsbp: matches an independent scalar-loop mean") {
  DatasetSplit split;
  split.graph = toy_graph(6);
  for (std::uint64_t s = 0; s < 3; ++s) {
    split.sequences.push_back(make_seq(3, 5, 6, 100 + s));
  }
  const auto g = compute_gsbp(split);
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    double acc = 0.0;
    for (const auto& s : split.sequences) acc += s.values[i];
    CHECK(g.values[i] == static_cast<float>(acc / 3.0));
  }
}

TEST_CASE("gsbp: permutation invariant over sequence order") {
  DatasetSplit a;
  a.graph = toy_graph(5);
  for (std::uint64_t s = 0; s < 6; ++s) {
    a.sequences.push_back(make_seq(3, 4, 5, 200 + s));
  }
  DatasetSplit b = a;
  std::swap(b.sequences[0], b.sequences[5]);
  std::swap(b.sequences[2], b.sequences[3]);
  CHECK(compute_gsbp(a).values == compute_gsbp(b).values);
}

TEST_CASE("gsbp: empty split") {
  DatasetSplit split;
  CHECK_THROWS_AS((void)compute_gsbp(split), Error);
}

TEST_CASE("streams: joint is the identity, constant sequence has zero motion") {
  const auto graph = chain2();
  SkeletonSequence seq;
  seq.values = Tensor<float>({3, 4, 2}, 1.5f);
  CHECK(derive_stream(seq, StreamKind::joint, graph).values == seq.values);
  const auto motion = derive_stream(seq, StreamKind::motion, graph);
  for (std::size_t i = 0; i < motion.values.size(); ++i) {
    CHECK(motion.values[i] == 0.0f);
  }
}

TEST_CASE("streams: bone difference on a two-joint chain") {
  const auto graph = chain2();
  SkeletonSequence seq;
  seq.values = Tensor<float>({3, 3, 2});
  for (std::size_t t = 0; t < 3; ++t) {
    seq.values(0, t, 0) = static_cast<float>(t);      // parent x
    seq.values(0, t, 1) = static_cast<float>(t) + 1;  // child at parent+(1,0,0)
    seq.values(1, t, 0) = 2.0f;
    seq.values(1, t, 1) = 2.0f;
  }
  const auto bone = derive_stream(seq, StreamKind::bone, graph);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(bone.values(0, t, 1) == 1.0f);
    CHECK(bone.values(1, t, 1) == 0.0f);
    CHECK(bone.values(0, t, 0) == 0.0f);  // root bone
    CHECK(bone.values(2, t, 1) == 0.0f);
  }
}

TEST_CASE("streams: bone without a parent map") {
  SkeletonGraph graph = SkeletonGraph::from_edges(2, {{0, 1}});
  SkeletonSequence seq;
  seq.values = Tensor<float>({3, 3, 2}, 0.25f);
  try {
    (void)derive_stream(seq, StreamKind::bone, graph);
    FAIL("expected MissingParentMap");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingParentMap);
  }
}

TEST_CASE("streams: motion of a reversed sequence is the negated reverse") {
  const auto graph = chain2();
  auto seq = make_seq(3, 6, 2, 77);
  auto reversed = seq;
  const std::size_t T = 6;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t v = 0; v < 2; ++v) {
        reversed.values(c, t, v) = seq.values(c, T - 1 - t, v);
      }
    }
  }
  const auto m = derive_stream(seq, StreamKind::motion, graph);
  const auto mr = derive_stream(reversed, StreamKind::motion, graph);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t t = 0; t + 1 < T; ++t) {
      for (std::size_t v = 0; v < 2; ++v) {
        CHECK(mr.values(c, t, v) == -m.values(c, T - 2 - t, v));
      }
    }
  }
}

TEST_CASE("normalize: identity and center_root") {
  const auto graph = toy_graph(5);
  auto seq = make_seq(3, 4, 5, 31);
  CHECK(normalize(seq, NormalizeMode::none, graph).values == seq.values);
  const auto centered = normalize(seq, NormalizeMode::center_root, graph);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t t = 0; t < 4; ++t) {
      CHECK(centered.values(c, t, 0) == 0.0f);
    }
  }
}

TEST_CASE("normalize: translation invariance on integer-valued poses") {
  const auto graph = toy_graph(5);
  SkeletonSequence seq;
  seq.values = Tensor<float>({3, 3, 5});
  Rng rng(55);
  for (std::size_t i = 0; i < seq.values.size(); ++i) {
    seq.values[i] = static_cast<float>(rng.uniform_int(11));
  }
  auto shifted = seq;
  float* x = shifted.values.block(0);
  for (std::size_t i = 0; i < shifted.values.block_size(); ++i) x[i] += 5.0f;
  CHECK(normalize(seq, NormalizeMode::center_root, graph).values ==
        normalize(shifted, NormalizeMode::center_root, graph).values);
}

TEST_CASE("toy dataset: determinism, counts, still template") {
  ToySpec spec;
  spec.classes = {"wave", "kick"};
  spec.per_class = 10;
  spec.per_class_test = 4;
  spec.T = 16;
  spec.V = 9;
  spec.noise_sigma = 0.02;

  const auto d1 = generate_toy_dataset(spec, 7);
  const auto d2 = generate_toy_dataset(spec, 7);
  CHECK(d1.train.size() == 20);
  CHECK(d1.test.size() == 8);
  int label0 = 0;
  for (const auto& s : d1.train.sequences) label0 += (*s.label == 0) ? 1 : 0;
  CHECK(label0 == 10);

  // bit-identical serialization for one seed
  const auto dir = temp_dir();
  write_skelpack((dir / "a.skp").string(), pack_split(d1.train));
  write_skelpack((dir / "b.skp").string(), pack_split(d2.train));
  CHECK(file_bytes(dir / "a.skp") == file_bytes(dir / "b.skp"));

  const auto d3 = generate_toy_dataset(spec, 8);
  write_skelpack((dir / "c.skp").string(), pack_split(d3.train));
  CHECK(file_bytes(dir / "a.skp") != file_bytes(dir / "c.skp"));

  // zero-noise still template: every frame equals the rest pose
  ToySpec still = spec;
  still.classes = {"still"};
  still.noise_sigma = 0.0;
  const auto ds = generate_toy_dataset(still, 3);
  const auto& s0 = ds.train.sequences.front();
  for (std::size_t t = 1; t < s0.frames(); ++t) {
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t v = 0; v < s0.joints(); ++v) {
        CHECK(s0.values(c, t, v) == s0.values(c, 0, v));
      }
    }
  }
}

TEST_CASE("toy dataset: error paths") {
  ToySpec spec;
  spec.classes = {"backflip"};
  spec.per_class = 2;
  try {
    (void)generate_toy_dataset(spec, 1);
    FAIL("expected UnknownTemplate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownTemplate);
  }
  spec.classes = {"wave"};
  spec.per_class = 0;
  CHECK_THROWS_AS((void)generate_toy_dataset(spec, 1), Error);
}

TEST_CASE("skelpack: bit-exact round trip") {
  SkelpackData data;
  data.C = 3;
  data.T = 4;
  data.V = 5;
  data.N = 2;
  Rng rng(91);
  data.values.resize(data.N * data.C * data.T * data.V);
  for (auto& v : data.values) v = static_cast<float>(rng.normal(0.0, 10.0));
  data.values[0] = 0.0f;
  data.values[1] = -0.0f;
  data.values[2] = 1e-38f;
  data.values[3] = 3.25e38f;
  data.labels = {std::optional<int>{3}, std::nullopt};

  const auto dir = temp_dir();
  const auto path = (dir / "roundtrip.skp").string();
  write_skelpack(path, data);
  const auto back = read_skelpack(path);
  CHECK(back.C == data.C);
  CHECK(back.N == data.N);
  REQUIRE(back.values.size() == data.values.size());
  CHECK(std::memcmp(back.values.data(), data.values.data(),
                    data.values.size() * sizeof(float)) == 0);
  REQUIRE(back.labels.size() == 2);
  CHECK(back.labels[0] == std::optional<int>{3});
  CHECK_FALSE(back.labels[1].has_value());
}

TEST_CASE("skelpack: truncated payload is rejected") {
  const auto dir = temp_dir();
  const auto path = (dir / "trunc.skp").string();
  {
    std::ofstream out(path, std::ios::binary);
    out << R"({"version":1,"C":3,"T":2,"V":2,"N":1,"dtype":"f32le","labels":[null]})"
        << "\n";
    const float partial[3] = {1.0f, 2.0f, 3.0f};
    out.write(reinterpret_cast<const char*>(partial), sizeof(partial));
  }
  CHECK_THROWS_AS((void)read_skelpack(path), Error);
}

TEST_CASE("graphio: builtin graphs and file round trip") {
  const auto ntu = ntu25_graph();
  CHECK(ntu.num_joints == 25);
  CHECK(ntu.edges.size() == 24);
  CHECK(ntu.root == 0);
  int missing_parent = 0;
  for (int p : ntu.parents) missing_parent += (p < 0) ? 1 : 0;
  CHECK(missing_parent == 1);

  const auto toy = toy_graph(9);
  CHECK(toy.num_joints == 9);
  CHECK(toy.edges.size() == 8);

  const auto dir = temp_dir();
  const auto path = (dir / "graph.json").string();
  save_graph(toy, path);
  const auto back = load_graph(path);
  CHECK(back.num_joints == toy.num_joints);
  CHECK(back.edges == toy.edges);
  CHECK(back.parents == toy.parents);
  CHECK(back.root == toy.root);

  CHECK(load_graph("builtin:ntu25").num_joints == 25);
  CHECK(load_graph("builtin:toy7").num_joints == 7);
  CHECK_THROWS_AS((void)load_graph("builtin:nope"), Error);
}
