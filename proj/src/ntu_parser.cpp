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

#include "dogclr/ntu_parser.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <string_view>
#include <vector>

#include "dogclr/error.hpp"

namespace dogclr {

namespace {

constexpr std::size_t kNtuJoints = 25;

struct LineReader {
  std::string_view text;
  std::size_t pos = 0;

  // Returns the next non-empty line, or nullopt at end of input.
  std::optional<std::string_view> next() {
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
        line.remove_suffix(1);
      }
      while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) {
        line.remove_prefix(1);
      }
      if (!line.empty()) return line;
    }
    return std::nullopt;
  }
};

long parse_count(std::string_view line, const char* what) {
  long value = 0;
  const char* begin = line.data();
  const char* end = line.data() + line.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || value < 0) {
    throw Error(ErrorKind::MalformedHeader,
                std::string(what) + " is not a non-negative integer: '" +
                    std::string(line) + "'");
  }
  return value;
}

// First three whitespace-separated fields of a joint line.
std::array<float, 3> parse_joint_line(std::string_view line) {
  std::array<float, 3> xyz{};
  std::istringstream ss{std::string(line)};
  for (int i = 0; i < 3; ++i) {
    double v;
    if (!(ss >> v) || !std::isfinite(v)) {
      throw Error(ErrorKind::MalformedHeader,
                  "joint line has fewer than three finite coordinates: '" +
                      std::string(line) + "'");
    }
    xyz[static_cast<std::size_t>(i)] = static_cast<float>(v);
  }
  return xyz;
}

}  // namespace

SkeletonSequence parse_ntu_skeleton(const std::string& text,
                                    std::size_t target_T,
                                    bool primary_body_only) {
  // Treat whitespace-only input as empty too.
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorKind::EmptyFile, "NTU skeleton text is empty");
  }
  if (target_T == 0) {
    throw Error(ErrorKind::ConfigError, "target_T must be positive");
  }

  LineReader reader{text};
  const auto frame_line = reader.next();
  if (!frame_line) throw Error(ErrorKind::EmptyFile, "no content lines");
  const long frame_count = parse_count(*frame_line, "frame count");
  if (frame_count == 0) throw Error(ErrorKind::NoFrames, "file declares 0 frames");

  const std::size_t F = static_cast<std::size_t>(frame_count);
  // bodies[b] is a [F][25][3] track; slots for absent bodies stay zero.
  std::vector<std::vector<std::array<float, 3>>> bodies;
  std::vector<std::vector<bool>> present;

  auto body_track = [&](std::size_t b) -> std::vector<std::array<float, 3>>& {
    while (bodies.size() <= b) {
      bodies.emplace_back(F * kNtuJoints, std::array<float, 3>{});
      present.emplace_back(F, false);
    }
    return bodies[b];
  };

  for (std::size_t f = 0; f < F; ++f) {
    const auto body_line = reader.next();
    if (!body_line) {
      throw Error(ErrorKind::MalformedHeader,
                  "file truncated: missing body count for frame " +
                      std::to_string(f));
    }
    const long body_count = parse_count(*body_line, "body count");
    for (long b = 0; b < body_count; ++b) {
      const auto meta = reader.next();  // body metadata, ignored
      if (!meta) {
        throw Error(ErrorKind::MalformedHeader, "file truncated in body metadata");
      }
      const auto joint_line = reader.next();
      if (!joint_line) {
        throw Error(ErrorKind::MalformedHeader, "file truncated at joint count");
      }
      const long joint_count = parse_count(*joint_line, "joint count");
      if (joint_count != static_cast<long>(kNtuJoints)) {
        throw Error(ErrorKind::JointCountMismatch,
                    "expected 25 joints, got " + std::to_string(joint_count));
      }
      auto& track = body_track(static_cast<std::size_t>(b));
      present[static_cast<std::size_t>(b)][f] = true;
      for (std::size_t v = 0; v < kNtuJoints; ++v) {
        const auto line = reader.next();
        if (!line) {
          throw Error(ErrorKind::MalformedHeader, "file truncated in joint list");
        }
        track[f * kNtuJoints + v] = parse_joint_line(*line);
      }
    }
  }

  if (bodies.empty()) {
    throw Error(ErrorKind::NoFrames, "no bodies present in any frame");
  }

  std::size_t chosen = 0;
  if (primary_body_only && bodies.size() > 1) {
    double best = -1.0;
    for (std::size_t b = 0; b < bodies.size(); ++b) {
      double disp = 0.0;
      for (std::size_t f = 0; f + 1 < F; ++f) {
        if (!present[b][f] || !present[b][f + 1]) continue;
        for (std::size_t v = 0; v < kNtuJoints; ++v) {
          const auto& a = bodies[b][f * kNtuJoints + v];
          const auto& c = bodies[b][(f + 1) * kNtuJoints + v];
          const double dx = c[0] - a[0], dy = c[1] - a[1], dz = c[2] - a[2];
          disp += std::sqrt(dx * dx + dy * dy + dz * dz);
        }
      }
      if (disp > best) {
        best = disp;
        chosen = b;
      }
    }
  }
  const auto& track = bodies[chosen];

  SkeletonSequence seq;
  seq.values = Tensor<float>({3, target_T, kNtuJoints});
  seq.source = "ntu";
  if (target_T == F) {
    // No interpolation: raw values copied exactly.
    for (std::size_t f = 0; f < F; ++f) {
      for (std::size_t v = 0; v < kNtuJoints; ++v) {
        const auto& p = track[f * kNtuJoints + v];
        for (std::size_t c = 0; c < 3; ++c) seq.values(c, f, v) = p[c];
      }
    }
    return seq;
  }

  for (std::size_t t = 0; t < target_T; ++t) {
    const double s = target_T == 1
                         ? 0.0
                         : static_cast<double>(t) * static_cast<double>(F - 1) /
                               static_cast<double>(target_T - 1);
    const std::size_t lo = static_cast<std::size_t>(s);
    const std::size_t hi = lo + 1 < F ? lo + 1 : lo;
    const double w = s - static_cast<double>(lo);
    for (std::size_t v = 0; v < kNtuJoints; ++v) {
      const auto& a = track[lo * kNtuJoints + v];
      const auto& b = track[hi * kNtuJoints + v];
      for (std::size_t c = 0; c < 3; ++c) {
        seq.values(c, t, v) =
            static_cast<float>((1.0 - w) * a[c] + w * b[c]);
      }
    }
  }
  return seq;
}

}  // namespace dogclr
