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

#include "dogclr/pngio.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "dogclr/error.hpp"

namespace dogclr {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
               const std::vector<std::uint8_t>& payload) {
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  const auto crc = crc32(0L, out.data() + crc_start,
                         static_cast<uInt>(out.size() - crc_start));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

void write_png_rgb8(const std::string& path, std::size_t width,
                    std::size_t height, const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != width * height * 3) {
    throw Error(ErrorKind::ShapeMismatch, "PNG pixel buffer size mismatch");
  }
  // filter byte 0 per scanline
  std::vector<std::uint8_t> raw;
  raw.reserve(height * (width * 3 + 1));
  for (std::size_t y = 0; y < height; ++y) {
    raw.push_back(0);
    raw.insert(raw.end(), rgb.begin() + static_cast<long>(y * width * 3),
               rgb.begin() + static_cast<long>((y + 1) * width * 3));
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> deflated(bound);
  if (compress2(deflated.data(), &bound, raw.data(),
                static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw Error(ErrorKind::IoError, "deflate of PNG payload failed");
  }
  deflated.resize(bound);

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(width));
  put_u32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // color type: truecolor
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter
  ihdr.push_back(0);  // interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", deflated);
  put_chunk(out, "IEND", {});

  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::IoError, "cannot write " + path);
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw Error(ErrorKind::IoError, "PNG write failed for " + path);
}

Canvas::Canvas(std::size_t width, std::size_t height, std::uint8_t r,
               std::uint8_t g, std::uint8_t b)
    : width_(width), height_(height), rgb_(width * height * 3) {
  for (std::size_t i = 0; i < width * height; ++i) {
    rgb_[i * 3] = r;
    rgb_[i * 3 + 1] = g;
    rgb_[i * 3 + 2] = b;
  }
}

void Canvas::set(long x, long y, std::uint8_t r, std::uint8_t g,
                 std::uint8_t b) {
  if (x < 0 || y < 0 || x >= static_cast<long>(width_) ||
      y >= static_cast<long>(height_)) {
    return;
  }
  const std::size_t i =
      (static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x)) * 3;
  rgb_[i] = r;
  rgb_[i + 1] = g;
  rgb_[i + 2] = b;
}

void Canvas::fill_rect(long x0, long y0, long x1, long y1, std::uint8_t r,
                       std::uint8_t g, std::uint8_t b) {
  for (long y = y0; y <= y1; ++y) {
    for (long x = x0; x <= x1; ++x) set(x, y, r, g, b);
  }
}

void Canvas::draw_line(long x0, long y0, long x1, long y1, std::uint8_t r,
                       std::uint8_t g, std::uint8_t b) {
  // Bresenham
  const long dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const long sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  long err = dx + dy;
  long x = x0, y = y0;
  while (true) {
    set(x, y, r, g, b);
    if (x == x1 && y == y1) break;
    const long e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

void Canvas::draw_dot(long x, long y, long radius, std::uint8_t r,
                      std::uint8_t g, std::uint8_t b) {
  fill_rect(x - radius, y - radius, x + radius, y + radius, r, g, b);
}

void Canvas::save(const std::string& path) const {
  write_png_rgb8(path, width_, height_, rgb_);
}

void class_color(std::size_t index, std::uint8_t& r, std::uint8_t& g,
                 std::uint8_t& b) {
  static const std::uint8_t palette[10][3] = {
      {31, 119, 180}, {255, 127, 14}, {44, 160, 44},  {214, 39, 40},
      {148, 103, 189}, {140, 86, 75}, {227, 119, 194}, {127, 127, 127},
      {188, 189, 34}, {23, 190, 207}};
  const auto& c = palette[index % 10];
  r = c[0];
  g = c[1];
  b = c[2];
}

}  // namespace dogclr
