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
#include <string>
#include <vector>

namespace dogclr {

/// Writes an 8-bit RGB PNG (filter 0 rows, zlib-deflated IDAT).
void write_png_rgb8(const std::string& path, std::size_t width,
                    std::size_t height, const std::vector<std::uint8_t>& rgb);

/// Tiny raster surface for the emitted figures. Pixel origin is top-left.
class Canvas {
 public:
  Canvas(std::size_t width, std::size_t height,
         std::uint8_t r = 255, std::uint8_t g = 255, std::uint8_t b = 255);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }

  void set(long x, long y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  void fill_rect(long x0, long y0, long x1, long y1, std::uint8_t r,
                 std::uint8_t g, std::uint8_t b);
  void draw_line(long x0, long y0, long x1, long y1, std::uint8_t r,
                 std::uint8_t g, std::uint8_t b);
  /// Filled square of side 2*radius+1 centered at (x, y).
  void draw_dot(long x, long y, long radius, std::uint8_t r, std::uint8_t g,
                std::uint8_t b);

  void save(const std::string& path) const;

 private:
  std::size_t width_, height_;
  std::vector<std::uint8_t> rgb_;
};

/// Deterministic categorical color palette.
void class_color(std::size_t index, std::uint8_t& r, std::uint8_t& g,
                 std::uint8_t& b);

}  // namespace dogclr
