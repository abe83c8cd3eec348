// Copyright 2026 The segbn Authors.
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

#ifndef SEGBN_RASTER_IO_HPP_
#define SEGBN_RASTER_IO_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "segbn/image.hpp"

namespace segbn {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

/// Class index -> display color. Must cover every label present in a render.
using Palette = std::map<int, Rgb>;

/// Rec.709 luma, rounded half-up.
std::uint8_t luma709(std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// Loads a PNG (8-bit gray or RGB) or binary PGM (P5) file as grayscale.
/// Color input is collapsed with luma709.
GrayImage load_gray(const std::string& path);

/// Binary PGM (P5, maxval 255) encode/decode. save(load(x)) is pixel-exact.
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes);
void save_pgm(const GrayImage& img, const std::string& path);

/// Fixed default palette of maximally separated hues; defined for k <= 16.
Palette default_palette(int k);

/// Renders a label map to RGB PNG bytes. Same input -> identical bytes.
std::vector<std::uint8_t> render_labels(const LabelImage& labels, const Palette& palette);

/// Gray image as RGB PNG with superpixel boundaries marked in red.
/// `assignment` holds one superpixel id per pixel, row-major.
std::vector<std::uint8_t> render_boundary_overlay(const GrayImage& img,
                                                  const std::vector<int>& assignment);

/// Superpixel id map as a 16-bit PGM (P5 maxval 65535, big-endian samples).
std::vector<std::uint8_t> encode_id_pgm16(int width, int height,
                                          const std::vector<int>& assignment);

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file(const std::string& path);

}  // namespace segbn

#endif  // SEGBN_RASTER_IO_HPP_
