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

#ifndef SEGBN_IMAGE_HPP_
#define SEGBN_IMAGE_HPP_

#include <cstdint>
#include <vector>

#include "segbn/error.hpp"

namespace segbn {

/// 8-bit grayscale raster, row-major. data.size() == width * height.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) raise(ErrorKind::kParameter, "image dimensions must be positive");
  }

  std::size_t pixel_count() const { return data.size(); }

  std::uint8_t at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return data[static_cast<std::size_t>(y) * width + x];
  }

  bool operator==(const GrayImage&) const = default;
};

/// Per-pixel class indices in 1..k, same geometry as the source image.
struct LabelImage {
  int width = 0;
  int height = 0;
  std::vector<int> labels;

  LabelImage() = default;
  LabelImage(int w, int h, int fill = 1)
      : width(w), height(h), labels(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) raise(ErrorKind::kParameter, "image dimensions must be positive");
  }

  int at(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
  int& at(int x, int y) {
    return labels[static_cast<std::size_t>(y) * width + x];
  }

  int max_label() const {
    int m = 0;
    for (int v : labels) m = v > m ? v : m;
    return m;
  }

  bool operator==(const LabelImage&) const = default;
};

}  // namespace segbn

#endif  // SEGBN_IMAGE_HPP_
