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

#ifndef SEGBN_SUPERPIXEL_HPP_
#define SEGBN_SUPERPIXEL_HPP_

#include <vector>

#include "segbn/image.hpp"

namespace segbn {

/// 4-connected pixel lattice with Gaussian intensity-similarity weights.
/// Edges are stored with u < v in raster-lexicographic order; that order is
/// also the greedy tie-break.
struct PixelGraph {
  struct Edge {
    int u = 0;
    int v = 0;
    double weight = 0.0;
  };

  int width = 0;
  int height = 0;
  std::vector<Edge> edges;

  int node_count() const { return width * height; }
};

/// Partition of an image into connected superpixels plus the per-superpixel
/// statistics the model consumes: mean intensity, size, adjacency.
/// Ids are dense 0..n-1, ordered by each component's first raster pixel.
struct SuperpixelMap {
  int width = 0;
  int height = 0;
  int n = 0;
  std::vector<int> assignment;             // per pixel superpixel id
  std::vector<double> means;               // per superpixel mean intensity
  std::vector<long long> sizes;            // per superpixel pixel count
  std::vector<std::vector<int>> adjacency; // per superpixel sorted neighbor ids

  bool adjacent(int a, int b) const;
};

/// Builds the weighted lattice; w(u,v) = exp(-(I(u)-I(v))^2 / (2 bandwidth^2)).
PixelGraph build_pixel_graph(const GrayImage& img, double bandwidth);

/// Filled in by oversegment when requested: the accepted merge gains in
/// selection order (non-increasing for a correct lazy greedy).
struct MergeTrace {
  std::vector<double> gains;
};

/// Over-segments into exactly n connected superpixels by greedy graph
/// merging. Every pixel starts as its own component; the merge joining two
/// components along the edge with the largest combined gain (entropy-rate
/// term plus balance-weighted component-size entropy term) is applied until
/// n components remain. Deterministic: gain ties break on the raster-
/// lexicographic edge order.
SuperpixelMap oversegment(const GrayImage& img, int n, double balance = 0.5,
                          double bandwidth = 30.0, MergeTrace* trace = nullptr);

/// Rectangular-tile fallback: cols x rows tiles of near-equal size,
/// intensity ignored. For tests needing known geometry.
SuperpixelMap grid_superpixels(const GrayImage& img, int cols, int rows);

/// Wraps an arbitrary per-pixel id map as a SuperpixelMap. Ids are
/// renumbered to the canonical raster order; statistics are recomputed.
/// Rejects maps whose components are not 4-connected.
SuperpixelMap superpixels_from_assignment(const GrayImage& img,
                                          const std::vector<int>& assignment);

}  // namespace segbn

#endif  // SEGBN_SUPERPIXEL_HPP_
