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

#include "segbn/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

namespace segbn {
namespace {

// Union-find over pixels with component sizes.
class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n), size_(n, 1) {
    for (int i = 0; i < n; ++i) parent_[i] = i;
  }

  int find(int x) {
    int root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const int next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  long long size(int root) const { return size_[root]; }

  // Merges the two roots; returns the surviving root.
  int unite(int a, int b) {
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return a;
  }

 private:
  std::vector<int> parent_;
  std::vector<long long> size_;
};

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Entropy-rate gain of selecting one more lattice edge, up to the fixed
// 1/w_total factor. selected[u] is the already-selected incident weight at u.
double entropy_gain_unnormalized(double w, double wu, double su, double wv, double sv) {
  auto vertex_delta = [](double w, double wt, double s) {
    const double loose_before = wt - s;
    const double loose_after = std::max(loose_before - w, 0.0);
    return -(w * std::log(w / wt) + xlogx(loose_after / wt) * wt - xlogx(loose_before / wt) * wt);
  };
  return vertex_delta(w, wu, su) + vertex_delta(w, wv, sv);
}

// Gain in the component-size entropy term for merging components of
// fractional sizes p and q (plus one for the component-count drop).
double balance_gain(double p, double q) {
  return 1.0 + xlogx(p) + xlogx(q) - xlogx(p + q);
}

struct QueueEntry {
  double gain;
  int edge_index;
  int u, v;  // tie-break key: raster-lexicographic edge order
};

struct QueueOrder {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.gain != b.gain) return a.gain < b.gain;
    if (a.u != b.u) return a.u > b.u;
    return a.v > b.v;
  }
};

}  // namespace

bool SuperpixelMap::adjacent(int a, int b) const {
  const auto& nb = adjacency[a];
  return std::binary_search(nb.begin(), nb.end(), b);
}

PixelGraph build_pixel_graph(const GrayImage& img, double bandwidth) {
  if (img.pixel_count() == 0) raise(ErrorKind::kParameter, "empty image");
  if (!(bandwidth > 0.0)) raise(ErrorKind::kParameter, "bandwidth must be positive");

  PixelGraph g;
  g.width = img.width;
  g.height = img.height;
  g.edges.reserve(2 * img.pixel_count());
  const double denom = 2.0 * bandwidth * bandwidth;
  auto weight = [&](std::uint8_t a, std::uint8_t b) {
    const double d = static_cast<double>(a) - static_cast<double>(b);
    return std::exp(-(d * d) / denom);
  };
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const int u = y * img.width + x;
      if (x + 1 < img.width) {
        g.edges.push_back({u, u + 1, weight(img.data[u], img.data[u + 1])});
      }
      if (y + 1 < img.height) {
        g.edges.push_back({u, u + img.width, weight(img.data[u], img.data[u + img.width])});
      }
    }
  }
  return g;
}

SuperpixelMap oversegment(const GrayImage& img, int n, double balance,
                          double bandwidth, MergeTrace* trace) {
  const long long pixels = static_cast<long long>(img.pixel_count());
  if (n < 1 || n > pixels) {
    raise(ErrorKind::kParameter, "superpixel count must be in 1..pixel count");
  }
  if (balance < 0.0) raise(ErrorKind::kParameter, "balance must be non-negative");

  const PixelGraph g = build_pixel_graph(img, bandwidth);
  const int node_count = g.node_count();

  std::vector<double> incident(node_count, 0.0);  // total incident weight, fixed
  std::vector<double> selected(node_count, 0.0);  // selected incident weight
  double w_total = 0.0;
  for (const auto& e : g.edges) {
    incident[e.u] += e.weight;
    incident[e.v] += e.weight;
    w_total += e.weight;
  }

  DisjointSets sets(node_count);
  const double inv_pixels = 1.0 / static_cast<double>(pixels);

  // Objective gain of one merge: entropy-rate gain (the stationary
  // distribution normalizes it by the total edge weight) plus the balance-
  // weighted gain of the balancing term H(cluster sizes) - cluster count.
  // The balancing gain is gated by the merge edge's similarity weight:
  // inside homogeneous regions (w ~ 1) it drives components toward equal
  // sizes, while a dissimilar edge (w ~ 0) can never buy a merge on size
  // grounds alone, which keeps components on one side of intensity steps.
  auto edge_gain = [&](const PixelGraph::Edge& e) {
    const double h = entropy_gain_unnormalized(e.weight, incident[e.u], selected[e.u],
                                               incident[e.v], selected[e.v]) /
                     w_total;
    const int ru = sets.find(e.u);
    const int rv = sets.find(e.v);
    const double b = balance_gain(sets.size(ru) * inv_pixels, sets.size(rv) * inv_pixels);
    return h + balance * e.weight * b;
  };

  std::priority_queue<QueueEntry, std::vector<QueueEntry>, QueueOrder> queue;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    queue.push({edge_gain(e), static_cast<int>(i), e.u, e.v});
  }

  int components = node_count;
  while (components > n) {
    if (queue.empty()) {
      raise(ErrorKind::kParameter, "graph exhausted before reaching target count");
    }
    const QueueEntry top = queue.top();
    queue.pop();
    const auto& e = g.edges[top.edge_index];
    const int ru = sets.find(e.u);
    const int rv = sets.find(e.v);
    if (ru == rv) continue;  // cycle edge: cannot change the partition

    const double gain = edge_gain(e);
    // Lazy evaluation: gains only decrease as merges proceed, so a stale
    // entry is re-queued with its refreshed value instead of accepted.
    if (!queue.empty()) {
      const QueueEntry& next = queue.top();
      if (gain < next.gain ||
          (gain == next.gain && (top.u > next.u || (top.u == next.u && top.v > next.v)))) {
        queue.push({gain, top.edge_index, top.u, top.v});
        continue;
      }
    }

    selected[e.u] += e.weight;
    selected[e.v] += e.weight;
    sets.unite(ru, rv);
    --components;
    if (trace) trace->gains.push_back(gain);
  }

  std::vector<int> assignment(node_count);
  for (int i = 0; i < node_count; ++i) assignment[i] = sets.find(i);
  return superpixels_from_assignment(img, assignment);
}

SuperpixelMap grid_superpixels(const GrayImage& img, int cols, int rows) {
  if (cols < 1 || rows < 1 || cols > img.width || rows > img.height) {
    raise(ErrorKind::kParameter, "grid dimensions out of range");
  }
  std::vector<int> assignment(img.pixel_count());
  for (int y = 0; y < img.height; ++y) {
    const int ty = static_cast<int>(static_cast<long long>(y) * rows / img.height);
    for (int x = 0; x < img.width; ++x) {
      const int tx = static_cast<int>(static_cast<long long>(x) * cols / img.width);
      assignment[static_cast<std::size_t>(y) * img.width + x] = ty * cols + tx;
    }
  }
  return superpixels_from_assignment(img, assignment);
}

SuperpixelMap superpixels_from_assignment(const GrayImage& img,
                                          const std::vector<int>& assignment) {
  if (assignment.size() != img.pixel_count() || assignment.empty()) {
    raise(ErrorKind::kParameter, "assignment size does not match image");
  }

  // Canonical ids: order of first appearance in a raster scan.
  std::vector<int> canonical;
  {
    std::vector<int> remap;
    for (int raw : assignment) {
      if (raw < 0) raise(ErrorKind::kParameter, "negative superpixel id");
      if (raw >= static_cast<int>(remap.size())) remap.resize(raw + 1, -1);
    }
    remap.assign(remap.size(), -1);
    canonical.resize(assignment.size());
    int next = 0;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      int& slot = remap[assignment[i]];
      if (slot < 0) slot = next++;
      canonical[i] = slot;
    }
  }

  SuperpixelMap sp;
  sp.width = img.width;
  sp.height = img.height;
  sp.assignment = std::move(canonical);
  sp.n = 1 + *std::max_element(sp.assignment.begin(), sp.assignment.end());

  sp.sizes.assign(sp.n, 0);
  std::vector<double> sums(sp.n, 0.0);
  for (std::size_t i = 0; i < sp.assignment.size(); ++i) {
    sp.sizes[sp.assignment[i]] += 1;
    sums[sp.assignment[i]] += img.data[i];
  }
  sp.means.resize(sp.n);
  for (int s = 0; s < sp.n; ++s) sp.means[s] = sums[s] / static_cast<double>(sp.sizes[s]);

  std::vector<std::set<int>> adj(sp.n);
  auto id = [&](int x, int y) { return sp.assignment[static_cast<std::size_t>(y) * img.width + x]; };
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const int a = id(x, y);
      if (x + 1 < img.width && id(x + 1, y) != a) {
        adj[a].insert(id(x + 1, y));
        adj[id(x + 1, y)].insert(a);
      }
      if (y + 1 < img.height && id(x, y + 1) != a) {
        adj[a].insert(id(x, y + 1));
        adj[id(x, y + 1)].insert(a);
      }
    }
  }
  sp.adjacency.resize(sp.n);
  for (int s = 0; s < sp.n; ++s) {
    sp.adjacency[s].assign(adj[s].begin(), adj[s].end());
  }

  // Every component must be 4-connected: grow each one from its first pixel.
  {
    std::vector<int> seen(img.pixel_count(), 0);
    std::vector<int> first(sp.n, -1);
    for (std::size_t i = 0; i < sp.assignment.size(); ++i) {
      if (first[sp.assignment[i]] < 0) first[sp.assignment[i]] = static_cast<int>(i);
    }
    std::vector<int> stack;
    long long reached = 0;
    for (int s = 0; s < sp.n; ++s) {
      stack.push_back(first[s]);
      seen[first[s]] = 1;
      while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        ++reached;
        const int x = p % img.width;
        const int y = p / img.width;
        const int moves[4] = {x > 0 ? p - 1 : -1, x + 1 < img.width ? p + 1 : -1,
                              y > 0 ? p - img.width : -1, y + 1 < img.height ? p + img.width : -1};
        for (int q : moves) {
          if (q >= 0 && !seen[q] && sp.assignment[q] == s) {
            seen[q] = 1;
            stack.push_back(q);
          }
        }
      }
    }
    if (reached != static_cast<long long>(img.pixel_count())) {
      raise(ErrorKind::kParameter, "superpixel components must be 4-connected");
    }
  }

  return sp;
}

}  // namespace segbn
