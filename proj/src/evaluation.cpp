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

#include "segbn/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "segbn/inference.hpp"
#include "segbn/superpixel.hpp"

namespace segbn {
namespace {

using Clock = std::chrono::steady_clock;

long long matched_pixels(const std::vector<std::vector<long long>>& confusion,
                         const std::vector<int>& matching) {
  long long sum = 0;
  for (std::size_t t = 0; t < confusion.size(); ++t) {
    if (matching[t] > 0) sum += confusion[t][matching[t] - 1];
  }
  return sum;
}

// Best injective matching by exhaustive search over permutations of the
// larger side, feasible for up to 8 classes.
std::vector<int> exhaustive_matching(const std::vector<std::vector<long long>>& confusion) {
  const int kt = static_cast<int>(confusion.size());
  const int kp = static_cast<int>(confusion[0].size());
  std::vector<int> pred_ids(kp);
  std::iota(pred_ids.begin(), pred_ids.end(), 1);

  std::vector<int> best;
  long long best_sum = -1;
  // Assign a distinct predicted class (or none, when kp < kt) to each truth
  // class; permuting the predicted side covers every injection.
  std::vector<int> perm(pred_ids);
  do {
    std::vector<int> matching(kt, 0);
    for (int t = 0; t < kt && t < kp; ++t) matching[t] = perm[t];
    const long long sum = matched_pixels(confusion, matching);
    if (sum > best_sum) {
      best_sum = sum;
      best = matching;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  if (kp < kt) {
    // Also consider which truth classes receive the kp predicted classes.
    std::vector<int> select(kt, 0);
    std::fill(select.end() - kp, select.end(), 1);
    best_sum = -1;
    do {
      std::vector<int> slots;
      for (int t = 0; t < kt; ++t) {
        if (select[t]) slots.push_back(t);
      }
      std::vector<int> p2(pred_ids);
      std::sort(p2.begin(), p2.end());
      do {
        std::vector<int> matching(kt, 0);
        for (std::size_t s = 0; s < slots.size(); ++s) matching[slots[s]] = p2[s];
        const long long sum = matched_pixels(confusion, matching);
        if (sum > best_sum) {
          best_sum = sum;
          best = matching;
        }
      } while (std::next_permutation(p2.begin(), p2.end()));
    } while (std::next_permutation(select.begin(), select.end()));
  }
  return best;
}

std::vector<int> greedy_matching(const std::vector<std::vector<long long>>& confusion) {
  const int kt = static_cast<int>(confusion.size());
  const int kp = static_cast<int>(confusion[0].size());
  std::vector<int> matching(kt, 0);
  std::vector<char> used_t(kt, 0), used_p(kp, 0);
  for (int round = 0; round < std::min(kt, kp); ++round) {
    long long best = -1;
    int bt = -1, bp = -1;
    for (int t = 0; t < kt; ++t) {
      if (used_t[t]) continue;
      for (int p = 0; p < kp; ++p) {
        if (used_p[p]) continue;
        if (confusion[t][p] > best) {
          best = confusion[t][p];
          bt = t;
          bp = p;
        }
      }
    }
    matching[bt] = bp + 1;
    used_t[bt] = 1;
    used_p[bp] = 1;
  }
  return matching;
}

// Between-class variance of splitting the histogram at <= t, computed from
// exact integer class weights and intensity sums.
double otsu_split_score(double w0, double s0, double w1, double s1) {
  if (w0 <= 0.0 || w1 <= 0.0) return 0.0;
  const double d = s0 * w1 - s1 * w0;
  return d * d / (w0 * w1);
}

struct WindowStats {
  double mean = 0.0;
  double stddev = 0.0;
};

// Window statistics with replicate-clamped coordinates: out-of-range samples
// re-read the nearest border pixel, so every window holds window^2 samples.
WindowStats window_stats(const GrayImage& img, int cx, int cy, int window) {
  const int half = window / 2;
  double sum = 0.0, sum2 = 0.0;
  for (int dy = -half; dy <= half; ++dy) {
    const int y = std::clamp(cy + dy, 0, img.height - 1);
    for (int dx = -half; dx <= half; ++dx) {
      const int x = std::clamp(cx + dx, 0, img.width - 1);
      const double v = img.at(x, y);
      sum += v;
      sum2 += v * v;
    }
  }
  const double count = static_cast<double>(window) * window;
  WindowStats stats;
  stats.mean = sum / count;
  stats.stddev = std::sqrt(std::max(sum2 / count - stats.mean * stats.mean, 0.0));
  return stats;
}

void check_window(int window) {
  if (window < 3 || window % 2 == 0) {
    raise(ErrorKind::kParameter, "window must be odd and at least 3");
  }
}

// Standard normal deviate via Box-Muller on generator-derived uniforms;
// avoids std::normal_distribution so streams are identical everywhere.
double next_gaussian(std::mt19937_64& rng) {
  const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
  const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;         // [0,1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::acos(-1.0) * u2);
}

}  // namespace

EvalReport consistency(const LabelImage& pred, const LabelImage& truth) {
  if (pred.width != truth.width || pred.height != truth.height) {
    raise(ErrorKind::kParameter, "prediction and ground truth dimensions differ");
  }
  const int kt = truth.max_label();
  const int kp = pred.max_label();
  if (kt < 1 || kp < 1) raise(ErrorKind::kParameter, "labels must start at 1");

  EvalReport report;
  report.confusion.assign(kt, std::vector<long long>(kp, 0));
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    const int t = truth.labels[i];
    const int p = pred.labels[i];
    if (t < 1 || p < 1) raise(ErrorKind::kParameter, "labels must start at 1");
    report.confusion[t - 1][p - 1] += 1;
  }

  report.matching = (kt <= 8 && kp <= 8) ? exhaustive_matching(report.confusion)
                                         : greedy_matching(report.confusion);

  const long long total = static_cast<long long>(truth.labels.size());
  report.accuracy = static_cast<double>(matched_pixels(report.confusion, report.matching)) /
                    static_cast<double>(total);
  report.per_class.assign(kt, 0.0);
  for (int t = 0; t < kt; ++t) {
    long long in_class = 0;
    for (long long c : report.confusion[t]) in_class += c;
    if (in_class > 0 && report.matching[t] > 0) {
      report.per_class[t] = static_cast<double>(report.confusion[t][report.matching[t] - 1]) /
                            static_cast<double>(in_class);
    }
  }
  return report;
}

OtsuResult otsu(const GrayImage& img) {
  long long hist[256] = {0};
  for (std::uint8_t v : img.data) hist[v] += 1;

  int distinct = 0;
  for (long long h : hist) distinct += h > 0 ? 1 : 0;
  if (distinct < 2) {
    raise(ErrorKind::kDegenerate, "constant image has no meaningful threshold");
  }

  double total_w = static_cast<double>(img.pixel_count());
  double total_s = 0.0;
  for (int v = 0; v < 256; ++v) total_s += static_cast<double>(hist[v]) * v;

  int best_t = 0;
  double best_score = -1.0;
  double w0 = 0.0, s0 = 0.0;
  for (int t = 0; t < 256; ++t) {
    w0 += static_cast<double>(hist[t]);
    s0 += static_cast<double>(hist[t]) * t;
    const double score = otsu_split_score(w0, s0, total_w - w0, total_s - s0);
    if (score > best_score) {
      best_score = score;
      best_t = t;
    }
  }

  OtsuResult result;
  result.threshold = best_t;
  result.labels = LabelImage(img.width, img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    result.labels.labels[i] = img.data[i] <= best_t ? 1 : 2;
  }
  return result;
}

double niblack_threshold(double mean, double stddev, double k_param) {
  return mean + k_param * stddev;
}

double sauvola_threshold(double mean, double stddev, double k_param, double r_param) {
  return mean * (1.0 + k_param * (stddev / r_param - 1.0));
}

LabelImage niblack(const GrayImage& img, int window, double k_param) {
  check_window(window);
  LabelImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const WindowStats s = window_stats(img, x, y, window);
      out.at(x, y) = img.at(x, y) <= niblack_threshold(s.mean, s.stddev, k_param) ? 1 : 2;
    }
  }
  return out;
}

LabelImage sauvola(const GrayImage& img, int window, double k_param, double r_param) {
  check_window(window);
  if (!(r_param > 0.0)) raise(ErrorKind::kParameter, "r_param must be positive");
  LabelImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const WindowStats s = window_stats(img, x, y, window);
      out.at(x, y) =
          img.at(x, y) <= sauvola_threshold(s.mean, s.stddev, k_param, r_param) ? 1 : 2;
    }
  }
  return out;
}

SynthImage synth_image(int width, int height, const std::vector<RegionSpec>& regions,
                       double noise_sigma, std::uint64_t seed) {
  if (width < 1 || height < 1) raise(ErrorKind::kParameter, "canvas must be non-empty");
  if (regions.empty()) raise(ErrorKind::kSpec, "at least one region required");
  if (noise_sigma < 0.0) raise(ErrorKind::kParameter, "noise sigma must be non-negative");

  SynthImage out;
  out.image = GrayImage(width, height);
  out.truth = LabelImage(width, height, 0);

  for (std::size_t r = 0; r < regions.size(); ++r) {
    const RegionSpec& reg = regions[r];
    if (reg.width < 1 || reg.height < 1 || reg.x < 0 || reg.y < 0 ||
        reg.x + reg.width > width || reg.y + reg.height > height) {
      raise(ErrorKind::kSpec, "region " + std::to_string(r + 1) + " exceeds the canvas");
    }
    for (int y = reg.y; y < reg.y + reg.height; ++y) {
      for (int x = reg.x; x < reg.x + reg.width; ++x) {
        if (out.truth.at(x, y) != 0) {
          raise(ErrorKind::kSpec, "regions overlap at (" + std::to_string(x) + "," +
                                      std::to_string(y) + ")");
        }
        out.truth.at(x, y) = static_cast<int>(r) + 1;
        out.image.at(x, y) = reg.intensity;
      }
    }
  }
  for (int v : out.truth.labels) {
    if (v == 0) raise(ErrorKind::kSpec, "regions do not cover the canvas");
  }

  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    for (std::uint8_t& px : out.image.data) {
      const double noisy = px + noise_sigma * next_gaussian(rng);
      px = static_cast<std::uint8_t>(std::clamp(std::floor(noisy + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

SynthImage synth_vertical_bands(int width, int height, const std::vector<std::uint8_t>& bands,
                                double noise_sigma, std::uint64_t seed) {
  if (bands.empty() || static_cast<int>(bands.size()) > width) {
    raise(ErrorKind::kParameter, "band count must be in 1..width");
  }
  std::vector<RegionSpec> regions;
  const int m = static_cast<int>(bands.size());
  int x = 0;
  for (int b = 0; b < m; ++b) {
    const int next = static_cast<int>(static_cast<long long>(b + 1) * width / m);
    regions.push_back({x, 0, next - x, height, bands[b]});
    x = next;
  }
  return synth_image(width, height, regions, noise_sigma, seed);
}

ScalingReport scaling_benchmark(const GrayImage& img, const std::vector<int>& counts,
                                const ScalingConfig& cfg) {
  if (counts.empty()) raise(ErrorKind::kParameter, "at least one superpixel count required");
  if (!std::is_sorted(counts.begin(), counts.end())) {
    raise(ErrorKind::kParameter, "superpixel counts must be ascending");
  }

  ScalingReport report;
  for (int n : counts) {
    ScalingRow row;
    row.n = n;
    row.seconds = std::numeric_limits<double>::infinity();
    row.total_seconds = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < std::max(cfg.repeats, 1); ++rep) {
      const auto t0 = Clock::now();
      const SuperpixelMap sp = oversegment(img, n, cfg.balance, cfg.bandwidth);
      const auto t1 = Clock::now();
      const ClassModel model = kmeans_centers(sp.means, cfg.classes, cfg.seed);
      const PredicateConfig pred;
      const IcmConfig icm_cfg;
      combined(sp, model, pred, icm_cfg);
      const auto t2 = Clock::now();
      row.seconds = std::min(row.seconds, std::chrono::duration<double>(t2 - t1).count());
      row.total_seconds =
          std::min(row.total_seconds, std::chrono::duration<double>(t2 - t0).count());
    }
    report.rows.push_back(row);
  }

  // Least-squares fit seconds ~ a + b * n over the model+inference stage,
  // whose cost is the part that tracks the superpixel count.
  const std::size_t m = report.rows.size();
  double mean_n = 0.0, mean_s = 0.0;
  for (const auto& row : report.rows) {
    mean_n += row.n;
    mean_s += row.seconds;
  }
  mean_n /= static_cast<double>(m);
  mean_s /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& row : report.rows) {
    const double dn = row.n - mean_n;
    const double ds = row.seconds - mean_s;
    sxx += dn * dn;
    sxy += dn * ds;
    syy += ds * ds;
  }
  if (syy > 0.0 && sxx > 0.0) {
    const double slope = sxy / sxx;
    double ss_res = 0.0;
    for (const auto& row : report.rows) {
      const double fit = mean_s + slope * (row.n - mean_n);
      ss_res += (row.seconds - fit) * (row.seconds - fit);
    }
    report.r_squared = 1.0 - ss_res / syy;
  } else {
    report.r_squared = 1.0;
  }
  return report;
}

}  // namespace segbn
