// Copyright 2026 The octsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <filesystem>
#include <algorithm>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "octsynth/metrics.hpp"

namespace octsynth::testing {

/// Fresh, empty directory under the system temp dir; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("octsynth_" + tag + "_" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

/// Largest relative error between autograd and central differences of a
/// scalar function of one float64 tensor. Relative to max(|analytic|, 1e-3 scale).
inline double gradient_check(const std::function<torch::Tensor(const torch::Tensor&)>& f,
                             torch::Tensor x, double h = 1e-6) {
  x = x.detach().to(torch::kFloat64).clone().requires_grad_(true);
  auto y = f(x);
  y.backward();
  const auto analytic = x.grad().detach().clone().flatten();
  auto base = x.detach().clone().flatten();
  double scale = analytic.abs().max().item<double>();
  if (scale < 1e-3) scale = 1e-3;
  double worst = 0.0;
  torch::NoGradGuard no_grad;
  for (int64_t i = 0; i < base.numel(); ++i) {
    auto plus = base.clone();
    auto minus = base.clone();
    plus[i] += h;
    minus[i] -= h;
    const double fp = f(plus.view(x.sizes())).item<double>();
    const double fm = f(minus.view(x.sizes())).item<double>();
    const double numeric = (fp - fm) / (2.0 * h);
    worst = std::max(worst, std::abs(numeric - analytic[i].item<double>()) / scale);
  }
  return worst;
}

/// Direct-summation SSIM over a D x H x W grid (D = 1 for images): Gaussian
/// window truncated at the borders and renormalised, population moments.
inline double reference_ssim(const std::vector<double>& a, const std::vector<double>& b, int d,
                             int h, int w, int window, double sigma, double c1 = 1e-4,
                             double c2 = 9e-4) {
  const int r = window / 2;
  std::vector<double> g(window);
  for (int k = 0; k < window; ++k) g[k] = std::exp(-0.5 * (k - r) * (k - r) / (sigma * sigma));
  const int rz = d == 1 ? 0 : r;
  double total = 0.0;
  for (int z = 0; z < d; ++z)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double sw = 0, sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
        for (int dz = -rz; dz <= rz; ++dz)
          for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) {
              const int zz = z + dz, yy = y + dy, xx = x + dx;
              if (zz < 0 || zz >= d || yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
              const double wt = (d == 1 ? 1.0 : g[dz + r]) * g[dy + r] * g[dx + r];
              const std::size_t i = (static_cast<std::size_t>(zz) * h + yy) * w + xx;
              sw += wt;
              sa += wt * a[i];
              sb += wt * b[i];
              saa += wt * a[i] * a[i];
              sbb += wt * b[i] * b[i];
              sab += wt * a[i] * b[i];
            }
        const double ma = sa / sw, mb = sb / sw;
        const double va = saa / sw - ma * ma, vb = sbb / sw - mb * mb, cab = sab / sw - ma * mb;
        total += ((2 * ma * mb + c1) * (2 * cab + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      }
  return total / (static_cast<double>(d) * h * w);
}

struct BruteRoc {
  std::vector<double> far, frr;
};

// Every candidate threshold counted from scratch.
inline BruteRoc brute_roc(const ScoreSet& s) {
  std::vector<double> t = {-std::numeric_limits<double>::infinity()};
  for (double v : s.genuine) t.push_back(v);
  for (double v : s.impostor) t.push_back(v);
  t.push_back(std::numeric_limits<double>::infinity());
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  BruteRoc r;
  for (double th : t) {
    double fa = 0, fr = 0;
    for (double v : s.impostor) fa += v >= th;
    for (double v : s.genuine) fr += v < th;
    r.far.push_back(fa / s.impostor.size());
    r.frr.push_back(fr / s.genuine.size());
  }
  return r;
}

inline double brute_eer(const ScoreSet& s) {
  const auto r = brute_roc(s);
  for (std::size_t i = 1; i < r.far.size(); ++i) {
    const double d1 = r.far[i] - r.frr[i];
    if (d1 > 0) continue;
    const double d0 = r.far[i - 1] - r.frr[i - 1];
    // FAR along the segment where FAR - FRR crosses zero
    return r.far[i - 1] + (r.far[i] - r.far[i - 1]) * d0 / (d0 - d1);
  }
  return r.far.back();
}

inline double brute_tar(const ScoreSet& s, double target) {
  const auto r = brute_roc(s);
  for (std::size_t i = 1; i < r.far.size(); ++i) {
    if (r.far[i] > target) continue;
    const double a = (r.far[i - 1] - target) / (r.far[i - 1] - r.far[i]);
    return 1.0 - (r.frr[i - 1] + a * (r.frr[i] - r.frr[i - 1]));
  }
  return 0.0;
}

}  // namespace octsynth::testing
