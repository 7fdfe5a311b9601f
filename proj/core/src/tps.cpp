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

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "octsynth/error.hpp"
#include "octsynth/imgproc.hpp"
#include "octsynth/masterprint.hpp"
#include "octsynth/rng.hpp"

namespace octsynth {

double tps_kernel(double r2) { return r2 > 0.0 ? r2 * std::log(r2) : 0.0; }

TPSWarp TPSWarp::identity() { return TPSWarp{}; }

Point2 TPSWarp::apply(Point2 p) const {
  double oy = affine[0][0] * p.y + affine[0][1] * p.x + affine[0][2];
  double ox = affine[1][0] * p.y + affine[1][1] * p.x + affine[1][2];
  for (std::size_t i = 0; i < control_points.size(); ++i) {
    const double dy = p.y - control_points[i].y;
    const double dx = p.x - control_points[i].x;
    const double u = tps_kernel(dy * dy + dx * dx);
    oy += kernel_weights[i].y * u;
    ox += kernel_weights[i].x * u;
  }
  return {oy, ox};
}

TPSWarp fit_tps(const std::vector<Point2>& control_points,
                const std::vector<Point2>& displacements) {
  const int n = static_cast<int>(control_points.size());
  if (n < 4) throw ValidationError("TPS needs at least 4 control points");
  if (displacements.size() != control_points.size()) {
    throw ValidationError("TPS control point / displacement count mismatch");
  }
  Eigen::MatrixXd affine_basis(n, 3);
  for (int i = 0; i < n; ++i) {
    affine_basis.row(i) << 1.0, control_points[i].y, control_points[i].x;
    for (int j = 0; j < i; ++j) {
      if (std::abs(control_points[i].y - control_points[j].y) < 1e-12 &&
          std::abs(control_points[i].x - control_points[j].x) < 1e-12) {
        throw ValidationError("TPS control points must be distinct");
      }
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(affine_basis);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) throw ValidationError("TPS control points are collinear");

  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n + 3, n + 3);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + 3, 2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double dy = control_points[i].y - control_points[j].y;
      const double dx = control_points[i].x - control_points[j].x;
      system(i, j) = tps_kernel(dy * dy + dx * dx);
    }
    system(i, n) = system(n, i) = 1.0;
    system(i, n + 1) = system(n + 1, i) = control_points[i].y;
    system(i, n + 2) = system(n + 2, i) = control_points[i].x;
    // Solve for the displacement field; the identity is added back below,
    // so a zero displacement gives an exactly zero solution.
    rhs(i, 0) = displacements[i].y;
    rhs(i, 1) = displacements[i].x;
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  if (!(lu.rcond() > 1e-12)) {
    throw ValidationError("TPS system is singular (duplicate or collinear control points)");
  }
  const Eigen::MatrixXd sol = lu.solve(rhs);

  TPSWarp warp;
  warp.control_points = control_points;
  warp.displacements = displacements;
  warp.kernel_weights.resize(n);
  for (int i = 0; i < n; ++i) warp.kernel_weights[i] = {sol(i, 0), sol(i, 1)};
  warp.affine = {{{1.0 + sol(n + 1, 0), sol(n + 2, 0), sol(n, 0)},
                  {sol(n + 1, 1), 1.0 + sol(n + 2, 1), sol(n, 1)}}};
  return warp;
}

namespace {

double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < 1e-9 ? r : v;
}

Point2 to_pixels(Point2 p, int h, int w) {
  return {snap(p.y * (h - 1)), snap(p.x * (w - 1))};
}

}  // namespace

Image2D tps_warp_image(const Image2D& img, const TPSWarp& warp) {
  const int h = img.height(), w = img.width();
  Field2D src(img);
  Image2D out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Point2 q = warp.apply({static_cast<double>(y) / (h - 1),
                             static_cast<double>(x) / (w - 1)});
      q = to_pixels(q, h, w);
      const double v = sample_bilinear(src, q.y, q.x, 0.0);
      out(y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

BinaryImage2D tps_warp_image(const BinaryImage2D& img, const TPSWarp& warp) {
  const int h = img.height(), w = img.width();
  BinaryImage2D out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Point2 q = warp.apply({static_cast<double>(y) / (h - 1),
                             static_cast<double>(x) / (w - 1)});
      q = to_pixels(q, h, w);
      if (q.y < 0.0 || q.x < 0.0 || q.y > h - 1 || q.x > w - 1) continue;
      const int sy = std::clamp(static_cast<int>(std::lround(q.y)), 0, h - 1);
      const int sx = std::clamp(static_cast<int>(std::lround(q.x)), 0, w - 1);
      out(y, x) = img(sy, sx);
    }
  }
  return out;
}

std::vector<Point2> distortion_control_points() {
  std::vector<Point2> pts;
  constexpr double kGrid[3] = {0.15, 0.5, 0.85};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == 1 && j == 1) continue;
      pts.push_back({kGrid[i], kGrid[j]});
    }
  }
  return pts;
}

TPSWarp distortion_to_warp(const DistortionSpec& spec, double magnitude) {
  if (!(magnitude > 0.0)) throw ValidationError("distortion magnitude must be > 0");
  if (spec.z_distort.size() != DistortionSpec::kLatentSize) {
    throw ValidationError("z_distort must have 16 components");
  }
  std::vector<Point2> pts = distortion_control_points();
  std::vector<Point2> disp;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    disp.push_back({magnitude * spec.z_distort[2 * i], magnitude * spec.z_distort[2 * i + 1]});
  }
  for (Point2 corner : {Point2{0, 0}, Point2{0, 1}, Point2{1, 0}, Point2{1, 1}}) {
    pts.push_back(corner);
    disp.push_back({0.0, 0.0});
  }
  return fit_tps(pts, disp);
}

// --- Identity / distortion specs ---------------------------------------------

IdentitySpec IdentitySpec::sample(std::uint64_t seed) {
  IdentitySpec spec;
  spec.seed = seed;
  Rng rng(derive_seed(seed, {0x1d}));
  std::normal_distribution<float> normal(0.0f, 1.0f);
  spec.z_id.resize(kLatentSize);
  for (auto& z : spec.z_id) z = normal(rng);
  return spec;
}

void IdentitySpec::validate() const {
  if (z_id.size() != kLatentSize) throw ValidationError("z_id must have 512 components");
  for (float z : z_id) {
    if (!std::isfinite(z)) throw ValidationError("z_id is not finite");
  }
}

DistortionSpec DistortionSpec::identity(int height, int width) {
  DistortionSpec s;
  s.z_distort.assign(kLatentSize, 0.0f);
  s.crop_h = height;
  s.crop_w = width;
  return s;
}

DistortionSpec DistortionSpec::sample(std::uint64_t seed, int height, int width) {
  DistortionSpec s;
  Rng rng(derive_seed(seed, {0xd1}));
  std::normal_distribution<float> normal(0.0f, 1.0f);
  s.z_distort.resize(kLatentSize);
  for (auto& z : s.z_distort) z = std::clamp(normal(rng), -kClip, kClip);
  std::uniform_real_distribution<double> jitter(-0.04, 0.04);
  const int mode = static_cast<int>(rng() % 4);
  s.crop_dx = 0;
  s.crop_w = width;
  switch (mode) {
    case 0:  // full
      s.crop_dy = 0;
      s.crop_h = height;
      break;
    case 1:  // upper
      s.crop_h = static_cast<int>(std::lround((0.55 + jitter(rng)) * height));
      s.crop_dy = 0;
      break;
    case 2: {  // middle
      s.crop_h = static_cast<int>(std::lround(0.6 * height));
      const int slack = height - s.crop_h;
      s.crop_dy = std::clamp(static_cast<int>(std::lround((0.5 + jitter(rng)) * slack)), 0, slack);
      break;
    }
    default:  // lower
      s.crop_h = static_cast<int>(std::lround((0.55 + jitter(rng)) * height));
      s.crop_dy = height - s.crop_h;
      break;
  }
  return s;
}

void DistortionSpec::validate(int height, int width) const {
  if (z_distort.size() != kLatentSize) throw ValidationError("z_distort must have 16 components");
  for (float z : z_distort) {
    if (!std::isfinite(z) || std::abs(z) > kClip) {
      throw ValidationError("z_distort component outside [-3,3]");
    }
  }
  if (crop_h <= 0 || crop_w <= 0 || crop_dy < 0 || crop_dx < 0 ||
      crop_dy + crop_h > height || crop_dx + crop_w > width) {
    throw ValidationError("crop window out of bounds");
  }
}

// --- Crop ---------------------------------------------------------------------

BinaryImage2D crop_mask(int height, int width, const DistortionSpec& spec,
                        int out_height, int out_width) {
  if (spec.crop_h <= 0 || spec.crop_w <= 0 || spec.crop_dy < 0 || spec.crop_dx < 0 ||
      spec.crop_dy + spec.crop_h > height || spec.crop_dx + spec.crop_w > width) {
    throw ValidationError("crop window out of bounds");
  }
  BinaryImage2D mask(height, width);
  for (int y = spec.crop_dy; y < spec.crop_dy + spec.crop_h; ++y) {
    for (int x = spec.crop_dx; x < spec.crop_dx + spec.crop_w; ++x) mask(y, x) = 1;
  }
  if (out_height == 0) out_height = height;
  if (out_width == 0) out_width = width;
  if (out_height == height && out_width == width) return mask;
  return BinaryImage2D::from_image(resize_bilinear(mask.to_image(), out_height, out_width), 0.5f);
}

Image2D crop_impression(const Image2D& img, const DistortionSpec& spec,
                        int out_height, int out_width) {
  const BinaryImage2D mask = crop_mask(img.height(), img.width(), spec);
  Image2D out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!mask(y, x)) out(y, x) = 0.0f;
    }
  }
  if (out_height == 0) out_height = img.height();
  if (out_width == 0) out_width = img.width();
  return resize_bilinear(out, out_height, out_width);
}

BinaryImage2D crop_impression(const BinaryImage2D& img, const DistortionSpec& spec,
                              int out_height, int out_width) {
  const BinaryImage2D mask = crop_mask(img.height(), img.width(), spec);
  BinaryImage2D out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!mask(y, x)) out(y, x) = 0;
    }
  }
  if (out_height == 0) out_height = img.height();
  if (out_width == 0) out_width = img.width();
  if (out_height == img.height() && out_width == img.width()) return out;
  // nearest-neighbour keeps the image binary
  BinaryImage2D scaled(out_height, out_width);
  for (int y = 0; y < out_height; ++y) {
    const int sy = std::min(img.height() - 1, (2 * y + 1) * img.height() / (2 * out_height));
    for (int x = 0; x < out_width; ++x) {
      const int sx = std::min(img.width() - 1, (2 * x + 1) * img.width() / (2 * out_width));
      scaled(y, x) = out(sy, sx);
    }
  }
  return scaled;
}

}  // namespace octsynth
