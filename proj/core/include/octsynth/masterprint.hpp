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

#include <array>
#include <cstdint>
#include <vector>

#include "octsynth/tensor_io.hpp"

namespace octsynth {

/// Latent identity of one finger. Same spec, same master print.
struct IdentitySpec {
  static constexpr std::size_t kLatentSize = 512;

  std::vector<float> z_id;
  std::uint64_t seed = 0;

  /// z_id drawn i.i.d. N(0,1) from `seed`.
  static IdentitySpec sample(std::uint64_t seed);
  void validate() const;
};

/// Per-impression distortion latent plus crop window (pixels).
struct DistortionSpec {
  static constexpr std::size_t kLatentSize = 16;
  static constexpr float kClip = 3.0f;

  std::vector<float> z_distort;
  int crop_dy = 0;
  int crop_dx = 0;
  int crop_h = 0;
  int crop_w = 0;

  /// Zero distortion, full-frame crop.
  static DistortionSpec identity(int height, int width);
  /// Clipped-normal z_distort and a crop window that keeps the upper,
  /// middle, lower or full part of the frame (chosen by the seed).
  static DistortionSpec sample(std::uint64_t seed, int height, int width);
  void validate(int height, int width) const;
};

struct Point2 {
  double y = 0.0;
  double x = 0.0;
};

/// Thin-plate spline f(p) = A p + t + sum_i w_i U(|p - c_i|) with
/// U(r) = r^2 log r^2 and U(0) = 0. Coordinates are normalised to [0,1]^2.
struct TPSWarp {
  std::vector<Point2> control_points;
  std::vector<Point2> displacements;
  /// rows: output y, output x; columns: coefficient of y, of x, constant
  std::array<std::array<double, 3>, 2> affine = {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}};
  /// one (w_y, w_x) pair per control point
  std::vector<Point2> kernel_weights;

  static TPSWarp identity();
  Point2 apply(Point2 p) const;
};

/// Thin-plate radial basis, U(0) = 0.
double tps_kernel(double r2);

/// Solves the interpolation system so that warp(c_i) = c_i + d_i. Throws
/// ValidationError for fewer than 4 points or a singular system.
TPSWarp fit_tps(const std::vector<Point2>& control_points,
                const std::vector<Point2>& displacements);

/// Backward warp: out(p) = in(warp(p)), bilinear for grey images,
/// nearest-neighbour for binary images; zero outside the source.
Image2D tps_warp_image(const Image2D& img, const TPSWarp& warp);
BinaryImage2D tps_warp_image(const BinaryImage2D& img, const TPSWarp& warp);

inline constexpr double kDefaultDistortionMagnitude = 0.04;

/// 8 interior control points (3x3 grid on [0.15,0.85]^2 minus centre)
/// displaced by magnitude * z_distort, plus 4 pinned corners.
TPSWarp distortion_to_warp(const DistortionSpec& spec,
                           double magnitude = kDefaultDistortionMagnitude);
std::vector<Point2> distortion_control_points();

/// Keeps the crop window in place on a zeroed canvas, then resamples to
/// out_height x out_width (pass 0 to keep the source size).
BinaryImage2D crop_impression(const BinaryImage2D& img, const DistortionSpec& spec,
                              int out_height = 0, int out_width = 0);
Image2D crop_impression(const Image2D& img, const DistortionSpec& spec,
                        int out_height = 0, int out_width = 0);
/// The crop window itself as a {0,1} mask at the output size.
BinaryImage2D crop_mask(int height, int width, const DistortionSpec& spec,
                        int out_height = 0, int out_width = 0);

struct MasterPrintOptions {
  double min_frequency = 1.0 / 12.0;  // cycles per pixel
  double max_frequency = 1.0 / 6.0;
  int iterations = 10;
};

/// Procedural ridge pattern: orientation field from 2-4 singular points,
/// smoothly varying ridge frequency, band-passed noise grown by repeated
/// oriented Gabor filtering, thresholded at zero.
BinaryImage2D synth_master_print(const IdentitySpec& spec, int height, int width,
                                 const MasterPrintOptions& options = {});

struct BinarizeResult {
  BinaryImage2D image;
  bool blank = false;
};

struct BinarizeOptions {
  double gradient_sigma = 1.0;
  double tensor_sigma = 3.0;
  double frequency = 1.0 / 9.0;
  int threshold_radius = 6;
};

/// Classical binarisation: structure-tensor orientation, oriented Gabor
/// enhancement, local-mean threshold. Constant input yields an all-zero
/// image with `blank` set.
BinarizeResult binarize_print(const Image2D& img, const BinarizeOptions& options = {});

/// Ridge orientation (radians, direction along the ridges) per pixel.
std::vector<double> estimate_orientation(const Image2D& img, double gradient_sigma,
                                         double tensor_sigma);

}  // namespace octsynth
