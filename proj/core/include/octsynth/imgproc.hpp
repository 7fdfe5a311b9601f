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

#include <span>
#include <vector>

#include "octsynth/tensor_io.hpp"

namespace octsynth {

/// Dense float field without the [0,1] invariant; scratch space for filters.
struct Field2D {
  int height = 0;
  int width = 0;
  std::vector<double> v;

  Field2D() = default;
  Field2D(int h, int w, double fill = 0.0)
      : height(h), width(w), v(static_cast<std::size_t>(h) * w, fill) {}
  explicit Field2D(const Image2D& img);

  double& operator()(int y, int x) { return v[static_cast<std::size_t>(y) * width + x]; }
  double operator()(int y, int x) const { return v[static_cast<std::size_t>(y) * width + x]; }

  /// Clamps into [0,1] and converts.
  Image2D to_image() const;
  /// Affine rescale of [min,max] onto [0,1] (all zeros when flat).
  Image2D normalized_image() const;

  double mean() const;
  double stddev() const;
};

Field2D box_filter(const Field2D& f, int radius);
Image2D box_blur(const Image2D& img, int radius);

/// Separable Gaussian with clamp-to-edge borders.
Field2D gaussian_filter(const Field2D& f, double sigma);
Image2D gaussian_blur(const Image2D& img, double sigma);

/// Bilinear sample at continuous pixel coordinates; `outside` outside the
/// pixel-centre grid [0,h-1]x[0,w-1].
double sample_bilinear(const Field2D& f, double y, double x, double outside);

/// Resize with pixel-centre alignment (half-pixel offsets).
Image2D resize_bilinear(const Image2D& img, int height, int width);

/// Pearson correlation of two equally sized sample vectors.
double pearson(std::span<const float> a, std::span<const float> b);

}  // namespace octsynth
