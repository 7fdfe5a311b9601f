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

#include "octsynth/imgproc.hpp"

#include <algorithm>
#include <cmath>

#include "octsynth/error.hpp"

namespace octsynth {

Field2D::Field2D(const Image2D& img)
    : height(img.height()), width(img.width()),
      v(img.values().begin(), img.values().end()) {}

Image2D Field2D::to_image() const {
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<float>(std::clamp(v[i], 0.0, 1.0));
  }
  return Image2D(height, width, std::move(out));
}

Image2D Field2D::normalized_image() const {
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double span = *hi - *lo;
  std::vector<float> out(v.size(), 0.0f);
  if (span > 0.0) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[i] = static_cast<float>(std::clamp((v[i] - *lo) / span, 0.0, 1.0));
    }
  }
  return Image2D(height, width, std::move(out));
}

double Field2D::mean() const {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double Field2D::stddev() const {
  const double m = mean();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return v.empty() ? 0.0 : std::sqrt(s / static_cast<double>(v.size()));
}

namespace {

// 1-D pass along rows (axis 1) or columns (axis 0) with clamp-to-edge.
Field2D convolve_axis(const Field2D& f, std::span<const double> kernel,
                      int axis) {
  const int r = static_cast<int>(kernel.size() / 2);
  Field2D out(f.height, f.width);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      double s = 0.0;
      for (int k = -r; k <= r; ++k) {
        const int yy = axis == 0 ? std::clamp(y + k, 0, f.height - 1) : y;
        const int xx = axis == 1 ? std::clamp(x + k, 0, f.width - 1) : x;
        s += kernel[k + r] * f(yy, xx);
      }
      out(y, x) = s;
    }
  }
  return out;
}

}  // namespace

Field2D box_filter(const Field2D& f, int radius) {
  if (radius <= 0) return f;
  std::vector<double> k(2 * radius + 1, 1.0 / (2 * radius + 1));
  return convolve_axis(convolve_axis(f, k, 0), k, 1);
}

Image2D box_blur(const Image2D& img, int radius) {
  return box_filter(Field2D(img), radius).to_image();
}

Field2D gaussian_filter(const Field2D& f, double sigma) {
  if (sigma <= 0.0) return f;
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * r + 1);
  double s = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
    s += k[i + r];
  }
  for (double& x : k) x /= s;
  return convolve_axis(convolve_axis(f, k, 0), k, 1);
}

Image2D gaussian_blur(const Image2D& img, double sigma) {
  return gaussian_filter(Field2D(img), sigma).to_image();
}

double sample_bilinear(const Field2D& f, double y, double x, double outside) {
  if (y < 0.0 || x < 0.0 || y > f.height - 1 || x > f.width - 1) return outside;
  const int y0 = std::min(static_cast<int>(std::floor(y)), f.height - 1);
  const int x0 = std::min(static_cast<int>(std::floor(x)), f.width - 1);
  const int y1 = std::min(y0 + 1, f.height - 1);
  const int x1 = std::min(x0 + 1, f.width - 1);
  const double ty = y - y0, tx = x - x0;
  return (1 - ty) * ((1 - tx) * f(y0, x0) + tx * f(y0, x1)) +
         ty * ((1 - tx) * f(y1, x0) + tx * f(y1, x1));
}

Image2D resize_bilinear(const Image2D& img, int height, int width) {
  if (height == img.height() && width == img.width()) return img;
  Field2D f(img);
  Image2D out(height, width);
  const double sy = static_cast<double>(img.height()) / height;
  const double sx = static_cast<double>(img.width()) / width;
  for (int y = 0; y < height; ++y) {
    const double yy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
    for (int x = 0; x < width; ++x) {
      const double xx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
      out(y, x) = static_cast<float>(std::clamp(sample_bilinear(f, yy, xx, 0.0), 0.0, 1.0));
    }
  }
  return out;
}

double pearson(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size() || a.empty()) {
    throw ValidationError("pearson needs equal, non-empty inputs");
  }
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace octsynth
