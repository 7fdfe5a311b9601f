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
#include <bit>
#include <cmath>
#include <numbers>

#include "octsynth/error.hpp"
#include "octsynth/imgproc.hpp"
#include "octsynth/masterprint.hpp"
#include "octsynth/rng.hpp"

namespace octsynth {
namespace {

constexpr double kPi = std::numbers::pi;

// Precomputed even-symmetric Gabor kernels over quantised orientation and
// frequency. Orientation is the ridge direction; the carrier runs across it.
class GaborBank {
 public:
  GaborBank(int orientations, std::vector<double> frequencies, double sigma_along_scale,
            double sigma_across_scale)
      : orientations_(orientations), frequencies_(std::move(frequencies)) {
    for (double f : frequencies_) {
      const double s_along = sigma_along_scale / f;
      const double s_across = sigma_across_scale / f;
      const int r = static_cast<int>(std::ceil(2.5 * std::max(s_along, s_across)));
      for (int o = 0; o < orientations_; ++o) {
        const double theta = kPi * o / orientations_;
        const double c = std::cos(theta), s = std::sin(theta);
        Kernel k;
        k.radius = r;
        k.w.resize((2 * r + 1) * (2 * r + 1));
        double envelope_sum = 0.0, carrier_sum = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) {
            const double u = dx * c + dy * s;
            const double v = -dx * s + dy * c;
            const double env = std::exp(-0.5 * (u * u / (s_along * s_along) +
                                                 v * v / (s_across * s_across)));
            envelope_sum += env;
            carrier_sum += env * std::cos(2.0 * kPi * f * v);
          }
        }
        // remove DC so a flat patch has zero response
        const double dc = carrier_sum / envelope_sum;
        double abs_sum = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) {
            const double u = dx * c + dy * s;
            const double v = -dx * s + dy * c;
            const double env = std::exp(-0.5 * (u * u / (s_along * s_along) +
                                                 v * v / (s_across * s_across)));
            const double g = env * (std::cos(2.0 * kPi * f * v) - dc);
            k.w[(dy + r) * (2 * r + 1) + (dx + r)] = g;
            abs_sum += std::abs(g);
          }
        }
        for (double& g : k.w) g /= abs_sum;
        kernels_.push_back(std::move(k));
      }
    }
  }

  int orientation_bin(double theta) const {
    double t = std::fmod(theta, kPi);
    if (t < 0) t += kPi;
    return static_cast<int>(std::lround(t / kPi * orientations_)) % orientations_;
  }

  int frequency_bin(double f) const {
    int best = 0;
    for (int i = 1; i < static_cast<int>(frequencies_.size()); ++i) {
      if (std::abs(frequencies_[i] - f) < std::abs(frequencies_[best] - f)) best = i;
    }
    return best;
  }

  // Spatially varying filtering: each output pixel uses its own kernel.
  Field2D apply(const Field2D& in, const std::vector<int>& kernel_index) const {
    Field2D out(in.height, in.width);
    for (int y = 0; y < in.height; ++y) {
      for (int x = 0; x < in.width; ++x) {
        const Kernel& k = kernels_[kernel_index[static_cast<std::size_t>(y) * in.width + x]];
        const int r = k.radius;
        double acc = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
          const int yy = std::clamp(y + dy, 0, in.height - 1);
          const double* row = in.v.data() + static_cast<std::size_t>(yy) * in.width;
          const double* kw = k.w.data() + (dy + r) * (2 * r + 1) + r;
          for (int dx = -r; dx <= r; ++dx) {
            acc += kw[dx] * row[std::clamp(x + dx, 0, in.width - 1)];
          }
        }
        out(y, x) = acc;
      }
    }
    return out;
  }

  int index(int frequency_bin, int orientation_bin) const {
    return frequency_bin * orientations_ + orientation_bin;
  }

 private:
  struct Kernel {
    int radius = 0;
    std::vector<double> w;
  };
  int orientations_;
  std::vector<double> frequencies_;
  std::vector<Kernel> kernels_;
};

double latent_uniform(const IdentitySpec& spec, std::size_t i) {
  return 0.5 * (1.0 + std::erf(spec.z_id[i] / std::numbers::sqrt2));
}

}  // namespace

BinaryImage2D synth_master_print(const IdentitySpec& spec, int height, int width,
                                 const MasterPrintOptions& options) {
  spec.validate();
  if (height < 64 || width < 64) throw ValidationError("master print must be at least 64x64");
  if (!(options.min_frequency > 0.0 && options.max_frequency >= options.min_frequency)) {
    throw ValidationError("invalid ridge frequency range");
  }

  std::uint64_t h = mix64(spec.seed);
  for (float z : spec.z_id) h = mix64(h ^ std::bit_cast<std::uint32_t>(z));
  Rng rng(h);

  // Singular points: 1-2 cores near the centre, 1-2 deltas below them.
  const int n_singular = 2 + std::min(2, static_cast<int>(latent_uniform(spec, 0) * 3.0));
  const int n_cores = n_singular / 2;
  const int n_deltas = n_singular - n_cores;
  std::vector<Point2> cores, deltas;
  const Point2 centre{0.3 + 0.25 * latent_uniform(spec, 1), 0.35 + 0.3 * latent_uniform(spec, 2)};
  cores.push_back(centre);
  if (n_cores == 2) {
    cores.push_back({centre.y + 0.08 + 0.1 * latent_uniform(spec, 3),
                     centre.x + 0.15 * (latent_uniform(spec, 4) - 0.5)});
  }
  deltas.push_back({0.7 + 0.2 * latent_uniform(spec, 5), 0.1 + 0.3 * latent_uniform(spec, 6)});
  if (n_deltas == 2) {
    deltas.push_back({0.7 + 0.2 * latent_uniform(spec, 7), 0.6 + 0.3 * latent_uniform(spec, 8)});
  }
  const double theta0 = kPi * (latent_uniform(spec, 9) - 0.5) * 0.5;

  // Ridge frequency field, smooth and bounded to [min, max].
  const double k1 = 0.3 + 0.7 * latent_uniform(spec, 10);
  const double k2 = 0.3 + 0.7 * latent_uniform(spec, 11);
  const double phase1 = 2.0 * kPi * latent_uniform(spec, 12);
  const double phase2 = 2.0 * kPi * latent_uniform(spec, 13);
  const double base = 0.3 + 0.4 * latent_uniform(spec, 14);

  constexpr int kOrientations = 24;
  constexpr int kFrequencies = 6;
  std::vector<double> freqs;
  for (int i = 0; i < kFrequencies; ++i) {
    freqs.push_back(options.min_frequency +
                    (options.max_frequency - options.min_frequency) * i / (kFrequencies - 1));
  }
  const GaborBank bank(kOrientations, freqs, 0.55, 0.45);

  std::vector<int> kernel_index(static_cast<std::size_t>(height) * width);
  for (int y = 0; y < height; ++y) {
    const double yn = static_cast<double>(y) / (height - 1);
    for (int x = 0; x < width; ++x) {
      const double xn = static_cast<double>(x) / (width - 1);
      double theta = theta0;
      for (const auto& c : cores) theta += 0.5 * std::atan2(yn - c.y, xn - c.x);
      for (const auto& d : deltas) theta -= 0.5 * std::atan2(yn - d.y, xn - d.x);
      const double s = std::clamp(base + 0.2 * std::sin(2.0 * kPi * k1 * yn + phase1) +
                                      0.1 * std::sin(2.0 * kPi * k2 * xn + phase2),
                                  0.0, 1.0);
      const double f = options.min_frequency + (options.max_frequency - options.min_frequency) * s;
      kernel_index[static_cast<std::size_t>(y) * width + x] =
          bank.index(bank.frequency_bin(f), bank.orientation_bin(theta));
    }
  }

  Field2D field(height, width);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : field.v) v = normal(rng);

  for (int it = 0; it < options.iterations; ++it) {
    field = bank.apply(field, kernel_index);
    const double m = field.mean();
    const double sd = std::max(field.stddev(), 1e-12);
    for (double& v : field.v) v = std::tanh(1.5 * (v - m) / sd);
  }

  BinaryImage2D out(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) out(y, x) = field(y, x) > 0.0 ? 1 : 0;
  }
  return out;
}

std::vector<double> estimate_orientation(const Image2D& img, double gradient_sigma,
                                         double tensor_sigma) {
  const Field2D f = gaussian_filter(Field2D(img), gradient_sigma);
  const int h = f.height, w = f.width;
  Field2D jxx(h, w), jyy(h, w), jxy(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = 0.5 * (f(y, std::min(x + 1, w - 1)) - f(y, std::max(x - 1, 0)));
      const double gy = 0.5 * (f(std::min(y + 1, h - 1), x) - f(std::max(y - 1, 0), x));
      jxx(y, x) = gx * gx;
      jyy(y, x) = gy * gy;
      jxy(y, x) = gx * gy;
    }
  }
  jxx = gaussian_filter(jxx, tensor_sigma);
  jyy = gaussian_filter(jyy, tensor_sigma);
  jxy = gaussian_filter(jxy, tensor_sigma);
  std::vector<double> theta(static_cast<std::size_t>(h) * w);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    // dominant gradient direction, rotated a quarter turn onto the ridge
    theta[i] = 0.5 * std::atan2(2.0 * jxy.v[i], jxx.v[i] - jyy.v[i]) + 0.5 * kPi;
  }
  return theta;
}

BinarizeResult binarize_print(const Image2D& img, const BinarizeOptions& options) {
  Field2D f(img);
  if (f.stddev() < 1e-6) {
    return {BinaryImage2D(img.height(), img.width()), true};
  }
  const int h = f.height, w = f.width;

  // local contrast normalisation
  const int norm_radius = std::max(4, static_cast<int>(std::lround(1.0 / options.frequency)));
  const Field2D mean = box_filter(f, norm_radius);
  Field2D sq(h, w);
  for (std::size_t i = 0; i < sq.v.size(); ++i) sq.v[i] = (f.v[i] - mean.v[i]) * (f.v[i] - mean.v[i]);
  const Field2D var = box_filter(sq, norm_radius);
  Field2D norm(h, w);
  for (std::size_t i = 0; i < norm.v.size(); ++i) {
    norm.v[i] = (f.v[i] - mean.v[i]) / (std::sqrt(var.v[i]) + 1e-3);
  }

  const auto theta = estimate_orientation(img, options.gradient_sigma, options.tensor_sigma);
  constexpr int kOrientations = 24;
  const GaborBank bank(kOrientations, {options.frequency}, 0.5, 0.3);
  std::vector<int> kernel_index(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    kernel_index[i] = bank.index(0, bank.orientation_bin(theta[i]));
  }
  Field2D enhanced = bank.apply(norm, kernel_index);
  const Field2D local = box_filter(enhanced, options.threshold_radius);

  BinaryImage2D out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out(y, x) = enhanced(y, x) > local(y, x) ? 1 : 0;
  }
  return {std::move(out), false};
}

}  // namespace octsynth
