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

#include <cmath>

#include "octsynth/error.hpp"
#include "octsynth/metrics.hpp"
#include "octsynth/nn.hpp"

namespace octsynth {
namespace {

torch::Tensor gaussian_taps(int window, double sigma, torch::Dtype dtype) {
  auto idx = torch::arange(window, torch::TensorOptions().dtype(torch::kFloat64)) -
             static_cast<double>(window / 2);
  auto g = torch::exp(-0.5 * idx * idx / (sigma * sigma));
  return (g / g.sum()).to(dtype);
}

// Separable zero-padded filtering of a [N,1,...] tensor along every spatial
// axis with the same 1-D taps.
torch::Tensor separable_filter(const torch::Tensor& x, const torch::Tensor& taps) {
  namespace F = torch::nn::functional;
  const int64_t spatial = x.dim() - 2;
  const int64_t w = taps.size(0);
  const int64_t pad = w / 2;
  torch::Tensor out = x;
  for (int64_t axis = 0; axis < spatial; ++axis) {
    std::vector<int64_t> shape(spatial + 2, 1);
    shape[2 + axis] = w;
    auto k = taps.reshape(shape);
    std::vector<int64_t> padding(spatial, 0);
    padding[axis] = pad;
    if (spatial == 2) {
      out = F::conv2d(out, k, F::Conv2dFuncOptions().padding(padding));
    } else {
      out = F::conv3d(out, k, F::Conv3dFuncOptions().padding(padding));
    }
  }
  return out;
}

}  // namespace

torch::Tensor ssim_tensor(const torch::Tensor& a, const torch::Tensor& b,
                          const SsimOptions& options) {
  if (a.sizes() != b.sizes()) throw ValidationError("ssim inputs differ in shape");
  if (a.dim() != 4 && a.dim() != 5) throw ValidationError("ssim expects 4-D or 5-D tensors");
  if (options.window < 3 || options.window % 2 == 0) {
    throw ValidationError("ssim window must be odd and >= 3");
  }
  const auto dtype = a.scalar_type();
  auto taps = gaussian_taps(options.window, options.sigma, dtype);

  std::vector<int64_t> flat = a.sizes().vec();
  const int64_t batch = flat[0] * flat[1];
  flat[0] = batch;
  flat[1] = 1;
  auto x = a.reshape(flat);
  auto y = b.reshape(flat);

  std::vector<int64_t> unit = flat;
  unit[0] = 1;
  auto norm = separable_filter(torch::ones(unit, a.options().requires_grad(false)), taps);
  auto mean = [&](const torch::Tensor& t) { return separable_filter(t, taps) / norm; };

  auto mu_x = mean(x);
  auto mu_y = mean(y);
  auto sxx = mean(x * x) - mu_x * mu_x;
  auto syy = mean(y * y) - mu_y * mu_y;
  auto sxy = mean(x * y) - mu_x * mu_y;
  auto num = (2.0 * mu_x * mu_y + options.c1) * (2.0 * sxy + options.c2);
  auto den = (mu_x * mu_x + mu_y * mu_y + options.c1) * (sxx + syy + options.c2);
  return (num / den).mean();
}

double ssim(const Image2D& a, const Image2D& b, const SsimOptions& options) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ValidationError("ssim inputs differ in shape");
  }
  torch::NoGradGuard no_grad;
  return ssim_tensor(to_tensor(a).to(torch::kFloat64), to_tensor(b).to(torch::kFloat64), options)
      .item<double>();
}

double ssim(const Volume3D& a, const Volume3D& b, const SsimOptions& options) {
  if (!a.same_shape(b)) throw ValidationError("ssim inputs differ in shape");
  torch::NoGradGuard no_grad;
  return ssim_tensor(to_tensor(a).to(torch::kFloat64), to_tensor(b).to(torch::kFloat64), options)
      .item<double>();
}

}  // namespace octsynth
