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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "octsynth/nn.hpp"
#include "octsynth/tensor_io.hpp"

namespace octsynth {

struct ExpansionConfig {
  static constexpr int kLevels = 4;

  int depth = 32;
  int height = 256;
  int width = 256;
  int base_channels = 64;
  /// encoder width at level i is base_channels * multipliers[i]
  std::vector<int> channel_multipliers = {1, 2, 4, 8};
  int bottleneck_multiplier = 16;
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int epochs = 40;
  int batch_size = 4;
  std::uint64_t seed = 2;

  /// D=8, 64x64, base 16.
  static ExpansionConfig desk();

  void validate() const;
  std::string to_json() const;
  static ExpansionConfig from_json(const std::string& text);
};

struct ConvBlock2DImpl : torch::nn::Module {
  ConvBlock2DImpl(int64_t in, int64_t out);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr};
  torch::nn::InstanceNorm2d norm1{nullptr}, norm2{nullptr};
};
TORCH_MODULE(ConvBlock2D);

struct ConvBlock3DINImpl : torch::nn::Module {
  ConvBlock3DINImpl(int64_t in, int64_t out);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv3d conv1{nullptr}, conv2{nullptr};
  torch::nn::InstanceNorm3d norm1{nullptr}, norm2{nullptr};
};
TORCH_MODULE(ConvBlock3DIN);

/// Unit-depth axis, then 3x3x3 conv (zero padding), InstanceNorm3d, ReLU.
struct Lift2DTo3DImpl : torch::nn::Module {
  Lift2DTo3DImpl(int64_t in, int64_t out);
  /// [N,C,h,w] -> [N,C',1,h,w]
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv3d conv{nullptr};
  torch::nn::InstanceNorm3d norm{nullptr};
};
TORCH_MODULE(Lift2DTo3D);

/// [N,C,h,w] -> [N,C,d,h',w']: d identical copies along a new depth axis,
/// with (h,w) trilinearly resized to (h',w').
torch::Tensor broadcast_skip(const torch::Tensor& features, int64_t d, int64_t h, int64_t w);

/// Four-level 2D-encoder / 3D-decoder U-Net.
struct ExpansionNetImpl : torch::nn::Module {
  explicit ExpansionNetImpl(const ExpansionConfig& cfg);

  /// [N,1,H,W] -> [N,1,D,H,W] in [0,1]
  torch::Tensor forward(const torch::Tensor& x);
  /// Decoder depth after each stage for a unit-depth lift: 2, 4, 8, 16.
  std::vector<int64_t> depth_trajectory() const;

  int64_t depth, height, width;
  std::vector<ConvBlock2D> enc;
  ConvBlock2D bottleneck{nullptr};
  Lift2DTo3D lift{nullptr};
  std::vector<torch::nn::ConvTranspose3d> up;
  std::vector<ConvBlock3DIN> dec;
  torch::nn::Conv3d head{nullptr};
};
TORCH_MODULE(ExpansionNet);

/// Mean voxelwise BCE (prediction clamped to [eps, 1-eps]) + (1 - SSIM3D).
/// Inputs are [N,1,D,H,W]; differentiable in v_pred.
torch::Tensor expansion_loss(const torch::Tensor& v_pred, const torch::Tensor& v_real,
                             double eps = 1e-7);
double expansion_loss(const Volume3D& v_pred, const Volume3D& v_real);

class ExpansionModel {
 public:
  explicit ExpansionModel(const ExpansionConfig& cfg);

  const ExpansionConfig& config() const { return cfg_; }
  ExpansionNet& net() { return net_; }

  /// Eval-mode forward; throws ValidationError for a wrong input size.
  Volume3D expand(const Image2D& i_s) const;

  void save(const std::filesystem::path& path) const;
  static ExpansionModel load(const std::filesystem::path& path);

 private:
  ExpansionConfig cfg_;
  mutable ExpansionNet net_;
};

struct ExpansionPair {
  Image2D image;  // I_S or a phantom z-mean
  Volume3D volume;
};

struct ExpansionTrainResult {
  ExpansionModel model;
  /// components: loss_bce, loss_ssim
  LossLog log;
};

ExpansionTrainResult train_expansion(const std::vector<ExpansionPair>& pairs,
                                     const ExpansionConfig& cfg);

}  // namespace octsynth
