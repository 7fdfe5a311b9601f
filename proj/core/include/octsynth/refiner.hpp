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
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "octsynth/nn.hpp"
#include "octsynth/tensor_io.hpp"

namespace octsynth {

// --- adversarial primitives --------------------------------------------------------
//
// Shared by every discriminator in the pipeline. Logits are unbounded; the
// losses are binary cross-entropy on sigmoid(logits) averaged over patches.

/// Non-saturating generator loss: BCE(fake, 1).
torch::Tensor adversarial_loss_g(const torch::Tensor& d_fake);
/// BCE(real, 1) + BCE(fake, 0).
torch::Tensor adversarial_loss_d(const torch::Tensor& d_real, const torch::Tensor& d_fake);

/// Mean absolute difference; shapes must match.
torch::Tensor l1_fidelity(const torch::Tensor& v_real, const torch::Tensor& v_r);
double l1_fidelity(const Volume3D& v_real, const Volume3D& v_r);

/// adversarial_loss_g(d_fake) + alpha * l1_fidelity(v_real, v_r).
torch::Tensor refiner_objective(const torch::Tensor& d_fake, const torch::Tensor& v_real,
                                const torch::Tensor& v_r, double alpha);

// --- patch discriminator --------------------------------------------------------------

/// Output size of one stride-2 layer along an axis: kernel 4 / stride 2 /
/// padding 1 while the axis still has at least 2 cells, otherwise kernel 3 /
/// stride 1 / padding 1 so a collapsed axis stays at 1.
int patch_axis_step(int n);
/// Patch grid after the four strided layers, (d, h, w).
std::array<int, 3> patch_grid_3d(int depth, int height, int width);
std::array<int, 2> patch_grid_2d(int height, int width);

struct PatchDiscriminator3DImpl : torch::nn::Module {
  /// `in_channels` is 2 for the conditional variant (input concatenated with V_E).
  PatchDiscriminator3DImpl(int depth, int height, int width, int base_channels,
                           int in_channels = 1);

  torch::Tensor forward(const torch::Tensor& x);

  std::array<int, 3> input_shape;
  torch::nn::ModuleList layers{nullptr};
  torch::nn::Conv3d projection{nullptr};
};
TORCH_MODULE(PatchDiscriminator3D);

/// 2D counterpart used by the style stage. `features` returns the
/// activation after every strided layer for feature matching.
struct PatchDiscriminator2DImpl : torch::nn::Module {
  PatchDiscriminator2DImpl(int height, int width, int base_channels, int in_channels = 1);

  torch::Tensor forward(const torch::Tensor& x);
  std::pair<torch::Tensor, std::vector<torch::Tensor>> forward_with_features(
      const torch::Tensor& x);

  torch::nn::ModuleList layers{nullptr};
  torch::nn::Conv2d projection{nullptr};
};
TORCH_MODULE(PatchDiscriminator2D);

// --- refiner ------------------------------------------------------------------------

struct RefinerConfig {
  int depth = 8;
  int height = 64;
  int width = 64;
  int base_channels = 16;
  int disc_base_channels = 16;
  /// discriminator sees (V, V_E) instead of V alone
  bool conditional = false;
  double alpha = 10.0;
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int epochs = 60;
  int batch_size = 4;
  std::uint64_t seed = 3;

  void validate() const;
  std::string to_json() const;
  static RefinerConfig from_json(const std::string& text);
};

struct ConvBlock3DImpl : torch::nn::Module {
  ConvBlock3DImpl(int64_t in, int64_t out);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv3d conv1{nullptr}, conv2{nullptr};
  torch::nn::BatchNorm3d bn1{nullptr}, bn2{nullptr};
};
TORCH_MODULE(ConvBlock3D);

/// 3D U-Net: three Conv3d-BatchNorm3d-ReLU encoder blocks with max-pooling,
/// a bottleneck block and a transposed-convolution decoder with skips.
struct RefinerGeneratorImpl : torch::nn::Module {
  explicit RefinerGeneratorImpl(int base_channels);

  torch::Tensor forward(const torch::Tensor& v_e);

  std::vector<ConvBlock3D> enc;
  ConvBlock3D bottleneck{nullptr};
  std::vector<torch::nn::ConvTranspose3d> up;
  std::vector<ConvBlock3D> dec;
  torch::nn::Conv3d head{nullptr};
};
TORCH_MODULE(RefinerGenerator);

class RefinerModel {
 public:
  explicit RefinerModel(const RefinerConfig& cfg);

  const RefinerConfig& config() const { return cfg_; }
  RefinerGenerator& generator() { return gen_; }

  /// Eval-mode forward; the volume must have the configured shape.
  Volume3D refine(const Volume3D& v_e) const;

  void save(const std::filesystem::path& path) const;
  static RefinerModel load(const std::filesystem::path& path);

 private:
  RefinerConfig cfg_;
  mutable RefinerGenerator gen_;
};

struct RefinerPair {
  Volume3D structural;  // V_E
  Volume3D real;
};

struct RefinerTrainResult {
  RefinerModel model;
  /// components: loss_g_adv, loss_l1, loss_d
  LossLog log;
};

/// Alternating discriminator / generator updates over `pairs`.
RefinerTrainResult train_refiner(const std::vector<RefinerPair>& pairs, const RefinerConfig& cfg);

}  // namespace octsynth
