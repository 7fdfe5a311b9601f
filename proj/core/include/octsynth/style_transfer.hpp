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
#include <map>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "octsynth/nn.hpp"
#include "octsynth/tensor_io.hpp"

namespace octsynth {

/// Replaces the per-channel statistics of `content` ([N,C,...] or [C,...])
/// with the given mean and std ([N,C] or [C]). Population variance.
torch::Tensor adain(const torch::Tensor& content, const torch::Tensor& style_mean,
                    const torch::Tensor& style_std, double eps = 1e-5);

/// Contrastive style loss over L2-normalised codes.
///   anchor, positive: [D] or [B,D];  negatives: [m,D] or [B,m,D]
/// Batched inputs return the mean over the batch.
torch::Tensor csl_loss(const torch::Tensor& anchor, const torch::Tensor& positive,
                       const torch::Tensor& negatives, double temperature);

struct StyleStageConfig {
  int resolution = 64;
  int base_channels = 32;
  int style_dim = 128;
  int residual_blocks = 2;
  int disc_base_channels = 32;
  double temperature = 0.07;
  int num_negatives = 15;
  double w_adv = 1.0;
  double w_csl = 1.0;
  double w_fm = 1.0;
  /// pixel L1 to the paired target
  double w_rec = 10.0;
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int epochs = 5;
  int batch_size = 8;
  std::uint64_t seed = 1;

  void validate() const;
  std::string to_json() const;
  static StyleStageConfig from_json(const std::string& text);
};

/// Strided convolutions and global average pooling to a style_dim code.
struct StyleEncoderImpl : torch::nn::Module {
  StyleEncoderImpl(int base_channels, int style_dim);
  /// [N,1,H,W] -> [N,style_dim]
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Sequential body{nullptr};
};
TORCH_MODULE(StyleEncoder);

struct ResidualBlock2DImpl : torch::nn::Module {
  explicit ResidualBlock2DImpl(int64_t channels);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr};
  torch::nn::InstanceNorm2d norm1{nullptr}, norm2{nullptr};
};
TORCH_MODULE(ResidualBlock2D);

/// Content encoder (three strided conv + instance-norm blocks), residual
/// bottleneck, and an upsampling decoder whose every block is modulated by
/// AdaIN with statistics from affine heads on the style code.
struct StyleGeneratorImpl : torch::nn::Module {
  StyleGeneratorImpl(int base_channels, int style_dim, int residual_blocks);

  /// content [N,1,H,W] in {0,1}; code [N,style_dim] -> [N,1,H,W] in [0,1]
  torch::Tensor forward(const torch::Tensor& content, const torch::Tensor& code);

  std::vector<torch::nn::Conv2d> enc_conv;
  std::vector<torch::nn::InstanceNorm2d> enc_norm;
  torch::nn::Sequential residual{nullptr};
  std::vector<torch::nn::Conv2d> dec_conv;
  std::vector<torch::nn::Linear> style_heads;
  torch::nn::Conv2d head{nullptr};
};
TORCH_MODULE(StyleGenerator);

/// Encoder plus generator, the part saved in a checkpoint.
struct StyleNetImpl : torch::nn::Module {
  explicit StyleNetImpl(const StyleStageConfig& cfg);

  torch::Tensor encode(const torch::Tensor& x) { return encoder(x); }
  torch::Tensor forward(const torch::Tensor& content, const torch::Tensor& exemplar) {
    return generator(content, encoder(exemplar));
  }

  StyleEncoder encoder{nullptr};
  StyleGenerator generator{nullptr};
};
TORCH_MODULE(StyleNet);

/// Real z-mean exemplars grouped by print-region category.
class ExemplarPool {
 public:
  static constexpr std::array<Category, 4> kCategories = {Category::kUpper, Category::kMiddle,
                                                          Category::kLower, Category::kFull};

  void add(Category c, Image2D img);
  const std::vector<Image2D>& get(Category c) const;
  std::size_t total() const;

  /// Every category non-empty, every exemplar at one resolution.
  void validate(std::size_t min_per_category = 1) const;
  /// Deterministic choice of one exemplar of category `c`.
  const Image2D& pick(Category c, std::uint64_t seed) const;

  /// One "exemplars_<category>.p2v" stack per category.
  void save(const std::filesystem::path& dir) const;
  static ExemplarPool load(const std::filesystem::path& dir);

 private:
  std::map<Category, std::vector<Image2D>> pools_;
};

/// Category of a style-stage content image, used to choose its exemplar.
Category content_category(const BinaryImage2D& i_m);

class StyleModel {
 public:
  explicit StyleModel(const StyleStageConfig& cfg);

  const StyleStageConfig& config() const { return cfg_; }
  StyleNet& net() { return net_; }

  /// Eval-mode style code.
  std::vector<float> style_encode(const Image2D& img) const;
  /// Eval-mode G_S(I_M, exemplar). Both inputs at the configured resolution.
  Image2D transfer(const BinaryImage2D& i_m, const Image2D& exemplar) const;

  void save(const std::filesystem::path& path) const;
  static StyleModel load(const std::filesystem::path& path);

 private:
  StyleStageConfig cfg_;
  mutable StyleNet net_;
};

struct StylePair {
  BinaryImage2D print;  // I_M
  Image2D target;       // paired z-mean
};

struct StyleTrainResult {
  StyleModel model;
  /// generator total; components loss_adv, loss_csl, loss_fm, loss_rec, loss_d
  LossLog log;
};

/// Each pair's own target is the style exemplar and the CSL positive; the
/// negatives are other pool exemplars.
StyleTrainResult train_style_stage(const std::vector<StylePair>& pairs, const ExemplarPool& pool,
                                   const StyleStageConfig& cfg);

}  // namespace octsynth
