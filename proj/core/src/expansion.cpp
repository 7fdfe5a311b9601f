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

#include "octsynth/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "octsynth/error.hpp"
#include "octsynth/metrics.hpp"
#include "octsynth/rng.hpp"

namespace octsynth {
namespace {

namespace F = torch::nn::functional;
namespace nn = torch::nn;
using json = nlohmann::json;

std::pair<torch::Tensor, torch::Tensor> loss_terms(const torch::Tensor& v_pred,
                                                   const torch::Tensor& v_real, double eps) {
  const auto p = v_pred.clamp(eps, 1.0 - eps);
  auto bce = -(v_real * torch::log(p) + (1.0 - v_real) * torch::log(1.0 - p)).mean();
  auto ssim_term = 1.0 - ssim_tensor(v_pred, v_real, SsimOptions::volume());
  return {bce, ssim_term};
}

}  // namespace

ExpansionConfig ExpansionConfig::desk() {
  ExpansionConfig c;
  c.depth = 8;
  c.height = 64;
  c.width = 64;
  c.base_channels = 16;
  return c;
}

void ExpansionConfig::validate() const {
  if (depth < 8 || height < 8 || width < 8) throw ValidationError("expansion D, H, W must be >= 8");
  if (height % 16 != 0 || width % 16 != 0) {
    throw ValidationError("expansion H and W must be divisible by 16");
  }
  if (static_cast<int>(channel_multipliers.size()) != kLevels) {
    throw ValidationError("expansion needs exactly four channel multipliers");
  }
  if (base_channels < 1 || bottleneck_multiplier < 1 ||
      std::any_of(channel_multipliers.begin(), channel_multipliers.end(),
                  [](int m) { return m < 1; })) {
    throw ValidationError("expansion channel counts must be positive");
  }
  if (!(learning_rate > 0.0) || beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw ValidationError("invalid expansion optimiser settings");
  }
  if (epochs < 0 || batch_size < 1) throw ValidationError("invalid expansion schedule");
}

std::string ExpansionConfig::to_json() const {
  json j = {{"depth", depth},
            {"height", height},
            {"width", width},
            {"base_channels", base_channels},
            {"channel_multipliers", channel_multipliers},
            {"bottleneck_multiplier", bottleneck_multiplier},
            {"learning_rate", learning_rate},
            {"beta1", beta1},
            {"beta2", beta2},
            {"epochs", epochs},
            {"batch_size", batch_size},
            {"seed", seed}};
  return j.dump();
}

ExpansionConfig ExpansionConfig::from_json(const std::string& text) {
  ExpansionConfig c;
  try {
    const json j = json::parse(text);
    c.depth = j.value("depth", c.depth);
    c.height = j.value("height", c.height);
    c.width = j.value("width", c.width);
    c.base_channels = j.value("base_channels", c.base_channels);
    c.channel_multipliers = j.value("channel_multipliers", c.channel_multipliers);
    c.bottleneck_multiplier = j.value("bottleneck_multiplier", c.bottleneck_multiplier);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("expansion config: ") + e.what());
  }
  c.validate();
  return c;
}

// --- building blocks -----------------------------------------------------------------

ConvBlock2DImpl::ConvBlock2DImpl(int64_t in, int64_t out) {
  conv1 = register_module("conv1", nn::Conv2d(nn::Conv2dOptions(in, out, 3).padding(1)));
  norm1 = register_module("norm1", nn::InstanceNorm2d(instance_norm2d(out)));
  conv2 = register_module("conv2", nn::Conv2d(nn::Conv2dOptions(out, out, 3).padding(1)));
  norm2 = register_module("norm2", nn::InstanceNorm2d(instance_norm2d(out)));
}

torch::Tensor ConvBlock2DImpl::forward(const torch::Tensor& x) {
  return torch::relu(norm2(conv2(torch::relu(norm1(conv1(x))))));
}

ConvBlock3DINImpl::ConvBlock3DINImpl(int64_t in, int64_t out) {
  conv1 = register_module("conv1", nn::Conv3d(nn::Conv3dOptions(in, out, 3).padding(1)));
  norm1 = register_module("norm1", nn::InstanceNorm3d(instance_norm3d(out)));
  conv2 = register_module("conv2", nn::Conv3d(nn::Conv3dOptions(out, out, 3).padding(1)));
  norm2 = register_module("norm2", nn::InstanceNorm3d(instance_norm3d(out)));
}

torch::Tensor ConvBlock3DINImpl::forward(const torch::Tensor& x) {
  return torch::relu(norm2(conv2(torch::relu(norm1(conv1(x))))));
}

Lift2DTo3DImpl::Lift2DTo3DImpl(int64_t in, int64_t out) {
  conv = register_module("conv", nn::Conv3d(nn::Conv3dOptions(in, out, 3).padding(1)));
  norm = register_module("norm", nn::InstanceNorm3d(instance_norm3d(out)));
}

torch::Tensor Lift2DTo3DImpl::forward(const torch::Tensor& x) {
  return torch::relu(norm(conv(x.unsqueeze(2))));
}

torch::Tensor broadcast_skip(const torch::Tensor& features, int64_t d, int64_t h, int64_t w) {
  if (features.dim() != 4) throw ValidationError("broadcast_skip expects [N,C,h,w]");
  if (d < 1 || h < 1 || w < 1) throw ValidationError("broadcast_skip target must be positive");
  torch::Tensor plane = features;
  if (features.size(2) != h || features.size(3) != w) {
    // Trilinear on a unit-depth volume is bilinear in (h, w).
    plane = F::interpolate(features.unsqueeze(2),
                           F::InterpolateFuncOptions()
                               .size(std::vector<int64_t>{1, h, w})
                               .mode(torch::kTrilinear)
                               .align_corners(false))
                .squeeze(2);
  }
  return plane.unsqueeze(2).expand({plane.size(0), plane.size(1), d, h, w}).contiguous();
}

// --- network ----------------------------------------------------------------------------

ExpansionNetImpl::ExpansionNetImpl(const ExpansionConfig& cfg)
    : depth(cfg.depth), height(cfg.height), width(cfg.width) {
  cfg.validate();
  const int64_t b = cfg.base_channels;
  std::vector<int64_t> ch;
  for (int m : cfg.channel_multipliers) ch.push_back(b * m);
  int64_t in = 1;
  for (int i = 0; i < ExpansionConfig::kLevels; ++i) {
    enc.push_back(register_module("enc" + std::to_string(i), ConvBlock2D(in, ch[i])));
    in = ch[i];
  }
  const int64_t bott = b * cfg.bottleneck_multiplier;
  bottleneck = register_module("bottleneck", ConvBlock2D(in, bott));
  lift = register_module("lift", Lift2DTo3D(bott, bott));
  in = bott;
  for (int i = ExpansionConfig::kLevels - 1; i >= 0; --i) {
    up.push_back(register_module(
        "up" + std::to_string(i),
        nn::ConvTranspose3d(nn::ConvTranspose3dOptions(in, ch[i], 4).stride(2).padding(1))));
    dec.push_back(register_module("dec" + std::to_string(i), ConvBlock3DIN(2 * ch[i], ch[i])));
    in = ch[i];
  }
  head = register_module("head", nn::Conv3d(nn::Conv3dOptions(in, 1, 1)));
}

std::vector<int64_t> ExpansionNetImpl::depth_trajectory() const {
  std::vector<int64_t> t;
  int64_t d = 1;
  for (std::size_t i = 0; i < up.size(); ++i) t.push_back(d *= 2);
  return t;
}

torch::Tensor ExpansionNetImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 4 || x.size(1) != 1 || x.size(2) != height || x.size(3) != width) {
    throw ValidationError("expansion input must be [N,1," + std::to_string(height) + "," +
                          std::to_string(width) + "]");
  }
  std::vector<torch::Tensor> skips;
  torch::Tensor h = x;
  for (auto& block : enc) {
    h = block(h);
    skips.push_back(h);
    h = F::max_pool2d(h, F::MaxPool2dFuncOptions(2));
  }
  h = lift(bottleneck(h));
  for (std::size_t i = 0; i < up.size(); ++i) {
    h = up[i](h);
    const auto& skip = skips[skips.size() - 1 - i];
    h = dec[i](torch::cat({h, broadcast_skip(skip, h.size(2), h.size(3), h.size(4))}, 1));
  }
  h = F::interpolate(h, F::InterpolateFuncOptions()
                            .size(std::vector<int64_t>{depth, height, width})
                            .mode(torch::kTrilinear)
                            .align_corners(false));
  return torch::sigmoid(head(h));
}

// --- loss -------------------------------------------------------------------------------

torch::Tensor expansion_loss(const torch::Tensor& v_pred, const torch::Tensor& v_real, double eps) {
  if (v_pred.sizes() != v_real.sizes()) throw ValidationError("expansion_loss: shape mismatch");
  if (v_pred.dim() != 5) throw ValidationError("expansion_loss expects [N,1,D,H,W]");
  auto [bce, ssim_term] = loss_terms(v_pred, v_real, eps);
  return bce + ssim_term;
}

double expansion_loss(const Volume3D& v_pred, const Volume3D& v_real) {
  if (!v_pred.same_shape(v_real)) throw ValidationError("expansion_loss: shape mismatch");
  torch::NoGradGuard no_grad;
  return expansion_loss(to_tensor(v_pred).to(torch::kFloat64), to_tensor(v_real).to(torch::kFloat64))
      .item<double>();
}

// --- model ------------------------------------------------------------------------------

ExpansionModel::ExpansionModel(const ExpansionConfig& cfg) : cfg_(cfg), net_(nullptr) {
  cfg_.validate();
  net_ = ExpansionNet(cfg_);
  net_->eval();
}

Volume3D ExpansionModel::expand(const Image2D& i_s) const {
  if (i_s.height() != cfg_.height || i_s.width() != cfg_.width) {
    throw ValidationError("expansion expects " + std::to_string(cfg_.height) + "x" +
                          std::to_string(cfg_.width) + " input");
  }
  torch::NoGradGuard no_grad;
  return volume_from_tensor(net_->forward(to_tensor(i_s)), cfg_.depth, cfg_.height, cfg_.width);
}

void ExpansionModel::save(const std::filesystem::path& path) const {
  write_checkpoint(capture_checkpoint(*net_, "expansion", cfg_.to_json()), path);
}

ExpansionModel ExpansionModel::load(const std::filesystem::path& path) {
  const auto ckpt = read_checkpoint(path, "expansion");
  ExpansionModel m(ExpansionConfig::from_json(ckpt.config_json));
  restore_checkpoint(*m.net_, ckpt);
  return m;
}

// --- training ---------------------------------------------------------------------------

ExpansionTrainResult train_expansion(const std::vector<ExpansionPair>& pairs,
                                     const ExpansionConfig& cfg) {
  cfg.validate();
  if (pairs.empty()) throw ValidationError("expansion training needs at least one pair");
  std::vector<torch::Tensor> xs, ys;
  for (const auto& p : pairs) {
    if (p.image.height() != cfg.height || p.image.width() != cfg.width ||
        p.volume.depth() != cfg.depth || p.volume.height() != cfg.height ||
        p.volume.width() != cfg.width) {
      throw ValidationError("expansion pair does not match the configured shape");
    }
    xs.push_back(to_tensor(p.image));
    ys.push_back(to_tensor(p.volume));
  }
  const auto x_all = torch::cat(xs, 0);
  const auto y_all = torch::cat(ys, 0);

  seed_everything(cfg.seed);
  ExpansionModel model(cfg);
  auto net = model.net();
  torch::optim::Adam opt(net->parameters(), torch::optim::AdamOptions(cfg.learning_rate)
                                                .betas({cfg.beta1, cfg.beta2}));
  LossLog log({"loss_bce", "loss_ssim"});
  std::vector<int64_t> order(pairs.size());
  net->train();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), rng);
    MeanAccumulator total, bce, ssim_term;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const auto end = std::min(order.size(), start + cfg.batch_size);
      const auto idx = torch::tensor(std::vector<int64_t>(order.begin() + static_cast<long>(start),
                                                          order.begin() + static_cast<long>(end)),
                                     torch::kInt64);
      const auto x = x_all.index_select(0, idx);
      const auto y = y_all.index_select(0, idx);
      auto pred = net->forward(x);
      auto [loss_bce, loss_ssim] = loss_terms(pred, y, 1e-7);
      auto loss = loss_bce + loss_ssim;
      opt.zero_grad();
      loss.backward();
      opt.step();
      total.add(loss.item<double>());
      bce.add(loss_bce.item<double>());
      ssim_term.add(loss_ssim.item<double>());
    }
    log.add_epoch(total.mean(), {bce.mean(), ssim_term.mean()});
  }
  net->eval();
  return {std::move(model), std::move(log)};
}

}  // namespace octsynth
