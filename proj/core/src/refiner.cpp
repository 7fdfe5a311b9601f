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

#include "octsynth/refiner.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "octsynth/error.hpp"
#include "octsynth/rng.hpp"

namespace octsynth {
namespace {

namespace F = torch::nn::functional;
namespace nn = torch::nn;
using json = nlohmann::json;

void check_same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
  if (a.sizes() != b.sizes()) throw ValidationError(std::string(what) + ": shape mismatch");
}

struct AxisConv {
  int64_t kernel, stride, padding;
};

AxisConv axis_conv(int n) { return n >= 2 ? AxisConv{4, 2, 1} : AxisConv{3, 1, 1}; }

}  // namespace

// --- adversarial primitives --------------------------------------------------------

torch::Tensor adversarial_loss_g(const torch::Tensor& d_fake) {
  return F::binary_cross_entropy_with_logits(d_fake, torch::ones_like(d_fake));
}

torch::Tensor adversarial_loss_d(const torch::Tensor& d_real, const torch::Tensor& d_fake) {
  return F::binary_cross_entropy_with_logits(d_real, torch::ones_like(d_real)) +
         F::binary_cross_entropy_with_logits(d_fake, torch::zeros_like(d_fake));
}

torch::Tensor l1_fidelity(const torch::Tensor& v_real, const torch::Tensor& v_r) {
  check_same_shape(v_real, v_r, "l1_fidelity");
  return (v_real - v_r).abs().mean();
}

double l1_fidelity(const Volume3D& v_real, const Volume3D& v_r) {
  if (!v_real.same_shape(v_r)) throw ValidationError("l1_fidelity: shape mismatch");
  double sum = 0.0;
  auto a = v_real.values();
  auto b = v_r.values();
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(static_cast<double>(a[i]) - b[i]);
  return sum / static_cast<double>(a.size());
}

torch::Tensor refiner_objective(const torch::Tensor& d_fake, const torch::Tensor& v_real,
                                const torch::Tensor& v_r, double alpha) {
  if (alpha < 0.0) throw ValidationError("alpha must be >= 0");
  return adversarial_loss_g(d_fake) + alpha * l1_fidelity(v_real, v_r);
}

// --- patch discriminators ----------------------------------------------------------------

int patch_axis_step(int n) {
  const auto c = axis_conv(n);
  return static_cast<int>((n + 2 * c.padding - c.kernel) / c.stride + 1);
}

std::array<int, 3> patch_grid_3d(int depth, int height, int width) {
  std::array<int, 3> g = {depth, height, width};
  for (int layer = 0; layer < 4; ++layer) {
    for (auto& n : g) n = patch_axis_step(n);
  }
  return g;
}

std::array<int, 2> patch_grid_2d(int height, int width) {
  auto g = patch_grid_3d(1, height, width);
  return {g[1], g[2]};
}

PatchDiscriminator3DImpl::PatchDiscriminator3DImpl(int depth, int height, int width,
                                                   int base_channels, int in_channels)
    : input_shape{depth, height, width} {
  if (depth < 1 || height < 16 || width < 16) {
    throw ValidationError("patch discriminator input too small");
  }
  layers = register_module("layers", nn::ModuleList());
  std::array<int, 3> n = input_shape;
  int64_t in = in_channels;
  for (int k = 0; k < 4; ++k) {
    const int64_t out = static_cast<int64_t>(base_channels) << k;
    const auto cd = axis_conv(n[0]), ch = axis_conv(n[1]), cw = axis_conv(n[2]);
    nn::Sequential block(nn::Conv3d(nn::Conv3dOptions(in, out, {cd.kernel, ch.kernel, cw.kernel})
                                        .stride({cd.stride, ch.stride, cw.stride})
                                        .padding({cd.padding, ch.padding, cw.padding})));
    if (k > 0) block->push_back(nn::BatchNorm3d(out));
    block->push_back(nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)));
    layers->push_back(block);
    for (auto& v : n) v = patch_axis_step(v);
    in = out;
  }
  projection = register_module("projection", nn::Conv3d(nn::Conv3dOptions(in, 1, 3).padding(1)));
}

torch::Tensor PatchDiscriminator3DImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 5 || x.size(2) != input_shape[0] || x.size(3) != input_shape[1] ||
      x.size(4) != input_shape[2]) {
    throw ValidationError("patch discriminator built for a different input shape");
  }
  torch::Tensor h = x;
  for (const auto& layer : *layers) h = layer->as<nn::Sequential>()->forward(h);
  return projection(h);
}

PatchDiscriminator2DImpl::PatchDiscriminator2DImpl(int height, int width, int base_channels,
                                                   int in_channels) {
  if (height < 16 || width < 16) throw ValidationError("patch discriminator input too small");
  layers = register_module("layers", nn::ModuleList());
  int64_t in = in_channels;
  for (int k = 0; k < 4; ++k) {
    const int64_t out = static_cast<int64_t>(base_channels) << k;
    nn::Sequential block(nn::Conv2d(nn::Conv2dOptions(in, out, 4).stride(2).padding(1)));
    if (k > 0) block->push_back(nn::InstanceNorm2d(instance_norm2d(out)));
    block->push_back(nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)));
    layers->push_back(block);
    in = out;
  }
  projection = register_module("projection", nn::Conv2d(nn::Conv2dOptions(in, 1, 3).padding(1)));
}

std::pair<torch::Tensor, std::vector<torch::Tensor>>
PatchDiscriminator2DImpl::forward_with_features(const torch::Tensor& x) {
  std::vector<torch::Tensor> feats;
  torch::Tensor h = x;
  for (const auto& layer : *layers) {
    h = layer->as<nn::Sequential>()->forward(h);
    feats.push_back(h);
  }
  return {projection(h), std::move(feats)};
}

torch::Tensor PatchDiscriminator2DImpl::forward(const torch::Tensor& x) {
  return forward_with_features(x).first;
}

// --- refiner generator -------------------------------------------------------------------

void RefinerConfig::validate() const {
  if (depth < 1 || height < 16 || width < 16) throw ValidationError("refiner volume too small");
  if (base_channels < 1 || disc_base_channels < 1) throw ValidationError("channels must be >= 1");
  if (alpha < 0.0) throw ValidationError("alpha must be >= 0");
  if (!(learning_rate > 0.0) || beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw ValidationError("invalid refiner optimiser settings");
  }
  if (epochs < 0 || batch_size < 1) throw ValidationError("invalid refiner schedule");
}

std::string RefinerConfig::to_json() const {
  json j = {{"depth", depth},
            {"height", height},
            {"width", width},
            {"base_channels", base_channels},
            {"disc_base_channels", disc_base_channels},
            {"conditional", conditional},
            {"alpha", alpha},
            {"learning_rate", learning_rate},
            {"beta1", beta1},
            {"beta2", beta2},
            {"epochs", epochs},
            {"batch_size", batch_size},
            {"seed", seed}};
  return j.dump();
}

RefinerConfig RefinerConfig::from_json(const std::string& text) {
  RefinerConfig c;
  try {
    const json j = json::parse(text);
    c.depth = j.value("depth", c.depth);
    c.height = j.value("height", c.height);
    c.width = j.value("width", c.width);
    c.base_channels = j.value("base_channels", c.base_channels);
    c.disc_base_channels = j.value("disc_base_channels", c.disc_base_channels);
    c.conditional = j.value("conditional", c.conditional);
    c.alpha = j.value("alpha", c.alpha);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("refiner config: ") + e.what());
  }
  c.validate();
  return c;
}

ConvBlock3DImpl::ConvBlock3DImpl(int64_t in, int64_t out) {
  conv1 = register_module("conv1", nn::Conv3d(nn::Conv3dOptions(in, out, 3).padding(1)));
  bn1 = register_module("bn1", nn::BatchNorm3d(out));
  conv2 = register_module("conv2", nn::Conv3d(nn::Conv3dOptions(out, out, 3).padding(1)));
  bn2 = register_module("bn2", nn::BatchNorm3d(out));
}

torch::Tensor ConvBlock3DImpl::forward(const torch::Tensor& x) {
  return torch::relu(bn2(conv2(torch::relu(bn1(conv1(x))))));
}

RefinerGeneratorImpl::RefinerGeneratorImpl(int base_channels) {
  const int64_t b = base_channels;
  int64_t in = 1;
  for (int i = 0; i < 3; ++i) {
    const int64_t out = b << i;
    enc.push_back(register_module("enc" + std::to_string(i), ConvBlock3D(in, out)));
    in = out;
  }
  bottleneck = register_module("bottleneck", ConvBlock3D(in, b << 3));
  in = b << 3;
  for (int i = 2; i >= 0; --i) {
    const int64_t out = b << i;
    up.push_back(register_module("up" + std::to_string(i),
                                 nn::ConvTranspose3d(nn::ConvTranspose3dOptions(in, out, 2).stride(2))));
    dec.push_back(register_module("dec" + std::to_string(i), ConvBlock3D(2 * out, out)));
    in = out;
  }
  head = register_module("head", nn::Conv3d(nn::Conv3dOptions(b + 1, 1, 1)));
}

torch::Tensor RefinerGeneratorImpl::forward(const torch::Tensor& v_e) {
  std::vector<torch::Tensor> skips;
  torch::Tensor h = v_e;
  for (auto& block : enc) {
    h = block(h);
    skips.push_back(h);
    const int64_t kd = h.size(2) >= 2 ? 2 : 1;
    h = F::max_pool3d(h, F::MaxPool3dFuncOptions({kd, 2, 2}));
  }
  h = bottleneck(h);
  for (std::size_t i = 0; i < up.size(); ++i) {
    h = up[i](h);
    const auto& skip = skips[skips.size() - 1 - i];
    if (h.sizes().slice(2) != skip.sizes().slice(2)) {
      h = F::interpolate(h, F::InterpolateFuncOptions()
                                .size(std::vector<int64_t>(skip.sizes().slice(2).vec()))
                                .mode(torch::kTrilinear)
                                .align_corners(false));
    }
    h = dec[i](torch::cat({h, skip}, 1));
  }
  return torch::sigmoid(head(torch::cat({h, v_e}, 1)));
}

// --- model ------------------------------------------------------------------------------

RefinerModel::RefinerModel(const RefinerConfig& cfg) : cfg_(cfg), gen_(nullptr) {
  cfg_.validate();
  gen_ = RefinerGenerator(cfg_.base_channels);
  gen_->eval();
}

Volume3D RefinerModel::refine(const Volume3D& v_e) const {
  if (v_e.depth() != cfg_.depth || v_e.height() != cfg_.height || v_e.width() != cfg_.width) {
    throw ValidationError("refiner expects " + std::to_string(cfg_.depth) + "x" +
                          std::to_string(cfg_.height) + "x" + std::to_string(cfg_.width) +
                          ", got " + v_e.shape_string());
  }
  torch::NoGradGuard no_grad;
  return volume_from_tensor(gen_->forward(to_tensor(v_e)), cfg_.depth, cfg_.height, cfg_.width);
}

void RefinerModel::save(const std::filesystem::path& path) const {
  write_checkpoint(capture_checkpoint(*gen_, "refiner", cfg_.to_json()), path);
}

RefinerModel RefinerModel::load(const std::filesystem::path& path) {
  const auto ckpt = read_checkpoint(path, "refiner");
  RefinerModel m(RefinerConfig::from_json(ckpt.config_json));
  restore_checkpoint(*m.gen_, ckpt);
  return m;
}

// --- training ---------------------------------------------------------------------------

RefinerTrainResult train_refiner(const std::vector<RefinerPair>& pairs, const RefinerConfig& cfg) {
  cfg.validate();
  if (pairs.empty()) throw ValidationError("refiner training needs at least one pair");
  std::vector<torch::Tensor> xs, ys;
  for (const auto& p : pairs) {
    if (!p.structural.same_shape(p.real) || p.real.depth() != cfg.depth ||
        p.real.height() != cfg.height || p.real.width() != cfg.width) {
      throw ValidationError("refiner pair shape " + p.real.shape_string() +
                            " does not match the configuration");
    }
    xs.push_back(to_tensor(p.structural));
    ys.push_back(to_tensor(p.real));
  }
  const auto x_all = torch::cat(xs, 0);
  const auto y_all = torch::cat(ys, 0);

  seed_everything(cfg.seed);
  RefinerModel model(cfg);
  auto gen = model.generator();
  PatchDiscriminator3D disc(cfg.depth, cfg.height, cfg.width, cfg.disc_base_channels,
                            cfg.conditional ? 2 : 1);
  const auto adam = torch::optim::AdamOptions(cfg.learning_rate).betas({cfg.beta1, cfg.beta2});
  torch::optim::Adam opt_g(gen->parameters(), adam);
  torch::optim::Adam opt_d(disc->parameters(), adam);

  auto d_input = [&](const torch::Tensor& v, const torch::Tensor& cond) {
    return cfg.conditional ? torch::cat({v, cond}, 1) : v;
  };

  LossLog log({"loss_g_adv", "loss_l1", "loss_d"});
  std::vector<int64_t> order(pairs.size());
  gen->train();
  disc->train();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), rng);
    MeanAccumulator total, adv, l1, dl;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const auto end = std::min(order.size(), start + cfg.batch_size);
      const auto idx = torch::tensor(std::vector<int64_t>(order.begin() + static_cast<long>(start),
                                                          order.begin() + static_cast<long>(end)),
                                     torch::kInt64);
      const auto x = x_all.index_select(0, idx);
      const auto y = y_all.index_select(0, idx);

      auto fake = gen->forward(x);
      auto loss_d = adversarial_loss_d(disc->forward(d_input(y, x)),
                                       disc->forward(d_input(fake.detach(), x)));
      opt_d.zero_grad();
      loss_d.backward();
      opt_d.step();

      auto loss_adv = adversarial_loss_g(disc->forward(d_input(fake, x)));
      auto loss_l1 = l1_fidelity(y, fake);
      auto loss_g = loss_adv + cfg.alpha * loss_l1;
      opt_g.zero_grad();
      loss_g.backward();
      opt_g.step();

      total.add(loss_g.item<double>());
      adv.add(loss_adv.item<double>());
      l1.add(loss_l1.item<double>());
      dl.add(loss_d.item<double>());
    }
    log.add_epoch(total.mean(), {adv.mean(), l1.mean(), dl.mean()});
  }
  gen->eval();
  return {std::move(model), std::move(log)};
}

}  // namespace octsynth
