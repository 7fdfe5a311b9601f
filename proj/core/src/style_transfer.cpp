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

#include "octsynth/style_transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "octsynth/error.hpp"
#include "octsynth/refiner.hpp"
#include "octsynth/rng.hpp"

namespace octsynth {
namespace {

namespace F = torch::nn::functional;
namespace nn = torch::nn;
using json = nlohmann::json;

// softplus(kStdBias) = 1, so an untrained head starts near unit std.
constexpr double kStdBias = 0.5413248546129181;

}  // namespace

torch::Tensor adain(const torch::Tensor& content, const torch::Tensor& style_mean,
                    const torch::Tensor& style_std, double eps) {
  if (!(eps > 0.0)) throw ValidationError("adain eps must be positive");
  if (style_mean.sizes() != style_std.sizes()) {
    throw ValidationError("adain style mean and std differ in shape");
  }
  const bool batched = style_mean.dim() == 2;
  if (!batched && style_mean.dim() != 1) throw ValidationError("adain style stats must be [C] or [N,C]");
  const auto x = batched ? content : content.unsqueeze(0);
  const auto mean = batched ? style_mean : style_mean.unsqueeze(0);
  const auto stddev = batched ? style_std : style_std.unsqueeze(0);
  if (x.dim() < 3 || x.size(0) != mean.size(0) || x.size(1) != mean.size(1)) {
    throw ValidationError("adain content and style stats disagree on channels");
  }
  const auto flat = x.flatten(2);
  const auto mu = flat.mean(2, true);
  const auto var = (flat - mu).pow(2).mean(2, true);
  const auto out = (flat - mu) / torch::sqrt(var + eps) * stddev.unsqueeze(2) + mean.unsqueeze(2);
  return out.reshape(content.sizes());
}

torch::Tensor csl_loss(const torch::Tensor& anchor, const torch::Tensor& positive,
                       const torch::Tensor& negatives, double temperature) {
  if (!(temperature > 0.0)) throw ValidationError("csl temperature must be positive");
  const bool batched = anchor.dim() == 2;
  const auto a = batched ? anchor : anchor.unsqueeze(0);
  const auto p = batched ? positive : positive.unsqueeze(0);
  const auto n = batched ? negatives : negatives.unsqueeze(0);
  if (a.dim() != 2 || p.sizes() != a.sizes() || n.dim() != 3 || n.size(0) != a.size(0) ||
      n.size(2) != a.size(1)) {
    throw ValidationError("csl codes have inconsistent shapes");
  }
  if (n.size(1) < 1) throw ValidationError("csl needs at least one negative");
  const auto norm = F::NormalizeFuncOptions().dim(-1).eps(1e-12);
  const auto za = F::normalize(a, norm);
  const auto zp = F::normalize(p, norm);
  const auto zn = F::normalize(n, norm);
  const auto pos = (za * zp).sum(1, true) / temperature;                    // [B,1]
  const auto neg = torch::bmm(zn, za.unsqueeze(2)).squeeze(2) / temperature;  // [B,m]
  const auto logits = torch::cat({pos, neg}, 1);
  return (torch::logsumexp(logits, 1) - pos.squeeze(1)).mean();
}

// --- config -----------------------------------------------------------------------------

void StyleStageConfig::validate() const {
  if (resolution < 16 || resolution % 8 != 0) {
    throw ValidationError("style resolution must be a multiple of 8 and >= 16");
  }
  if (base_channels < 1 || style_dim < 1 || residual_blocks < 0 || disc_base_channels < 1) {
    throw ValidationError("invalid style network sizes");
  }
  if (!(temperature > 0.0)) throw ValidationError("style temperature must be positive");
  if (num_negatives < 1) throw ValidationError("style stage needs at least one negative");
  if (w_adv < 0.0 || w_csl < 0.0 || w_fm < 0.0 || w_rec < 0.0) {
    throw ValidationError("style loss weights must be >= 0");
  }
  if (!(learning_rate > 0.0) || beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw ValidationError("invalid style optimiser settings");
  }
  if (epochs < 0 || batch_size < 1) throw ValidationError("invalid style schedule");
}

std::string StyleStageConfig::to_json() const {
  json j = {{"resolution", resolution},
            {"base_channels", base_channels},
            {"style_dim", style_dim},
            {"residual_blocks", residual_blocks},
            {"disc_base_channels", disc_base_channels},
            {"temperature", temperature},
            {"num_negatives", num_negatives},
            {"w_adv", w_adv},
            {"w_csl", w_csl},
            {"w_fm", w_fm},
            {"w_rec", w_rec},
            {"learning_rate", learning_rate},
            {"beta1", beta1},
            {"beta2", beta2},
            {"epochs", epochs},
            {"batch_size", batch_size},
            {"seed", seed}};
  return j.dump();
}

StyleStageConfig StyleStageConfig::from_json(const std::string& text) {
  StyleStageConfig c;
  try {
    const json j = json::parse(text);
    c.resolution = j.value("resolution", c.resolution);
    c.base_channels = j.value("base_channels", c.base_channels);
    c.style_dim = j.value("style_dim", c.style_dim);
    c.residual_blocks = j.value("residual_blocks", c.residual_blocks);
    c.disc_base_channels = j.value("disc_base_channels", c.disc_base_channels);
    c.temperature = j.value("temperature", c.temperature);
    c.num_negatives = j.value("num_negatives", c.num_negatives);
    c.w_adv = j.value("w_adv", c.w_adv);
    c.w_csl = j.value("w_csl", c.w_csl);
    c.w_fm = j.value("w_fm", c.w_fm);
    c.w_rec = j.value("w_rec", c.w_rec);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("style config: ") + e.what());
  }
  c.validate();
  return c;
}

// --- networks ---------------------------------------------------------------------------

StyleEncoderImpl::StyleEncoderImpl(int base_channels, int style_dim) {
  const int64_t b = base_channels;
  auto lrelu = [] { return nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)); };
  auto down = [](int64_t in, int64_t out) {
    return nn::Conv2d(nn::Conv2dOptions(in, out, 4).stride(2).padding(1));
  };
  body = register_module(
      "body", nn::Sequential(down(1, b), lrelu(), down(b, 2 * b), nn::BatchNorm2d(2 * b), lrelu(),
                             down(2 * b, 4 * b), nn::BatchNorm2d(4 * b), lrelu(),
                             down(4 * b, style_dim)));
}

torch::Tensor StyleEncoderImpl::forward(const torch::Tensor& x) {
  return body->forward(x).mean({2, 3});
}

ResidualBlock2DImpl::ResidualBlock2DImpl(int64_t channels) {
  conv1 = register_module("conv1", nn::Conv2d(nn::Conv2dOptions(channels, channels, 3).padding(1)));
  norm1 = register_module("norm1", nn::InstanceNorm2d(instance_norm2d(channels)));
  conv2 = register_module("conv2", nn::Conv2d(nn::Conv2dOptions(channels, channels, 3).padding(1)));
  norm2 = register_module("norm2", nn::InstanceNorm2d(instance_norm2d(channels)));
}

torch::Tensor ResidualBlock2DImpl::forward(const torch::Tensor& x) {
  return x + norm2(conv2(torch::relu(norm1(conv1(x)))));
}

StyleGeneratorImpl::StyleGeneratorImpl(int base_channels, int style_dim, int residual_blocks) {
  const int64_t b = base_channels;
  const int64_t enc_ch[] = {b, 2 * b, 4 * b};
  int64_t in = 1;
  for (int i = 0; i < 3; ++i) {
    enc_conv.push_back(register_module(
        "enc_conv" + std::to_string(i),
        nn::Conv2d(nn::Conv2dOptions(in, enc_ch[i], 4).stride(2).padding(1))));
    enc_norm.push_back(register_module("enc_norm" + std::to_string(i),
                                       nn::InstanceNorm2d(instance_norm2d(enc_ch[i]))));
    in = enc_ch[i];
  }
  residual = register_module("residual", nn::Sequential());
  for (int i = 0; i < residual_blocks; ++i) residual->push_back(ResidualBlock2D(in));

  // decoder block j: in -> out, then concatenation with the matching skip
  const int64_t dec_in[] = {4 * b, 4 * b, 2 * b};
  const int64_t dec_out[] = {2 * b, b, b};
  for (int j = 0; j < 3; ++j) {
    dec_conv.push_back(register_module("dec_conv" + std::to_string(j),
                                       nn::Conv2d(nn::Conv2dOptions(dec_in[j], dec_out[j], 3).padding(1))));
    style_heads.push_back(register_module("style_head" + std::to_string(j),
                                          nn::Linear(style_dim, 2 * dec_out[j])));
  }
  head = register_module("head", nn::Conv2d(nn::Conv2dOptions(b + 1, 1, 3).padding(1)));
}

torch::Tensor StyleGeneratorImpl::forward(const torch::Tensor& content, const torch::Tensor& code) {
  if (content.dim() != 4 || content.size(1) != 1 || content.size(2) % 8 != 0 ||
      content.size(3) % 8 != 0) {
    throw ValidationError("style generator expects [N,1,H,W] with H, W divisible by 8");
  }
  std::vector<torch::Tensor> skips;
  torch::Tensor h = content;
  for (std::size_t i = 0; i < enc_conv.size(); ++i) {
    h = torch::relu(enc_norm[i](enc_conv[i](h)));
    skips.push_back(h);
  }
  h = residual->forward(h);
  const torch::Tensor skip_for[] = {skips[1], skips[0], content};
  for (std::size_t j = 0; j < dec_conv.size(); ++j) {
    h = F::interpolate(h, F::InterpolateFuncOptions()
                              .scale_factor(std::vector<double>{2.0, 2.0})
                              .mode(torch::kNearest));
    h = dec_conv[j](h);
    const auto stats = style_heads[j](code);
    const int64_t c = h.size(1);
    const auto mean = stats.slice(1, 0, c);
    const auto stddev = F::softplus(stats.slice(1, c, 2 * c) + kStdBias);
    h = torch::relu(adain(h, mean, stddev));
    h = torch::cat({h, skip_for[j]}, 1);
  }
  return torch::sigmoid(head(h));
}

StyleNetImpl::StyleNetImpl(const StyleStageConfig& cfg) {
  encoder = register_module("encoder", StyleEncoder(cfg.base_channels, cfg.style_dim));
  generator = register_module("generator",
                              StyleGenerator(cfg.base_channels, cfg.style_dim, cfg.residual_blocks));
}

// --- exemplar pool ----------------------------------------------------------------------

void ExemplarPool::add(Category c, Image2D img) { pools_[c].push_back(std::move(img)); }

const std::vector<Image2D>& ExemplarPool::get(Category c) const {
  static const std::vector<Image2D> empty;
  auto it = pools_.find(c);
  return it == pools_.end() ? empty : it->second;
}

std::size_t ExemplarPool::total() const {
  std::size_t n = 0;
  for (const auto& [c, v] : pools_) n += v.size();
  return n;
}

void ExemplarPool::validate(std::size_t min_per_category) const {
  int h = -1, w = -1;
  for (Category c : kCategories) {
    const auto& v = get(c);
    if (v.size() < std::max<std::size_t>(1, min_per_category)) {
      throw ValidationError("exemplar pool category '" + std::string(to_string(c)) +
                            "' has " + std::to_string(v.size()) + " exemplars");
    }
    for (const auto& img : v) {
      if (h < 0) {
        h = img.height();
        w = img.width();
      } else if (img.height() != h || img.width() != w) {
        throw ValidationError("exemplars differ in resolution");
      }
    }
  }
}

const Image2D& ExemplarPool::pick(Category c, std::uint64_t seed) const {
  const auto& v = get(c);
  if (v.empty()) throw ValidationError("no exemplars of category " + std::string(to_string(c)));
  return v[mix64(seed) % v.size()];
}

void ExemplarPool::save(const std::filesystem::path& dir) const {
  for (Category c : kCategories) {
    const auto& v = get(c);
    if (v.empty()) continue;
    Volume3D stack(static_cast<int>(v.size()), v.front().height(), v.front().width());
    auto out = stack.values();
    std::size_t off = 0;
    for (const auto& img : v) {
      std::copy(img.values().begin(), img.values().end(), out.begin() + static_cast<long>(off));
      off += img.size();
    }
    write_volume(stack, dir / ("exemplars_" + std::string(to_string(c)) + ".p2v"));
  }
}

ExemplarPool ExemplarPool::load(const std::filesystem::path& dir) {
  ExemplarPool pool;
  for (Category c : kCategories) {
    const auto path = dir / ("exemplars_" + std::string(to_string(c)) + ".p2v");
    if (!std::filesystem::exists(path)) {
      throw MissingPrerequisiteError("missing exemplar pool file " + path.string());
    }
    const Volume3D stack = read_volume(path);
    for (int k = 0; k < stack.depth(); ++k) {
      const auto n = static_cast<std::size_t>(stack.height()) * stack.width();
      auto first = stack.values().begin() + static_cast<long>(k * n);
      pool.add(c, Image2D(stack.height(), stack.width(), std::vector<float>(first, first + static_cast<long>(n))));
    }
  }
  pool.validate();
  return pool;
}

Category content_category(const BinaryImage2D& i_m) {
  try {
    return region_category(i_m.to_image());
  } catch (const ValidationError&) {
    return Category::kFull;
  }
}

// --- model ------------------------------------------------------------------------------

StyleModel::StyleModel(const StyleStageConfig& cfg) : cfg_(cfg), net_(nullptr) {
  cfg_.validate();
  net_ = StyleNet(cfg_);
  net_->eval();
}

std::vector<float> StyleModel::style_encode(const Image2D& img) const {
  if (img.height() != cfg_.resolution || img.width() != cfg_.resolution) {
    throw ValidationError("style encoder expects the canonical resolution");
  }
  torch::NoGradGuard no_grad;
  auto code = net_->encode(to_tensor(img)).contiguous();
  const float* p = code.data_ptr<float>();
  return std::vector<float>(p, p + code.numel());
}

Image2D StyleModel::transfer(const BinaryImage2D& i_m, const Image2D& exemplar) const {
  const int r = cfg_.resolution;
  if (i_m.height() != r || i_m.width() != r || exemplar.height() != r || exemplar.width() != r) {
    throw ValidationError("style transfer expects " + std::to_string(r) + "x" + std::to_string(r) +
                          " inputs");
  }
  torch::NoGradGuard no_grad;
  return image_from_tensor(net_->forward(to_tensor(i_m), to_tensor(exemplar)), r, r);
}

void StyleModel::save(const std::filesystem::path& path) const {
  write_checkpoint(capture_checkpoint(*net_, "style", cfg_.to_json()), path);
}

StyleModel StyleModel::load(const std::filesystem::path& path) {
  const auto ckpt = read_checkpoint(path, "style");
  StyleModel m(StyleStageConfig::from_json(ckpt.config_json));
  restore_checkpoint(*m.net_, ckpt);
  return m;
}

// --- training ---------------------------------------------------------------------------

StyleTrainResult train_style_stage(const std::vector<StylePair>& pairs, const ExemplarPool& pool,
                                   const StyleStageConfig& cfg) {
  cfg.validate();
  if (pairs.empty()) throw ValidationError("style training needs at least one pair");
  pool.validate();
  const int r = cfg.resolution;
  if (pool.get(Category::kFull).front().height() != r) {
    throw ValidationError("exemplars are not at the canonical resolution");
  }
  if (pool.total() < 2) throw ValidationError("exemplar pool needs at least two images");

  std::vector<torch::Tensor> cs, ts;
  for (const auto& p : pairs) {
    if (p.print.height() != r || p.print.width() != r || p.target.height() != r ||
        p.target.width() != r) {
      throw ValidationError("style pair is not at the canonical resolution");
    }
    cs.push_back(to_tensor(p.print));
    ts.push_back(to_tensor(p.target));
  }
  const auto content_all = torch::cat(cs, 0);
  const auto target_all = torch::cat(ts, 0);

  std::vector<torch::Tensor> ex;
  for (Category c : ExemplarPool::kCategories) {
    for (const auto& img : pool.get(c)) ex.push_back(to_tensor(img));
  }
  const auto ex_all = torch::cat(ex, 0);
  const int64_t n_ex = ex_all.size(0);
  // A pair's own target is its positive; when it also sits in the pool it
  // must not be drawn as a negative.
  std::vector<int64_t> self_index(pairs.size(), -1);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (int64_t k = 0; k < n_ex; ++k) {
      if (torch::equal(ts[i][0], ex[static_cast<std::size_t>(k)][0])) {
        self_index[i] = k;
        break;
      }
    }
  }
  const int64_t m = std::min<int64_t>(cfg.num_negatives, n_ex - 1);

  seed_everything(cfg.seed);
  StyleModel model(cfg);
  auto net = model.net();
  PatchDiscriminator2D disc(r, r, cfg.disc_base_channels);
  const auto adam = torch::optim::AdamOptions(cfg.learning_rate).betas({cfg.beta1, cfg.beta2});
  torch::optim::Adam opt_g(net->parameters(), adam);
  torch::optim::Adam opt_d(disc->parameters(), adam);

  LossLog log({"loss_adv", "loss_csl", "loss_fm", "loss_rec", "loss_d"});
  std::vector<int64_t> order(pairs.size());
  std::vector<int64_t> candidates(static_cast<std::size_t>(n_ex));
  net->train();
  disc->train();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), rng);
    MeanAccumulator total, adv_m, csl_m, fm_m, rec_m, d_m;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const auto end = std::min(order.size(), start + cfg.batch_size);
      std::vector<int64_t> batch(order.begin() + static_cast<long>(start),
                                 order.begin() + static_cast<long>(end));
      std::vector<int64_t> neg_pick;
      for (int64_t i : batch) {
        candidates.resize(static_cast<std::size_t>(n_ex));
        std::iota(candidates.begin(), candidates.end(), 0);
        const int64_t self = self_index[static_cast<std::size_t>(i)];
        candidates.erase(candidates.begin() + (self >= 0 ? self : n_ex - 1));
        std::shuffle(candidates.begin(), candidates.end(), rng);
        neg_pick.insert(neg_pick.end(), candidates.begin(), candidates.begin() + m);
      }
      const auto idx = torch::tensor(batch, torch::kInt64);
      const auto content = content_all.index_select(0, idx);
      const auto target = target_all.index_select(0, idx);
      const auto& exemplar = target;
      const auto negatives = ex_all.index_select(0, torch::tensor(neg_pick, torch::kInt64));
      const auto bsz = static_cast<int64_t>(batch.size());

      const auto code_ex = net->encode(exemplar);
      auto fake = net->generator(content, code_ex);

      auto loss_d = adversarial_loss_d(disc->forward(target), disc->forward(fake.detach()));
      opt_d.zero_grad();
      loss_d.backward();
      opt_d.step();

      auto [d_fake, feat_fake] = disc->forward_with_features(fake);
      torch::Tensor loss_fm;
      {
        std::vector<torch::Tensor> feat_real;
        {
          torch::NoGradGuard no_grad;
          feat_real = disc->forward_with_features(target).second;
        }
        loss_fm = torch::zeros({}, fake.options());
        for (std::size_t k = 0; k < feat_fake.size(); ++k) {
          loss_fm = loss_fm + (feat_fake[k] - feat_real[k]).abs().mean();
        }
        loss_fm = loss_fm / static_cast<double>(feat_fake.size());
      }
      auto loss_adv = adversarial_loss_g(d_fake);
      auto loss_csl = csl_loss(net->encode(fake), code_ex,
                               net->encode(negatives).view({bsz, m, -1}), cfg.temperature);
      auto loss_rec = (fake - target).abs().mean();
      auto loss_g = cfg.w_adv * loss_adv + cfg.w_csl * loss_csl + cfg.w_fm * loss_fm +
                    cfg.w_rec * loss_rec;
      opt_g.zero_grad();
      loss_g.backward();
      opt_g.step();

      total.add(loss_g.item<double>());
      adv_m.add(loss_adv.item<double>());
      csl_m.add(loss_csl.item<double>());
      fm_m.add(loss_fm.item<double>());
      rec_m.add(loss_rec.item<double>());
      d_m.add(loss_d.item<double>());
    }
    log.add_epoch(total.mean(), {adv_m.mean(), csl_m.mean(), fm_m.mean(), rec_m.mean(), d_m.mean()});
  }
  net->eval();
  return {std::move(model), std::move(log)};
}

}  // namespace octsynth
