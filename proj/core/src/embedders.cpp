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
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "octsynth/error.hpp"
#include "octsynth/metrics.hpp"
#include "octsynth/nn.hpp"
#include "octsynth/rng.hpp"

namespace octsynth {
namespace {

namespace F = torch::nn::functional;

constexpr int kRandomChannels[] = {8, 16, 32};

torch::Tensor random_normal(Rng& rng, std::vector<int64_t> shape, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  auto t = torch::empty(shape, torch::kFloat32);
  float* p = t.data_ptr<float>();
  for (int64_t i = 0; i < t.numel(); ++i) p[i] = static_cast<float>(dist(rng));
  return t;
}

std::vector<double> pooled_features(const torch::Tensor& h, const torch::Tensor& projection) {
  // h: [1, C, ...] -> per-channel mean and std -> projection
  auto flat = h.flatten(2);
  auto mean = flat.mean(2);
  auto stddev = flat.std(2, /*unbiased=*/false);
  auto feat = torch::cat({mean, stddev}, 1).matmul(projection).to(torch::kFloat64).contiguous();
  const double* p = feat.data_ptr<double>();
  return std::vector<double>(p, p + feat.numel());
}

}  // namespace

std::vector<double> Embedder::embed(const Image2D&) const {
  throw ValidationError("embedder '" + id() + "' does not accept 2D images");
}

std::vector<double> Embedder::embed(const Volume3D&) const {
  throw ValidationError("embedder '" + id() + "' does not accept volumes");
}

RandomConvEmbedder::RandomConvEmbedder(std::uint64_t seed, int dimension)
    : seed_(seed), dimension_(dimension) {
  if (dimension < 1) throw ValidationError("embedder dimension must be positive");
  Rng rng(derive_seed(seed, {2}));
  int in = 1;
  for (int c : kRandomChannels) {
    weights2d_.push_back(random_normal(rng, {c, in, 3, 3}, std::sqrt(2.0 / (in * 9))));
    in = c;
  }
  projection2d_ = random_normal(rng, {2 * in, dimension}, 1.0 / std::sqrt(2.0 * in));

  Rng rng3(derive_seed(seed, {3}));
  in = 1;
  for (int c : kRandomChannels) {
    weights3d_.push_back(random_normal(rng3, {c, in, 3, 3, 3}, std::sqrt(2.0 / (in * 27))));
    in = c;
  }
  projection3d_ = random_normal(rng3, {2 * in, dimension}, 1.0 / std::sqrt(2.0 * in));
}

std::string RandomConvEmbedder::id() const {
  std::ostringstream os;
  os << "random-conv-" << std::hex << seed_ << std::dec << "-d" << dimension_;
  return os.str();
}

std::vector<double> RandomConvEmbedder::embed(const Image2D& img) const {
  torch::NoGradGuard no_grad;
  auto h = to_tensor(img);
  for (const auto& w : weights2d_) {
    h = F::leaky_relu(F::conv2d(h, w, F::Conv2dFuncOptions().stride(2).padding(1)),
                      F::LeakyReLUFuncOptions().negative_slope(0.2));
  }
  return pooled_features(h, projection2d_);
}

std::vector<double> RandomConvEmbedder::embed(const Volume3D& v) const {
  torch::NoGradGuard no_grad;
  auto h = to_tensor(v);
  for (const auto& w : weights3d_) {
    const int64_t sd = h.size(2) > 1 ? 2 : 1;
    h = F::leaky_relu(
        F::conv3d(h, w, F::Conv3dFuncOptions().stride({sd, 2, 2}).padding(1)),
        F::LeakyReLUFuncOptions().negative_slope(0.2));
  }
  return pooled_features(h, projection3d_);
}

std::vector<std::vector<double>> embed_all(const Embedder& e, const std::vector<Image2D>& xs) {
  std::vector<std::vector<double>> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(e.embed(x));
  return out;
}

std::vector<std::vector<double>> embed_all(const Embedder& e, const std::vector<Volume3D>& xs) {
  std::vector<std::vector<double>> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(e.embed(x));
  return out;
}

std::vector<Image2D> bscan_slices(const Volume3D& v, int stride) {
  if (stride < 1) throw ValidationError("b-scan stride must be >= 1");
  std::vector<Image2D> out;
  for (int y = 0; y < v.height(); y += stride) out.push_back(v.bscan(y));
  return out;
}

// --- tiny recognition embedder ---------------------------------------------------------

TinyEmbedderNetImpl::TinyEmbedderNetImpl(int depth, int height, int width, int base_channels,
                                         int embedding_dim, int classes) {
  if (depth < 1 || height < 8 || width < 8) throw ValidationError("volume too small for embedder");
  const int64_t b = base_channels;
  namespace nn = torch::nn;
  auto stride_d = [](int d) -> int64_t { return d > 1 ? 2 : 1; };
  int d1 = depth;
  int d2 = (d1 + 1) / static_cast<int>(stride_d(d1));
  features = nn::Sequential(
      nn::Conv3d(nn::Conv3dOptions(1, b, 3).stride({1, 2, 2}).padding(1)), nn::ReLU(),
      nn::Conv3d(nn::Conv3dOptions(b, 2 * b, 3).stride({stride_d(d1), 2, 2}).padding(1)),
      nn::ReLU(),
      nn::Conv3d(nn::Conv3dOptions(2 * b, 4 * b, 3).stride({stride_d(d2), 2, 2}).padding(1)),
      nn::ReLU(), nn::AdaptiveAvgPool3d(nn::AdaptiveAvgPool3dOptions({1, 4, 4})));
  bottleneck = nn::Linear(4 * b * 16, embedding_dim);
  classifier = nn::Linear(embedding_dim, classes);
  register_module("features", features);
  register_module("bottleneck", bottleneck);
  register_module("classifier", classifier);
}

torch::Tensor TinyEmbedderNetImpl::embed(const torch::Tensor& x) {
  return bottleneck(features->forward(x).flatten(1));
}

torch::Tensor TinyEmbedderNetImpl::forward(const torch::Tensor& x) {
  return classifier(torch::relu(embed(x)));
}

TinyEmbedder::TinyEmbedder(TinyEmbedderNet net, int depth, int height, int width,
                           std::uint64_t seed)
    : net_(std::move(net)), depth_(depth), height_(height), width_(width), seed_(seed) {
  net_->eval();
}

std::string TinyEmbedder::id() const { return "tiny-embedder-" + std::to_string(seed_); }

int TinyEmbedder::dimension() const {
  return static_cast<int>(net_->bottleneck->options.out_features());
}

std::vector<double> TinyEmbedder::embed(const Volume3D& v) const {
  if (v.depth() != depth_ || v.height() != height_ || v.width() != width_) {
    throw ValidationError("embedder expects volumes of a fixed shape, got " + v.shape_string());
  }
  torch::NoGradGuard no_grad;
  auto e = net_->embed(to_tensor(v)).to(torch::kFloat64).contiguous();
  const double* p = e.data_ptr<double>();
  return std::vector<double>(p, p + e.numel());
}

namespace {

struct LabelledSet {
  std::vector<const ManifestEntry*> train;
  std::map<int, int> label_of_identity;
  int depth = 0, height = 0, width = 0;
};

LabelledSet prepare_identities(const DatasetManifest& dataset, const TinyEmbedderConfig& cfg) {
  if (cfg.embedding_dim < 1 || cfg.base_channels < 1 || cfg.epochs < 0 || cfg.batch_size < 1 ||
      cfg.holdout_impressions < 0 || !(cfg.learning_rate > 0.0)) {
    throw ValidationError("invalid tiny embedder configuration");
  }
  if (!dataset.has_stage("volume")) throw MissingPrerequisiteError("dataset has no volumes");
  std::map<int, std::vector<const ManifestEntry*>> by_identity;
  for (const auto& e : dataset.entries) by_identity[e.identity_id].push_back(&e);
  if (by_identity.size() < 2) throw ValidationError("tiny embedder needs at least two identities");

  LabelledSet out;
  for (auto& [identity, list] : by_identity) {
    if (list.size() < 2) {
      throw ValidationError("identity " + std::to_string(identity) +
                            " has fewer than two impressions");
    }
    std::sort(list.begin(), list.end(), [](const ManifestEntry* a, const ManifestEntry* b) {
      return a->impression_id < b->impression_id;
    });
    const auto keep = list.size() > static_cast<std::size_t>(cfg.holdout_impressions)
                          ? list.size() - cfg.holdout_impressions
                          : std::size_t{1};
    const int label = static_cast<int>(out.label_of_identity.size());
    out.label_of_identity[identity] = label;
    out.train.insert(out.train.end(), list.begin(), list.begin() + static_cast<long>(keep));
  }
  const Volume3D first = read_volume(dataset.resolve(*out.train.front(), "volume"));
  out.depth = first.depth();
  out.height = first.height();
  out.width = first.width();
  return out;
}

TinyEmbedderNet make_net(const LabelledSet& set, const TinyEmbedderConfig& cfg) {
  torch::manual_seed(cfg.seed);
  return TinyEmbedderNet(set.depth, set.height, set.width, cfg.base_channels, cfg.embedding_dim,
                         static_cast<int>(set.label_of_identity.size()));
}

}  // namespace

TinyEmbedder tiny_embedder_untrained(const DatasetManifest& dataset,
                                     const TinyEmbedderConfig& cfg) {
  const auto set = prepare_identities(dataset, cfg);
  return TinyEmbedder(make_net(set, cfg), set.depth, set.height, set.width, cfg.seed);
}

TinyEmbedder tiny_embedder_train(const DatasetManifest& dataset, const TinyEmbedderConfig& cfg) {
  const auto set = prepare_identities(dataset, cfg);
  at::set_num_threads(1);
  auto net = make_net(set, cfg);

  std::vector<torch::Tensor> xs;
  std::vector<int64_t> ys;
  for (const auto* e : set.train) {
    const Volume3D v = read_volume(dataset.resolve(*e, "volume"));
    if (v.depth() != set.depth || v.height() != set.height || v.width() != set.width) {
      throw ValidationError("dataset volumes differ in shape");
    }
    xs.push_back(to_tensor(v));
    ys.push_back(set.label_of_identity.at(e->identity_id));
  }
  const auto x_all = torch::cat(xs, 0);
  const auto y_all = torch::tensor(ys, torch::kInt64);

  torch::optim::Adam opt(net->parameters(), torch::optim::AdamOptions(cfg.learning_rate));
  std::vector<int64_t> order(xs.size());
  net->train();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const auto end = std::min(order.size(), start + cfg.batch_size);
      auto idx = torch::tensor(std::vector<int64_t>(order.begin() + static_cast<long>(start),
                                                    order.begin() + static_cast<long>(end)),
                               torch::kInt64);
      auto logits = net->forward(x_all.index_select(0, idx));
      auto loss = F::cross_entropy(logits, y_all.index_select(0, idx));
      opt.zero_grad();
      loss.backward();
      opt.step();
    }
  }
  return TinyEmbedder(net, set.depth, set.height, set.width, cfg.seed);
}

}  // namespace octsynth
