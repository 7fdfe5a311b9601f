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
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <torch/torch.h>

#include "octsynth/tensor_io.hpp"

namespace octsynth {

// --- SSIM -----------------------------------------------------------------------

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;

  static SsimOptions image() { return {11, 1.5, 0.01 * 0.01, 0.03 * 0.03}; }
  static SsimOptions volume() { return {7, 1.5, 0.01 * 0.01, 0.03 * 0.03}; }
};

/// Mean SSIM over every position. Inputs are [N,C,H,W] or [N,C,D,H,W] of
/// equal shape. Local statistics use a Gaussian window truncated at the
/// borders and renormalised, so constant inputs keep exact local moments.
/// Differentiable in both arguments.
torch::Tensor ssim_tensor(const torch::Tensor& a, const torch::Tensor& b,
                          const SsimOptions& options);

/// Evaluated in float64.
double ssim(const Image2D& a, const Image2D& b, const SsimOptions& options = SsimOptions::image());
double ssim(const Volume3D& a, const Volume3D& b,
            const SsimOptions& options = SsimOptions::volume());

// --- Fréchet distance -------------------------------------------------------------

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  void validate() const;
};

/// Sample mean and unbiased (n-1) covariance; needs at least 2 rows.
GaussianStats gaussian_stats(const std::vector<std::vector<double>>& features);

/// |mu1-mu2|^2 + Tr(S1 + S2 - 2 (S1 S2)^{1/2}), with the trace of the root
/// taken as Tr((S1^{1/2} S2 S1^{1/2})^{1/2}) through symmetric eigensolves.
double frechet_distance(const GaussianStats& s1, const GaussianStats& s2);

// --- embedders --------------------------------------------------------------------

/// Maps samples to fixed-length feature vectors for FID/FVD.
class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::string id() const = 0;
  virtual int dimension() const = 0;
  virtual bool deterministic() const = 0;

  virtual std::vector<double> embed(const Image2D& img) const;
  virtual std::vector<double> embed(const Volume3D& v) const;
};

/// Fixed-seed random strided convolution network with mean/std pooling and
/// a random projection. Deterministic; 2D and 3D paths are independent.
class RandomConvEmbedder final : public Embedder {
 public:
  explicit RandomConvEmbedder(std::uint64_t seed = 0x5eed, int dimension = 64);

  std::string id() const override;
  int dimension() const override { return dimension_; }
  bool deterministic() const override { return true; }

  std::vector<double> embed(const Image2D& img) const override;
  std::vector<double> embed(const Volume3D& v) const override;

 private:
  std::uint64_t seed_;
  int dimension_;
  std::vector<torch::Tensor> weights2d_;
  std::vector<torch::Tensor> weights3d_;
  torch::Tensor projection2d_;
  torch::Tensor projection3d_;
};

std::vector<std::vector<double>> embed_all(const Embedder& e, const std::vector<Image2D>& xs);
std::vector<std::vector<double>> embed_all(const Embedder& e, const std::vector<Volume3D>& xs);

double frechet_from_features(const std::vector<std::vector<double>>& a,
                             const std::vector<std::vector<double>>& b);
double fid_score(const std::vector<Image2D>& set_a, const std::vector<Image2D>& set_b,
                 const Embedder& e);
double fvd_score(const std::vector<Volume3D>& set_a, const std::vector<Volume3D>& set_b,
                 const Embedder& e);

/// B-scans (x-z slices) at rows 0, stride, 2*stride, ...
std::vector<Image2D> bscan_slices(const Volume3D& v, int stride = 4);

// Feature file: "P2F1" | u32 count | u32 dim | f32 row-major payload.
void write_features(const std::vector<std::vector<double>>& rows,
                    const std::filesystem::path& path);
std::vector<std::vector<double>> read_features(const std::filesystem::path& path);

// --- verification ------------------------------------------------------------------

/// Similarity scores, higher = more alike.
struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;

  void validate() const;
};

struct RocPoint {
  double far = 0.0;
  double frr = 0.0;
  double threshold = 0.0;
};

/// One point per distinct score plus -inf and +inf, in increasing threshold
/// order. FAR = share of impostors >= t, FRR = share of genuines < t.
std::vector<RocPoint> roc_points(const ScoreSet& s);

/// Error rate where FAR = FRR, linearly interpolated between the two ROC
/// points that bracket the crossing.
double eer(const ScoreSet& s);

/// 1 - FRR at the most permissive threshold whose FAR does not exceed
/// `far_target`, interpolated linearly in FAR between bracketing points.
double tar_at_far(const ScoreSet& s, double far_target);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

/// Every unordered pair: same label -> genuine, different -> impostor.
ScoreSet all_pairs_scores(const std::vector<std::vector<double>>& embeddings,
                          const std::vector<int>& labels);

/// Two-column text, `genuine 0.93` / `impostor 0.12` per line.
void write_scores(const ScoreSet& s, const std::filesystem::path& path);
ScoreSet read_scores(const std::filesystem::path& path);

// --- tiny recognition embedder -------------------------------------------------------

struct TinyEmbedderConfig {
  int embedding_dim = 64;
  int base_channels = 8;
  int epochs = 8;
  int batch_size = 8;
  double learning_rate = 1e-3;
  /// highest impression ids per identity kept out of training
  int holdout_impressions = 1;
  std::uint64_t seed = 7;
};

struct TinyEmbedderNetImpl : torch::nn::Module {
  TinyEmbedderNetImpl(int depth, int height, int width, int base_channels, int embedding_dim,
                      int classes);

  /// Penultimate representation, [N, embedding_dim].
  torch::Tensor embed(const torch::Tensor& x);
  /// Identity logits.
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Sequential features{nullptr};
  torch::nn::Linear bottleneck{nullptr};
  torch::nn::Linear classifier{nullptr};
};
TORCH_MODULE(TinyEmbedderNet);

/// Small 3D convolutional identity classifier; the 64-d penultimate layer is
/// the representation and similarity is cosine.
class TinyEmbedder final : public Embedder {
 public:
  TinyEmbedder(TinyEmbedderNet net, int depth, int height, int width, std::uint64_t seed);

  std::string id() const override;
  int dimension() const override;
  bool deterministic() const override { return true; }

  std::vector<double> embed(const Volume3D& v) const override;

 private:
  mutable TinyEmbedderNet net_;
  int depth_, height_, width_;
  std::uint64_t seed_;
};

/// Trains on the manifest's "volume" files. Throws ValidationError for a
/// single identity or fewer than two impressions per identity.
TinyEmbedder tiny_embedder_train(const DatasetManifest& dataset, const TinyEmbedderConfig& cfg);
/// Same, but without training (random initialisation from cfg.seed).
TinyEmbedder tiny_embedder_untrained(const DatasetManifest& dataset,
                                     const TinyEmbedderConfig& cfg);

}  // namespace octsynth
