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

#include <gtest/gtest.h>

#include "octsynth/error.hpp"
#include "octsynth/masterprint.hpp"
#include "octsynth/nn.hpp"
#include "octsynth/style_transfer.hpp"
#include "support.hpp"

namespace octsynth {
namespace {

using testing::gradient_check;
using testing::TempDir;

TEST(Adain, MatchesTargetStatistics) {
  torch::manual_seed(0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = torch::randn({2, 3, 8, 8}, torch::kFloat64) * 2.0 + 1.0;
    const auto mu = torch::randn({2, 3}, torch::kFloat64);
    const auto sd = torch::rand({2, 3}, torch::kFloat64) + 0.5;
    const auto y = adain(x, mu, sd);
    const auto flat = y.view({2, 3, -1});
    const auto mean = flat.mean(2);
    const auto stdev = (flat - mean.unsqueeze(2)).pow(2).mean(2).sqrt();
    EXPECT_LT((mean - mu).abs().max().item<double>(), 1e-5);
    EXPECT_LT((stdev - sd).abs().max().item<double>(), 1e-4);
  }
}

TEST(Adain, IdentityWhenTargetsAreInputStatistics) {
  torch::manual_seed(1);
  const auto x = torch::randn({1, 4, 6, 6}, torch::kFloat64);
  const auto flat = x.view({1, 4, -1});
  const auto mu = flat.mean(2);
  const auto sd = (flat - mu.unsqueeze(2)).pow(2).mean(2).add(1e-5).sqrt();
  EXPECT_LT((adain(x, mu, sd) - x).abs().max().item<double>(), 1e-5);
}

TEST(Adain, WorkedExample) {
  // x = [1,2,3,4], mean 2.5, population variance 1.25; target mean 10, std 2
  const auto x = torch::tensor({1.0, 2.0, 3.0, 4.0}, torch::kFloat64).view({1, 1, 2, 2});
  const auto y = adain(x, torch::full({1, 1}, 10.0, torch::kFloat64),
                       torch::full({1, 1}, 2.0, torch::kFloat64));
  const double s = std::sqrt(1.25 + 1e-5);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(y.flatten()[i].item<double>(), 10.0 + 2.0 * ((i + 1) - 2.5) / s, 1e-9);
  }
}

TEST(Adain, UnbatchedLayoutAndShapeErrors) {
  const auto x = torch::randn({3, 5, 5});
  EXPECT_EQ(adain(x, torch::zeros({3}), torch::ones({3})).sizes(), x.sizes());
  EXPECT_THROW(adain(x, torch::zeros({2}), torch::ones({2})), ValidationError);
}

double csl_reference(const std::vector<double>& a, const std::vector<double>& p,
                     const std::vector<std::vector<double>>& negs, double t) {
  auto unit = [](std::vector<double> v) {
    double n = 0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return v;
  };
  auto dot = [](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
  };
  const auto ua = unit(a);
  const double pos = std::exp(dot(ua, unit(p)) / t);
  double denom = pos;
  for (const auto& n : negs) denom += std::exp(dot(ua, unit(n)) / t);
  return -std::log(pos / denom);
}

TEST(Csl, EqualSimilarityGivesLogMPlusOne) {
  for (int m : {1, 5, 15}) {
    const auto a = torch::randn({1, 16}, torch::kFloat64);
    const auto negs = a.unsqueeze(1).expand({1, m, 16}).contiguous();
    const double v = csl_loss(a, a.clone(), negs, 0.07).item<double>();
    EXPECT_NEAR(v, std::log(m + 1.0), 1e-6) << "m=" << m;
  }
}

TEST(Csl, MatchesScalarReference) {
  torch::manual_seed(4);
  const int m = 7, dim = 10;
  const auto a = torch::randn({dim}, torch::kFloat64);
  const auto p = torch::randn({dim}, torch::kFloat64);
  const auto n = torch::randn({m, dim}, torch::kFloat64);
  auto vec = [](const torch::Tensor& t) {
    std::vector<double> v(t.data_ptr<double>(), t.data_ptr<double>() + t.numel());
    return v;
  };
  std::vector<std::vector<double>> negs;
  for (int i = 0; i < m; ++i) negs.push_back(vec(n[i].contiguous()));
  const double ref = csl_reference(vec(a), vec(p), negs, 0.07);
  EXPECT_NEAR(csl_loss(a, p, n, 0.07).item<double>(), ref, 1e-10);
}

TEST(Csl, GradientMatchesCentralDifferences) {
  torch::manual_seed(5);
  const auto p = torch::randn({2, 6}, torch::kFloat64);
  const auto n = torch::randn({2, 4, 6}, torch::kFloat64);
  const auto a = torch::randn({2, 6}, torch::kFloat64);
  const double err = gradient_check([&](const torch::Tensor& x) { return csl_loss(x, p, n, 0.5); }, a);
  EXPECT_LT(err, 1e-6);
}

TEST(Csl, RejectsBadInputs) {
  const auto a = torch::randn({2, 4});
  EXPECT_THROW(csl_loss(a, a, torch::randn({2, 0, 4}), 0.07), ValidationError);
  EXPECT_THROW(csl_loss(a, a, torch::randn({2, 3, 4}), 0.0), ValidationError);
  EXPECT_THROW(csl_loss(a, a, torch::randn({2, 3, 5}), 0.07), ValidationError);
}

TEST(StyleConfig, JsonRoundTripAndValidation) {
  StyleStageConfig c;
  c.num_negatives = 3;
  c.seed = 99;
  const auto back = StyleStageConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_THROW(StyleStageConfig::from_json("{\"temperature\": -1}"), ValidationError);
  EXPECT_THROW(StyleStageConfig::from_json("not json"), ValidationError);
}

StyleStageConfig tiny_style() {
  StyleStageConfig c;
  c.resolution = 64;
  c.base_channels = 4;
  c.style_dim = 8;
  c.residual_blocks = 1;
  c.disc_base_channels = 4;
  c.num_negatives = 2;
  c.epochs = 2;
  c.batch_size = 2;
  return c;
}

ExemplarPool tiny_pool(int r) {
  ExemplarPool pool;
  for (Category c : ExemplarPool::kCategories) {
    for (int i = 0; i < 2; ++i) {
      Image2D img(r, r);
      for (int y = 0; y < r; ++y)
        for (int x = 0; x < r; ++x) img(y, x) = 0.5f + 0.4f * std::sin(0.3f * (x + i) + y);
      pool.add(c, img);
    }
  }
  return pool;
}

TEST(ExemplarPool, SaveLoadAndPick) {
  TempDir dir("pool");
  const auto pool = tiny_pool(16);
  pool.save(dir.path());
  const auto back = ExemplarPool::load(dir.path());
  EXPECT_EQ(back.total(), pool.total());
  EXPECT_EQ(back.pick(Category::kLower, 5), pool.pick(Category::kLower, 5));
  EXPECT_THROW(ExemplarPool::load(dir / "missing"), MissingPrerequisiteError);
  ExemplarPool empty;
  EXPECT_THROW(empty.validate(), ValidationError);
}

TEST(StyleModel, TransferShapeRangeAndCheckpoint) {
  TempDir dir("style");
  const auto cfg = tiny_style();
  StyleModel model(cfg);
  const auto print = synth_master_print(IdentitySpec::sample(1), 64, 64);
  const auto pool = tiny_pool(64);
  const auto out = model.transfer(print, pool.pick(Category::kFull, 0));
  ASSERT_EQ(out.height(), 64);
  for (float v : out.values()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
  EXPECT_EQ(model.style_encode(pool.pick(Category::kFull, 0)).size(), 8u);
  model.save(dir / "s.ckpt");
  const auto loaded = StyleModel::load(dir / "s.ckpt");
  EXPECT_EQ(loaded.transfer(print, pool.pick(Category::kFull, 0)), out);
  EXPECT_THROW(model.transfer(BinaryImage2D(32, 32), pool.pick(Category::kFull, 0)),
               ValidationError);
}

TEST(StyleTraining, RunsAndIsDeterministic) {
  TempDir dir("style_train");
  const auto cfg = tiny_style();
  const auto pool = tiny_pool(64);
  std::vector<StylePair> pairs;
  for (int i = 0; i < 4; ++i) {
    pairs.push_back({synth_master_print(IdentitySpec::sample(i), 64, 64),
                     pool.pick(Category::kFull, static_cast<std::uint64_t>(i))});
  }
  const auto a = train_style_stage(pairs, pool, cfg);
  const auto b = train_style_stage(pairs, pool, cfg);
  ASSERT_EQ(a.log.epochs(), 2u);
  EXPECT_EQ(a.log.to_csv(), b.log.to_csv());
  a.model.save(dir / "a.ckpt");
  b.model.save(dir / "b.ckpt");
  EXPECT_EQ(read_file_bytes(dir / "a.ckpt"), read_file_bytes(dir / "b.ckpt"));
  EXPECT_EQ(a.log.component_names(),
            (std::vector<std::string>{"loss_adv", "loss_csl", "loss_fm", "loss_rec", "loss_d"}));
}

}  // namespace
}  // namespace octsynth
