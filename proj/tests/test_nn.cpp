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

#include <gtest/gtest.h>

#include "octsynth/error.hpp"
#include "octsynth/nn.hpp"
#include "octsynth/rng.hpp"
#include "support.hpp"

namespace octsynth {
namespace {

using testing::TempDir;

struct Tiny : torch::nn::Module {
  Tiny() {
    lin = register_module("lin", torch::nn::Linear(3, 2));
    bn = register_module("bn", torch::nn::BatchNorm1d(2));
  }
  torch::nn::Linear lin{nullptr};
  torch::nn::BatchNorm1d bn{nullptr};
};

TEST(Checkpoint, RoundTripRestoresEveryTensor) {
  TempDir dir("ckpt");
  torch::manual_seed(1);
  Tiny a;
  a.bn->running_mean.fill_(0.25);
  write_checkpoint(capture_checkpoint(a, "tiny", "{\"x\":1}"), dir / "a.ckpt");
  const auto ck = read_checkpoint(dir / "a.ckpt", "tiny");
  EXPECT_EQ(ck.config_json, "{\"x\":1}");
  torch::manual_seed(2);
  Tiny b;
  restore_checkpoint(b, ck);
  EXPECT_TRUE(torch::equal(a.lin->weight, b.lin->weight));
  EXPECT_TRUE(torch::equal(a.bn->running_mean, b.bn->running_mean));
  write_checkpoint(capture_checkpoint(b, "tiny", "{\"x\":1}"), dir / "b.ckpt");
  EXPECT_EQ(read_file_bytes(dir / "a.ckpt"), read_file_bytes(dir / "b.ckpt"));
}

TEST(Checkpoint, ErrorsAreClassified) {
  TempDir dir("ckpt_err");
  Tiny a;
  EXPECT_THROW(read_checkpoint(dir / "none.ckpt", "tiny"), MissingPrerequisiteError);
  write_checkpoint(capture_checkpoint(a, "tiny", "{}"), dir / "a.ckpt");
  EXPECT_THROW(read_checkpoint(dir / "a.ckpt", "other"), FormatError);
  auto bytes = read_file_bytes(dir / "a.ckpt");
  bytes.resize(bytes.size() - 3);
  write_file_bytes(dir / "cut.ckpt", bytes);
  EXPECT_THROW(read_checkpoint(dir / "cut.ckpt", "tiny"), FormatError);
  bytes[0] = 'Z';
  write_file_bytes(dir / "magic.ckpt", bytes);
  EXPECT_THROW(read_checkpoint(dir / "magic.ckpt", "tiny"), FormatError);

  struct Other : torch::nn::Module {
    Other() { register_module("lin", torch::nn::Linear(4, 2)); }
  } other;
  EXPECT_THROW(restore_checkpoint(other, read_checkpoint(dir / "a.ckpt", "tiny")), Error);
}

TEST(LossLog, CsvLayout) {
  LossLog log({"loss_a", "loss_b"});
  log.add_epoch(1.5, {1.0, 0.5});
  log.add_epoch(1.25, {0.75, 0.5});
  const auto csv = log.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,loss_total,loss_a,loss_b");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_DOUBLE_EQ(log.component(1, "loss_a"), 0.75);
  EXPECT_THROW(log.add_epoch(1.0, {1.0}), ValidationError);
}

TEST(TensorConversion, ClampsAndPreservesLayout) {
  Volume3D v(2, 3, 4);
  for (std::size_t i = 0; i < v.size(); ++i) v.values()[i] = static_cast<float>(i) / 24.0f;
  const auto t = to_tensor(v);
  EXPECT_EQ(t.sizes(), (std::vector<int64_t>{1, 1, 2, 3, 4}));
  EXPECT_EQ(volume_from_tensor(t, 2, 3, 4), v);
  const auto img = image_from_tensor(torch::full({1, 1, 8, 8}, 3.0), 8, 8);
  EXPECT_EQ(img(0, 0), 1.0f);
  EXPECT_THROW(image_from_tensor(torch::zeros({5}), 8, 8), ValidationError);
}

TEST(Rng, DerivedSeedsAreStableAndDistinct) {
  static_assert(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
  EXPECT_NE(derive_seed(1, {2}), derive_seed(2, {2}));
  EXPECT_NE(derive_seed(7, {}), derive_seed(7, {0}));
}

}  // namespace
}  // namespace octsynth
