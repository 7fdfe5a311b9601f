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
#include <map>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "octsynth/tensor_io.hpp"

namespace octsynth {

// --- tensor conversion --------------------------------------------------------

/// [1,1,H,W] float32
torch::Tensor to_tensor(const Image2D& img);
torch::Tensor to_tensor(const BinaryImage2D& img);
/// [1,1,D,H,W] float32
torch::Tensor to_tensor(const Volume3D& v);

/// Accepts any tensor with H*W elements (leading unit dims allowed); values
/// are clamped to [0,1].
Image2D image_from_tensor(const torch::Tensor& t, int height, int width);
Volume3D volume_from_tensor(const torch::Tensor& t, int depth, int height, int width);

// --- checkpoints ----------------------------------------------------------------
//
// "P2CK" | u32 version | str kind | str config-json | u32 n |
//   n x (str name | u8 ndim | ndim x i64 dim | f32 payload)
// Strings are u32 length + bytes, all integers little-endian. Parameters
// and buffers are written in registration order so identical models give
// identical bytes.

struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::string kind;
  std::string config_json;
  std::vector<std::pair<std::string, torch::Tensor>> tensors;
};

Checkpoint capture_checkpoint(const torch::nn::Module& module, std::string kind,
                              std::string config_json);
/// Copies tensors into `module`; names and shapes must match exactly.
void restore_checkpoint(torch::nn::Module& module, const Checkpoint& ckpt);

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Throws MissingPrerequisiteError when the file does not exist.
Checkpoint read_checkpoint(const std::filesystem::path& path,
                           const std::string& expected_kind);

// --- training bookkeeping ---------------------------------------------------------

/// Per-epoch means of the total loss and its named components.
class LossLog {
 public:
  explicit LossLog(std::vector<std::string> components = {})
      : components_(std::move(components)) {}

  void add_epoch(double total, const std::vector<double>& components);

  std::size_t epochs() const { return totals_.size(); }
  double total(std::size_t epoch) const { return totals_.at(epoch); }
  double component(std::size_t epoch, const std::string& name) const;
  const std::vector<std::string>& component_names() const { return components_; }

  /// Header `epoch,loss_total,<components...>`, one row per epoch.
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> components_;
  std::vector<double> totals_;
  std::vector<std::vector<double>> rows_;
};

/// Running mean over minibatches.
class MeanAccumulator {
 public:
  void add(double v) {
    sum_ += v;
    ++n_;
  }
  double mean() const { return n_ == 0 ? 0.0 : sum_ / static_cast<double>(n_); }

 private:
  double sum_ = 0.0;
  std::size_t n_ = 0;
};

/// Seeds torch's global generator and pins intra-op threads so training is
/// reproducible run to run.
void seed_everything(std::uint64_t seed);

/// Channels-last-free instance norm options with affine parameters.
torch::nn::InstanceNorm2dOptions instance_norm2d(int64_t channels);
torch::nn::InstanceNorm3dOptions instance_norm3d(int64_t channels);

}  // namespace octsynth
