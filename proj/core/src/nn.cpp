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

#include "octsynth/nn.hpp"

#include <bit>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "octsynth/error.hpp"

namespace octsynth {

torch::Tensor to_tensor(const Image2D& img) {
  auto v = img.values();
  return torch::from_blob(const_cast<float*>(v.data()), {1, 1, img.height(), img.width()},
                          torch::kFloat32)
      .clone();
}

torch::Tensor to_tensor(const BinaryImage2D& img) { return to_tensor(img.to_image()); }

torch::Tensor to_tensor(const Volume3D& v) {
  auto vals = v.values();
  return torch::from_blob(const_cast<float*>(vals.data()),
                          {1, 1, v.depth(), v.height(), v.width()}, torch::kFloat32)
      .clone();
}

Image2D image_from_tensor(const torch::Tensor& t, int height, int width) {
  auto c = t.detach().to(torch::kFloat32).contiguous().clamp(0.0, 1.0);
  if (c.numel() != static_cast<int64_t>(height) * width) {
    throw ValidationError("tensor element count does not match image shape");
  }
  const float* p = c.data_ptr<float>();
  return Image2D(height, width, std::vector<float>(p, p + c.numel()));
}

Volume3D volume_from_tensor(const torch::Tensor& t, int depth, int height, int width) {
  auto c = t.detach().to(torch::kFloat32).contiguous().clamp(0.0, 1.0);
  if (c.numel() != static_cast<int64_t>(depth) * height * width) {
    throw ValidationError("tensor element count does not match volume shape");
  }
  const float* p = c.data_ptr<float>();
  return Volume3D(depth, height, width, std::vector<float>(p, p + c.numel()));
}

// --- checkpoints ----------------------------------------------------------------

namespace {

constexpr char kCheckpointMagic[4] = {'P', '2', 'C', 'K'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_i64(std::vector<std::uint8_t>& out, std::int64_t v) {
  auto u = static_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

void put_str(std::vector<std::uint8_t>& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, std::string path)
      : bytes_(bytes), path_(std::move(path)) {}

  void need(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw FormatError("truncated payload", path_);
  }
  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::int64_t i64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return static_cast<std::int64_t>(v);
  }
  std::string str() {
    const auto n = u32();
    need(n);
    std::string s(bytes_.begin() + pos_, bytes_.begin() + pos_ + n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

Checkpoint capture_checkpoint(const torch::nn::Module& module, std::string kind,
                              std::string config_json) {
  Checkpoint ckpt{std::move(kind), std::move(config_json), {}};
  for (const auto& p : module.named_parameters(true)) {
    ckpt.tensors.emplace_back(p.key(), p.value().detach().to(torch::kFloat32).contiguous().clone());
  }
  for (const auto& b : module.named_buffers(true)) {
    ckpt.tensors.emplace_back(b.key(), b.value().detach().to(torch::kFloat32).contiguous().clone());
  }
  return ckpt;
}

void restore_checkpoint(torch::nn::Module& module, const Checkpoint& ckpt) {
  std::map<std::string, const torch::Tensor*> by_name;
  for (const auto& [name, t] : ckpt.tensors) by_name[name] = &t;
  torch::NoGradGuard no_grad;
  auto assign = [&](const std::string& name, torch::Tensor& target) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw FormatError("checkpoint mismatch", "missing tensor '" + name + "'");
    }
    if (it->second->sizes() != target.sizes()) {
      throw FormatError("checkpoint mismatch", "shape of '" + name + "' differs");
    }
    target.copy_(it->second->to(target.dtype()));
    by_name.erase(it);
  };
  for (auto& p : module.named_parameters(true)) assign(p.key(), p.value());
  for (auto& b : module.named_buffers(true)) assign(b.key(), b.value());
  if (!by_name.empty()) {
    throw FormatError("checkpoint mismatch", "unexpected tensor '" + by_name.begin()->first + "'");
  }
}

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::vector<std::uint8_t> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put_u32(out, Checkpoint::kVersion);
  put_str(out, ckpt.kind);
  put_str(out, ckpt.config_json);
  put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    put_str(out, name);
    auto c = t.to(torch::kFloat32).contiguous();
    out.push_back(static_cast<std::uint8_t>(c.dim()));
    for (auto d : c.sizes()) put_i64(out, d);
    const float* p = c.data_ptr<float>();
    for (int64_t i = 0; i < c.numel(); ++i) put_u32(out, std::bit_cast<std::uint32_t>(p[i]));
  }
  write_file_bytes(path, out);
}

Checkpoint read_checkpoint(const std::filesystem::path& path, const std::string& expected_kind) {
  if (!std::filesystem::exists(path)) {
    throw MissingPrerequisiteError("missing " + expected_kind + " checkpoint: " + path.string());
  }
  const auto bytes = read_file_bytes(path);
  Reader r(bytes, path.string());
  for (char m : kCheckpointMagic) {
    if (static_cast<char>(r.u8()) != m) throw FormatError("bad magic", path.string());
  }
  const auto version = r.u32();
  if (version != Checkpoint::kVersion) {
    throw FormatError("unsupported version", path.string());
  }
  Checkpoint ckpt;
  ckpt.kind = r.str();
  if (ckpt.kind != expected_kind) {
    throw FormatError("checkpoint mismatch",
                      path.string() + " holds '" + ckpt.kind + "', expected '" + expected_kind + "'");
  }
  ckpt.config_json = r.str();
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = r.str();
    const int ndim = r.u8();
    std::vector<int64_t> dims(ndim);
    int64_t count = 1;
    for (auto& d : dims) {
      d = r.i64();
      count *= d;
    }
    auto t = torch::empty(dims, torch::kFloat32);
    float* p = t.data_ptr<float>();
    for (int64_t k = 0; k < count; ++k) p[k] = std::bit_cast<float>(r.u32());
    ckpt.tensors.emplace_back(std::move(name), std::move(t));
  }
  if (!r.done()) throw FormatError("trailing bytes", path.string());
  return ckpt;
}

// --- loss log ---------------------------------------------------------------------

void LossLog::add_epoch(double total, const std::vector<double>& components) {
  if (components.size() != components_.size()) {
    throw ValidationError("loss component count mismatch");
  }
  totals_.push_back(total);
  rows_.push_back(components);
}

double LossLog::component(std::size_t epoch, const std::string& name) const {
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (components_[i] == name) return rows_.at(epoch)[i];
  }
  throw ValidationError("unknown loss component '" + name + "'");
}

std::string LossLog::to_csv() const {
  std::ostringstream os;
  os << "epoch,loss_total";
  for (const auto& c : components_) os << ',' << c;
  os << '\n';
  os << std::setprecision(9);
  for (std::size_t e = 0; e < totals_.size(); ++e) {
    os << e + 1 << ',' << totals_[e];
    for (double v : rows_[e]) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

void LossLog::write_csv(const std::filesystem::path& path) const {
  const std::string s = to_csv();
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

void seed_everything(std::uint64_t seed) {
  at::set_num_threads(1);
  torch::manual_seed(seed);
}

torch::nn::InstanceNorm2dOptions instance_norm2d(int64_t channels) {
  return torch::nn::InstanceNorm2dOptions(channels).affine(true);
}

torch::nn::InstanceNorm3dOptions instance_norm3d(int64_t channels) {
  return torch::nn::InstanceNorm3dOptions(channels).affine(true);
}

}  // namespace octsynth
