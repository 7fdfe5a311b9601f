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

#include "octsynth/tensor_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "octsynth/error.hpp"
#include "octsynth/imgproc.hpp"

namespace octsynth {
namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'P', '2', 'V', '1'};
constexpr std::uint8_t kDtypeFloat32 = 1;

void check_unit_range(std::span<const float> values, const char* what) {
  for (float v : values) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      std::ostringstream os;
      os << what << " value " << v << " outside [0,1]";
      throw ValidationError(os.str());
    }
  }
}

void check_dims(std::initializer_list<int> dims, int min_side,
                const char* what) {
  for (int d : dims) {
    if (d < min_side) {
      std::ostringstream os;
      os << what << " dimension " << d << " below minimum " << min_side;
      throw ValidationError(os.str());
    }
  }
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

// --- Image2D ----------------------------------------------------------------

Image2D::Image2D(int height, int width, float fill)
    : height_(height), width_(width) {
  check_dims({height, width}, kMinSide, "Image2D");
  std::array<float, 1> f = {fill};
  check_unit_range(f, "Image2D");
  values_.assign(static_cast<std::size_t>(height) * width, fill);
}

Image2D::Image2D(int height, int width, std::vector<float> values)
    : height_(height), width_(width), values_(std::move(values)) {
  check_dims({height, width}, kMinSide, "Image2D");
  if (values_.size() != static_cast<std::size_t>(height) * width) {
    throw ValidationError("Image2D value count does not match shape");
  }
  check_unit_range(values_, "Image2D");
}

void Image2D::validate() const { check_unit_range(values_, "Image2D"); }

// --- BinaryImage2D ------------------------------------------------------------

BinaryImage2D::BinaryImage2D(int height, int width, std::uint8_t fill)
    : height_(height), width_(width) {
  check_dims({height, width}, Image2D::kMinSide, "BinaryImage2D");
  if (fill > 1) throw ValidationError("BinaryImage2D fill must be 0 or 1");
  values_.assign(static_cast<std::size_t>(height) * width, fill);
}

BinaryImage2D::BinaryImage2D(int height, int width,
                             std::vector<std::uint8_t> values)
    : height_(height), width_(width), values_(std::move(values)) {
  check_dims({height, width}, Image2D::kMinSide, "BinaryImage2D");
  if (values_.size() != static_cast<std::size_t>(height) * width) {
    throw ValidationError("BinaryImage2D value count does not match shape");
  }
  validate();
}

void BinaryImage2D::validate() const {
  for (auto v : values_) {
    if (v > 1) throw ValidationError("BinaryImage2D value not in {0,1}");
  }
}

Image2D BinaryImage2D::to_image() const {
  std::vector<float> out(values_.begin(), values_.end());
  return Image2D(height_, width_, std::move(out));
}

BinaryImage2D BinaryImage2D::from_image(const Image2D& img, float threshold) {
  std::vector<std::uint8_t> out(img.size());
  auto v = img.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] > threshold ? 1 : 0;
  return BinaryImage2D(img.height(), img.width(), std::move(out));
}

double BinaryImage2D::fraction_set() const {
  if (values_.empty()) return 0.0;
  auto n = std::count(values_.begin(), values_.end(), std::uint8_t{1});
  return static_cast<double>(n) / static_cast<double>(values_.size());
}

// --- DepthMap -----------------------------------------------------------------

DepthMap::DepthMap(int height, int width, int fill)
    : height_(height), width_(width) {
  check_dims({height, width}, 1, "DepthMap");
  values_.assign(static_cast<std::size_t>(height) * width, fill);
}

DepthMap::DepthMap(int height, int width, std::vector<int> values)
    : height_(height), width_(width), values_(std::move(values)) {
  check_dims({height, width}, 1, "DepthMap");
  if (values_.size() != static_cast<std::size_t>(height) * width) {
    throw ValidationError("DepthMap value count does not match shape");
  }
}

// --- Volume3D -----------------------------------------------------------------

Volume3D::Volume3D(int depth, int height, int width, float fill)
    : depth_(depth), height_(height), width_(width) {
  check_dims({depth, height, width}, 1, "Volume3D");
  std::array<float, 1> f = {fill};
  check_unit_range(f, "Volume3D");
  values_.assign(static_cast<std::size_t>(depth) * height * width, fill);
}

Volume3D::Volume3D(int depth, int height, int width, std::vector<float> values)
    : depth_(depth), height_(height), width_(width), values_(std::move(values)) {
  check_dims({depth, height, width}, 1, "Volume3D");
  if (values_.size() != static_cast<std::size_t>(depth) * height * width) {
    throw ValidationError("Volume3D value count does not match shape");
  }
  check_unit_range(values_, "Volume3D");
}

void Volume3D::validate() const { check_unit_range(values_, "Volume3D"); }

std::string Volume3D::shape_string() const {
  std::ostringstream os;
  os << depth_ << "x" << height_ << "x" << width_;
  return os.str();
}

Image2D Volume3D::bscan(int y) const {
  if (y < 0 || y >= height_) throw ValidationError("B-scan row out of range");
  std::vector<float> out(static_cast<std::size_t>(depth_) * width_);
  for (int z = 0; z < depth_; ++z) {
    for (int x = 0; x < width_; ++x) out[z * width_ + x] = (*this)(z, y, x);
  }
  return Image2D(depth_, width_, std::move(out));
}

// --- Container ----------------------------------------------------------------

std::vector<std::uint8_t> encode_container(const RawArray& array) {
  if (array.dims.empty() || array.dims.size() > 255) {
    throw ValidationError("container ndim must be in [1,255]");
  }
  std::size_t count = 1;
  for (auto d : array.dims) count *= d;
  if (count != array.data.size()) {
    throw ValidationError("container payload size does not match dims");
  }
  std::vector<std::uint8_t> out;
  out.reserve(8 + 4 * array.dims.size() + 4 * count);
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  out.push_back(kDtypeFloat32);
  out.push_back(static_cast<std::uint8_t>(array.dims.size()));
  out.push_back(0);
  out.push_back(0);
  for (auto d : array.dims) put_u32(out, d);
  for (float f : array.data) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

RawArray decode_container(std::span<const std::uint8_t> bytes,
                          int expected_ndim) {
  if (bytes.size() < 8) throw FormatError("truncated payload", "header shorter than 8 bytes");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError("bad magic", "expected P2V1");
  }
  if (bytes[4] != kDtypeFloat32) {
    throw FormatError("unsupported dtype",
                      "code " + std::to_string(static_cast<int>(bytes[4])));
  }
  const int ndim = bytes[5];
  if (ndim != expected_ndim) {
    throw FormatError("dimension mismatch", "expected ndim " +
                                                std::to_string(expected_ndim) +
                                                ", found " + std::to_string(ndim));
  }
  if (bytes[6] != 0 || bytes[7] != 0) {
    throw FormatError("bad header", "reserved bytes are not zero");
  }
  const std::size_t header = 8 + 4 * static_cast<std::size_t>(ndim);
  if (bytes.size() < header) throw FormatError("truncated payload", "dims cut short");
  RawArray out;
  std::size_t count = 1;
  for (int i = 0; i < ndim; ++i) {
    out.dims.push_back(get_u32(bytes.data() + 8 + 4 * i));
    count *= out.dims.back();
  }
  const std::size_t expected = header + 4 * count;
  if (bytes.size() < expected) {
    throw FormatError("truncated payload", "expected " + std::to_string(expected) +
                                               " bytes, found " +
                                               std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw FormatError("trailing bytes", std::to_string(bytes.size() - expected) +
                                            " unexpected bytes after payload");
  }
  out.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.data[i] = std::bit_cast<float>(get_u32(bytes.data() + header + 4 * i));
  }
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

RawArray read_container(const std::filesystem::path& path, int ndim) {
  auto bytes = read_file_bytes(path);
  try {
    return decode_container(bytes, ndim);
  } catch (const FormatError& e) {
    throw FormatError(e.reason(), path.string());
  }
}

}  // namespace

void write_volume(const Volume3D& v, const std::filesystem::path& path) {
  RawArray a{{static_cast<std::uint32_t>(v.depth()),
               static_cast<std::uint32_t>(v.height()),
               static_cast<std::uint32_t>(v.width())},
              {v.values().begin(), v.values().end()}};
  write_file_bytes(path, encode_container(a));
}

Volume3D read_volume(const std::filesystem::path& path) {
  auto a = read_container(path, 3);
  return Volume3D(static_cast<int>(a.dims[0]), static_cast<int>(a.dims[1]),
                  static_cast<int>(a.dims[2]), std::move(a.data));
}

void write_image(const Image2D& img, const std::filesystem::path& path) {
  RawArray a{{static_cast<std::uint32_t>(img.height()),
               static_cast<std::uint32_t>(img.width())},
              {img.values().begin(), img.values().end()}};
  write_file_bytes(path, encode_container(a));
}

Image2D read_image(const std::filesystem::path& path) {
  auto a = read_container(path, 2);
  return Image2D(static_cast<int>(a.dims[0]), static_cast<int>(a.dims[1]),
                 std::move(a.data));
}

void write_binary_image(const BinaryImage2D& img,
                        const std::filesystem::path& path) {
  write_image(img.to_image(), path);
}

BinaryImage2D read_binary_image(const std::filesystem::path& path) {
  auto a = read_container(path, 2);
  std::vector<std::uint8_t> bits(a.data.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (a.data[i] != 0.0f && a.data[i] != 1.0f) {
      throw FormatError("non-binary payload", path.string());
    }
    bits[i] = a.data[i] == 1.0f ? 1 : 0;
  }
  return BinaryImage2D(static_cast<int>(a.dims[0]), static_cast<int>(a.dims[1]),
                       std::move(bits));
}

void write_depth_map(const DepthMap& map, const std::filesystem::path& path) {
  RawArray a{{static_cast<std::uint32_t>(map.height()),
               static_cast<std::uint32_t>(map.width())},
              {}};
  a.data.reserve(map.size());
  for (int v : map.values()) a.data.push_back(static_cast<float>(v));
  write_file_bytes(path, encode_container(a));
}

DepthMap read_depth_map(const std::filesystem::path& path) {
  auto a = read_container(path, 2);
  std::vector<int> out(a.data.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (a.data[i] != std::floor(a.data[i])) {
      throw FormatError("non-integer payload", path.string());
    }
    out[i] = static_cast<int>(a.data[i]);
  }
  return DepthMap(static_cast<int>(a.dims[0]), static_cast<int>(a.dims[1]),
                  std::move(out));
}

// --- Projections --------------------------------------------------------------

Image2D z_mean_projection(const Volume3D& v) {
  const int d = v.depth(), h = v.height(), w = v.width();
  std::vector<double> acc(static_cast<std::size_t>(h) * w, 0.0);
  auto vals = v.values();
  for (int z = 0; z < d; ++z) {
    const float* slice = vals.data() + static_cast<std::size_t>(z) * h * w;
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += slice[i];
  }
  std::vector<float> out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    out[i] = std::clamp(static_cast<float>(acc[i] / d), 0.0f, 1.0f);
  }
  return Image2D(h, w, std::move(out));
}

Image2D extract_enface_layer(const Volume3D& v, const DepthMap& depth_map,
                             int band) {
  if (depth_map.height() != v.height() || depth_map.width() != v.width()) {
    throw ValidationError("depth map shape does not match volume");
  }
  if (band < 1) throw ValidationError("band must be >= 1");
  Image2D out(v.height(), v.width());
  for (int y = 0; y < v.height(); ++y) {
    for (int x = 0; x < v.width(); ++x) {
      const int z0 = std::clamp(depth_map(y, x), 0, v.depth() - 1);
      const int z1 = std::min(z0 + band, v.depth());
      double s = 0.0;
      for (int z = z0; z < z1; ++z) s += v(z, y, x);
      out(y, x) = std::clamp(static_cast<float>(s / (z1 - z0)), 0.0f, 1.0f);
    }
  }
  return out;
}

DepthMap detect_surface(const Volume3D& v, float threshold, int smoothing) {
  if (!(threshold > 0.0f && threshold < 1.0f)) {
    throw ValidationError("surface threshold must be in (0,1)");
  }
  if (smoothing < 0) throw ValidationError("smoothing must be >= 0");
  const int d = v.depth();
  DepthMap out(v.height(), v.width(), d - 1);
  std::vector<float> aline(d), window;
  for (int y = 0; y < v.height(); ++y) {
    for (int x = 0; x < v.width(); ++x) {
      for (int z = 0; z < d; ++z) aline[z] = v(z, y, x);
      for (int z = 0; z < d; ++z) {
        const int lo = std::max(0, z - smoothing);
        const int hi = std::min(d - 1, z + smoothing);
        window.assign(aline.begin() + lo, aline.begin() + hi + 1);
        auto mid = window.begin() + window.size() / 2;
        std::nth_element(window.begin(), mid, window.end());
        float med = *mid;
        if (window.size() % 2 == 0) {
          // even-sized window at the volume edge: average the middle pair
          float lower = *std::max_element(window.begin(), mid);
          med = 0.5f * (med + lower);
        }
        if (med > threshold) {
          out(y, x) = z;
          break;
        }
      }
    }
  }
  return out;
}

// --- Categories ---------------------------------------------------------------

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kUpper: return "upper";
    case Category::kMiddle: return "middle";
    case Category::kLower: return "lower";
    case Category::kFull: return "full";
  }
  return "full";
}

Category parse_category(std::string_view s) {
  if (s == "upper") return Category::kUpper;
  if (s == "middle") return Category::kMiddle;
  if (s == "lower") return Category::kLower;
  if (s == "full") return Category::kFull;
  throw ValidationError("unknown category '" + std::string(s) + "'");
}

double otsu_threshold(std::span<const float> values) {
  if (values.empty()) throw ValidationError("otsu on empty input");
  std::vector<float> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double total = 0.0;
  for (float v : sorted) total += v;

  double best_score = -1.0;
  double best_t = sorted.front();
  double sum_lo = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) sum_lo += sorted[j++];
    if (j == sorted.size()) break;
    // split between value sorted[i] (inclusive) and sorted[j]
    const double n_lo = static_cast<double>(j);
    const double n_hi = n - n_lo;
    const double mu_lo = sum_lo / n_lo;
    const double mu_hi = (total - sum_lo) / n_hi;
    const double score = n_lo * n_hi * (mu_lo - mu_hi) * (mu_lo - mu_hi);
    if (score > best_score) {
      best_score = score;
      best_t = sorted[i];
    }
    i = j;
  }
  if (best_score < 0.0) {
    // single distinct value: everything above zero is foreground
    return sorted.front() > 0.0f ? 0.0 : sorted.front();
  }
  return best_t;
}

Category foreground_category(const Image2D& img, double coverage_threshold) {
  if (!(coverage_threshold > 0.0 && coverage_threshold < 1.0)) {
    throw ValidationError("coverage threshold must be in (0,1)");
  }
  const double t = otsu_threshold(img.values());
  std::size_t count = 0;
  double row_sum = 0.0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (img(y, x) > t) {
        ++count;
        row_sum += y;
      }
    }
  }
  if (count == 0) throw ValidationError("blank image");
  const double coverage = static_cast<double>(count) / static_cast<double>(img.size());
  if (coverage > coverage_threshold) return Category::kFull;
  const double centroid = row_sum / static_cast<double>(count);
  const double h = img.height();
  if (centroid < h / 3.0) return Category::kUpper;
  if (centroid < 2.0 * h / 3.0) return Category::kMiddle;
  return Category::kLower;
}

Category region_category(const Image2D& img, double coverage_threshold) {
  const int radius = std::max(2, std::min(img.height(), img.width()) / 16);
  Image2D blurred = box_blur(img, radius);
  float peak = 0.0f;
  for (float v : blurred.values()) peak = std::max(peak, v);
  if (peak <= 0.0f) throw ValidationError("blank image");
  Image2D mask(img.height(), img.width());
  auto src = blurred.values();
  auto dst = mask.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] > 0.35f * peak ? 1.0f : 0.0f;
  return foreground_category(mask, coverage_threshold);
}

}  // namespace octsynth
