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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace octsynth {

/// Grayscale image, row-major, values in [0,1]. Used for prints, en-face
/// layers, z-mean projections and B-scan slices.
class Image2D {
 public:
  static constexpr int kMinSide = 8;

  Image2D() = default;
  Image2D(int height, int width, float fill = 0.0f);
  Image2D(int height, int width, std::vector<float> values);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  float operator()(int y, int x) const { return values_[index(y, x)]; }
  float& operator()(int y, int x) { return values_[index(y, x)]; }

  std::span<const float> values() const noexcept { return values_; }
  std::span<float> values() noexcept { return values_; }

  /// Re-checks the range invariant after in-place edits.
  void validate() const;

  bool operator==(const Image2D&) const = default;

 private:
  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> values_;
};

/// {0,1} image. Master prints, warped impressions and contact masks.
class BinaryImage2D {
 public:
  BinaryImage2D() = default;
  BinaryImage2D(int height, int width, std::uint8_t fill = 0);
  BinaryImage2D(int height, int width, std::vector<std::uint8_t> values);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::uint8_t operator()(int y, int x) const { return values_[index(y, x)]; }
  std::uint8_t& operator()(int y, int x) { return values_[index(y, x)]; }

  std::span<const std::uint8_t> values() const noexcept { return values_; }

  Image2D to_image() const;
  /// Pixels strictly above `threshold` become 1.
  static BinaryImage2D from_image(const Image2D& img, float threshold = 0.5f);

  double fraction_set() const;
  void validate() const;

  bool operator==(const BinaryImage2D&) const = default;

 private:
  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> values_;
};

/// Per-column voxel depth (z index), e.g. a surface or junction map.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int height, int width, int fill = 0);
  DepthMap(int height, int width, std::vector<int> values);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }

  int operator()(int y, int x) const { return values_[index(y, x)]; }
  int& operator()(int y, int x) { return values_[index(y, x)]; }

  std::span<const int> values() const noexcept { return values_; }

  bool operator==(const DepthMap&) const = default;

 private:
  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<int> values_;
};

/// Intensity volume indexed (z, y, x) with x fastest, values in [0,1].
class Volume3D {
 public:
  Volume3D() = default;
  Volume3D(int depth, int height, int width, float fill = 0.0f);
  Volume3D(int depth, int height, int width, std::vector<float> values);

  int depth() const noexcept { return depth_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  float operator()(int z, int y, int x) const { return values_[index(z, y, x)]; }
  float& operator()(int z, int y, int x) { return values_[index(z, y, x)]; }

  std::span<const float> values() const noexcept { return values_; }
  std::span<float> values() noexcept { return values_; }

  bool same_shape(const Volume3D& other) const noexcept {
    return depth_ == other.depth_ && height_ == other.height_ &&
           width_ == other.width_;
  }
  std::string shape_string() const;

  /// x-z cross section at row y (a B-scan), shape depth x width.
  Image2D bscan(int y) const;

  void validate() const;

  bool operator==(const Volume3D&) const = default;

 private:
  std::size_t index(int z, int y, int x) const {
    return (static_cast<std::size_t>(z) * height_ + y) * width_ + x;
  }

  int depth_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> values_;
};

// ---------------------------------------------------------------------------
// Raw float32 container ("P2V1").
//
//   magic "P2V1" | u8 dtype (1 = float32) | u8 ndim | 2 zero bytes |
//   ndim x u32 LE dims | prod(dims) x f32 LE payload
// ---------------------------------------------------------------------------

struct RawArray {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};

std::vector<std::uint8_t> encode_container(const RawArray& array);
/// Throws FormatError with reason "bad magic", "unsupported dtype",
/// "dimension mismatch", "truncated payload" or "trailing bytes".
RawArray decode_container(std::span<const std::uint8_t> bytes,
                          int expected_ndim);

void write_volume(const Volume3D& v, const std::filesystem::path& path);
Volume3D read_volume(const std::filesystem::path& path);

void write_image(const Image2D& img, const std::filesystem::path& path);
Image2D read_image(const std::filesystem::path& path);

void write_binary_image(const BinaryImage2D& img,
                        const std::filesystem::path& path);
BinaryImage2D read_binary_image(const std::filesystem::path& path);

void write_depth_map(const DepthMap& map, const std::filesystem::path& path);
DepthMap read_depth_map(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// Projections and extraction
// ---------------------------------------------------------------------------

/// output(y, x) = mean over z of v(z, y, x).
Image2D z_mean_projection(const Volume3D& v);

/// Mean of v(z, y, x) for z in [depth(y,x), depth(y,x) + band), clipped to
/// the volume.
Image2D extract_enface_layer(const Volume3D& v, const DepthMap& depth_map,
                             int band);

/// First z where the median-smoothed A-line exceeds `threshold`; D-1 for
/// columns that never do. `smoothing` is the median half-width (0 = off).
DepthMap detect_surface(const Volume3D& v, float threshold, int smoothing);

enum class Category { kUpper, kMiddle, kLower, kFull };

std::string_view to_string(Category c);
Category parse_category(std::string_view s);

/// Otsu threshold over the distinct values in `values`; pixels strictly
/// above the returned value form the upper class.
double otsu_threshold(std::span<const float> values);

/// Classifies an image by where its Otsu foreground sits. Throws
/// ValidationError("blank image") when nothing is foreground.
Category foreground_category(const Image2D& img,
                             double coverage_threshold = 0.85);

/// Foreground category of the print *region* rather than of its ridges:
/// the image is box-blurred, thresholded to a two-level mask, then passed
/// to foreground_category.
Category region_category(const Image2D& img, double coverage_threshold = 0.85);

// ---------------------------------------------------------------------------
// Dataset manifest
// ---------------------------------------------------------------------------

struct ManifestEntry {
  int identity_id = 0;
  int impression_id = 0;
  Category category = Category::kFull;
  /// stage name -> file path, relative to the manifest directory
  std::map<std::string, std::string> paths;
  std::uint64_t seed = 0;

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  /// Directory relative paths resolve against. Not serialized.
  std::filesystem::path root;

  std::filesystem::path resolve(const ManifestEntry& e,
                                const std::string& stage) const;
  bool has_stage(const std::string& stage) const;
};

std::string manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const std::string& text,
                                   const std::filesystem::path& root);

/// Writes `<path>`; paths inside entries are kept as given.
void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);
/// Loads and validates: unique (identity, impression) pairs and every
/// referenced file present.
DatasetManifest load_manifest(const std::filesystem::path& path);

}  // namespace octsynth
