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
#include "octsynth/tensor_io.hpp"
#include "support.hpp"

namespace octsynth {
namespace {

using testing::TempDir;

Volume3D ramp_volume(int d, int h, int w) {
  Volume3D v(d, h, w);
  for (int z = 0; z < d; ++z)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) v(z, y, x) = static_cast<float>(z * 100 + y * 10 + x) / 1000.0f;
  return v;
}

TEST(TensorIo, VolumeRoundTripIsExact) {
  TempDir dir("io");
  const auto v = ramp_volume(3, 5, 7);
  write_volume(v, dir / "v.p2v");
  EXPECT_EQ(read_volume(dir / "v.p2v"), v);
}

TEST(TensorIo, ImageAndBinaryRoundTrip) {
  TempDir dir("io");
  Image2D img(8, 10, 0.25f);
  img(1, 2) = 0.75f;
  write_image(img, dir / "i.p2v");
  EXPECT_EQ(read_image(dir / "i.p2v"), img);

  BinaryImage2D b(8, 8);
  b(0, 0) = 1;
  b(2, 1) = 1;
  write_binary_image(b, dir / "b.p2v");
  EXPECT_EQ(read_binary_image(dir / "b.p2v"), b);

  DepthMap m(2, 3, 4);
  m(1, 1) = 7;
  write_depth_map(m, dir / "m.p2v");
  EXPECT_EQ(read_depth_map(dir / "m.p2v"), m);
}

TEST(TensorIo, ContainerHeaderLayout) {
  RawArray a{{2, 3}, {1, 2, 3, 4, 5, 6}};
  const auto bytes = encode_container(a);
  ASSERT_EQ(bytes.size(), 4u + 4u + 2 * 4u + 6 * 4u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "P2V1");
  EXPECT_EQ(bytes[4], 1);  // float32
  EXPECT_EQ(bytes[5], 2);  // ndim
  EXPECT_EQ(bytes[8], 2);
  EXPECT_EQ(bytes[12], 3);
  const auto back = decode_container(bytes, 2);
  EXPECT_EQ(back.dims, a.dims);
  EXPECT_EQ(back.data, a.data);
}

std::string reason_of(const std::vector<std::uint8_t>& bytes, int ndim) {
  try {
    decode_container(bytes, ndim);
  } catch (const FormatError& e) {
    return e.reason();
  }
  return "";
}

TEST(TensorIo, MalformedContainersAreRejectedWithReasons) {
  const auto good = encode_container({{2, 2}, {0, 1, 2, 3}});

  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_EQ(reason_of(bad_magic, 2), "bad magic");

  auto bad_dtype = good;
  bad_dtype[4] = 7;
  EXPECT_EQ(reason_of(bad_dtype, 2), "unsupported dtype");

  EXPECT_EQ(reason_of(good, 3), "dimension mismatch");

  auto truncated = good;
  truncated.pop_back();
  EXPECT_EQ(reason_of(truncated, 2), "truncated payload");

  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(reason_of(trailing, 2), "trailing bytes");
}

TEST(TensorIo, MissingFileIsIoError) {
  EXPECT_THROW(read_volume("/nonexistent/octsynth/v.p2v"), IoError);
}

TEST(TensorIo, ZMeanProjectionAveragesDepth) {
  const auto v = ramp_volume(4, 8, 9);
  const auto p = z_mean_projection(v);
  ASSERT_EQ(p.height(), 8);
  ASSERT_EQ(p.width(), 9);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 9; ++x) {
      double s = 0;
      for (int z = 0; z < 4; ++z) s += v(z, y, x);
      EXPECT_NEAR(p(y, x), s / 4.0, 1e-6);
    }
}

TEST(TensorIo, EnfaceLayerClipsToVolume) {
  const auto v = ramp_volume(4, 8, 8);
  DepthMap d(8, 8, 3);
  const auto e = extract_enface_layer(v, d, 3);
  EXPECT_NEAR(e(1, 1), v(3, 1, 1), 1e-6);
  DepthMap d0(8, 8, 1);
  const auto e0 = extract_enface_layer(v, d0, 2);
  EXPECT_NEAR(e0(0, 1), (v(1, 0, 1) + v(2, 0, 1)) / 2.0, 1e-6);
}

TEST(TensorIo, DetectSurfaceFindsFirstBrightVoxel) {
  Volume3D v(8, 3, 3, 0.0f);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x)
      for (int z = 2 + x; z < 8; ++z) v(z, y, x) = 1.0f;
  const auto s = detect_surface(v, 0.5f, 0);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) EXPECT_EQ(s(y, x), 2 + x);

  const auto dark = detect_surface(Volume3D(5, 2, 2, 0.0f), 0.5f, 0);
  EXPECT_EQ(dark(1, 1), 4);
}

TEST(TensorIo, OtsuSeparatesTwoLevels) {
  std::vector<float> v = {0.1f, 0.1f, 0.1f, 0.9f, 0.9f};
  const double t = otsu_threshold(v);
  EXPECT_GE(t, 0.1);
  EXPECT_LT(t, 0.9);
}

TEST(TensorIo, ForegroundCategoryByRegion) {
  Image2D upper(64, 64, 0.0f), lower(64, 64, 0.0f), full(64, 64, 1.0f);
  for (int y = 0; y < 28; ++y)
    for (int x = 0; x < 64; ++x) upper(y, x) = 1.0f;
  for (int y = 36; y < 64; ++y)
    for (int x = 0; x < 64; ++x) lower(y, x) = 1.0f;
  EXPECT_EQ(foreground_category(upper), Category::kUpper);
  EXPECT_EQ(foreground_category(lower), Category::kLower);
  EXPECT_EQ(region_category(upper), Category::kUpper);
  EXPECT_THROW(foreground_category(Image2D(8, 8, 0.0f)), ValidationError);
  (void)full;
}

TEST(TensorIo, CategoryNamesRoundTrip) {
  for (Category c : {Category::kUpper, Category::kMiddle, Category::kLower, Category::kFull}) {
    EXPECT_EQ(parse_category(to_string(c)), c);
  }
  EXPECT_THROW(parse_category("sideways"), ValidationError);
}

TEST(TensorIo, ManifestRoundTripAndValidation) {
  TempDir dir("manifest");
  write_volume(ramp_volume(2, 2, 2), dir / "a.p2v");
  DatasetManifest m;
  m.entries.push_back({3, 1, Category::kLower, {{"volume", "a.p2v"}}, 99});
  save_manifest(m, dir / "manifest.json");
  const auto back = load_manifest(dir / "manifest.json");
  ASSERT_EQ(back.entries.size(), 1u);
  EXPECT_EQ(back.entries[0], m.entries[0]);
  EXPECT_TRUE(back.has_stage("volume"));
  EXPECT_FALSE(back.has_stage("zmean"));
  EXPECT_EQ(back.resolve(back.entries[0], "volume"), dir / "a.p2v");

  m.entries.push_back(m.entries[0]);
  save_manifest(m, dir / "dup.json");
  EXPECT_THROW(load_manifest(dir / "dup.json"), Error);

  DatasetManifest missing;
  missing.entries.push_back({0, 0, Category::kFull, {{"volume", "nope.p2v"}}, 0});
  save_manifest(missing, dir / "missing.json");
  EXPECT_THROW(load_manifest(dir / "missing.json"), Error);
}

TEST(TensorIo, ConstructorsRejectMismatchedSizes) {
  EXPECT_THROW(Volume3D(2, 2, 2, std::vector<float>(7)), ValidationError);
  EXPECT_THROW(Image2D(8, 8, std::vector<float>(3)), ValidationError);
  EXPECT_THROW(Image2D(4, 8), ValidationError);
}

}  // namespace
}  // namespace octsynth
