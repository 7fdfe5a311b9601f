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
#include <optional>
#include <string>

#include "octsynth/tensor_io.hpp"

namespace octsynth {

/// Layered fingertip phantom. Depths are in voxels, brightness in [0,1].
struct PhantomParams {
  int depth = 8;
  double surface_z0 = 2.0;
  double ridge_amplitude = 1.0;
  double corneum_thickness = 1.2;
  double corneum_variation = 0.3;
  double junction_offset = 3.0;
  /// extra junction depth under valleys, so the internal print mirrors the external one
  double junction_modulation = 0.6;
  double surface_brightness = 0.95;
  double corneum_brightness = 0.35;
  double epidermis_brightness = 0.6;
  double junction_brightness = 0.9;
  double dermis_brightness = 0.45;
  double plate_brightness = 0.2;
  /// Gamma shape; +inf disables speckle
  double speckle_k = 16.0;
  /// per-voxel attenuation below the surface
  double attenuation = 0.1;
  double gap_probability = 0.25;
  /// gap wedge width as a fraction of the image width
  double gap_width = 0.3;
  double gap_depth = 1.5;
  double print_smoothing = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  std::string to_json() const;
  static PhantomParams from_json(const std::string& text);
};

struct PhantomTruth {
  DepthMap surface_map;
  DepthMap junction_map;
  /// noise-free structural volume
  Volume3D clean_volume;
};

struct Phantom {
  Volume3D volume;
  PhantomTruth truth;
};

/// Renders the phantom for `print`. Tissue exists only where `contact`
/// (same size as the print) is set; without a mask the whole frame is skin.
Phantom generate_phantom(const BinaryImage2D& print, const PhantomParams& params,
                         const std::optional<BinaryImage2D>& contact = std::nullopt);

/// v * g with g ~ Gamma(k, 1/k) i.i.d., clamped to [0,1].
Volume3D apply_speckle(const Volume3D& v, double k, std::uint64_t seed);

struct PhantomDatasetOptions {
  int identities = 64;
  int impressions = 4;
  int height = 64;
  int width = 64;
  /// TPS displacement scale for impressions (normalised units)
  double distortion_magnitude = 0.02;
  PhantomParams params;
  std::uint64_t master_seed = 0;
};

/// Writes `<root>/id_<k>/imp_<j>/{volume,zmean,surface,junction,print}.p2v`
/// and `<root>/manifest.json`; returns the manifest.
DatasetManifest build_phantom_dataset(const PhantomDatasetOptions& options,
                                      const std::filesystem::path& root);

}  // namespace octsynth
