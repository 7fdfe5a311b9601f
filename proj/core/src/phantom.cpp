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

#include "octsynth/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "octsynth/error.hpp"
#include "octsynth/imgproc.hpp"
#include "octsynth/masterprint.hpp"
#include "octsynth/rng.hpp"

namespace octsynth {
namespace {

using json = nlohmann::json;

bool unit(double v) { return v >= 0.0 && v <= 1.0; }

/// Smooth zero-mean noise field scaled to roughly [-1, 1].
Field2D smooth_noise(int h, int w, double sigma, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field2D f(h, w);
  for (auto& v : f.v) v = u(rng);
  f = gaussian_filter(f, sigma);
  const double sd = f.stddev();
  if (sd > 0.0) {
    const double m = f.mean();
    for (auto& v : f.v) v = std::clamp((v - m) / (2.0 * sd), -1.0, 1.0);
  }
  return f;
}

double gauss(double d, double sigma) { return std::exp(-d * d / (2.0 * sigma * sigma)); }

std::string rel(int identity, int impression, const char* file) {
  return "id_" + std::to_string(identity) + "/imp_" + std::to_string(impression) + "/" + file;
}

}  // namespace

void PhantomParams::validate() const {
  if (depth < 2) throw ValidationError("phantom depth must be >= 2");
  if (!(surface_z0 > 0.0 && surface_z0 < depth)) throw ValidationError("surface z0 must lie in (0, D)");
  if (ridge_amplitude < 0.0 || ridge_amplitude >= surface_z0 + 0.5) {
    throw ValidationError("ridge amplitude must be >= 0 and keep the surface inside the volume");
  }
  if (!(corneum_thickness > 0.0) || corneum_variation < 0.0 || corneum_variation >= 1.0) {
    throw ValidationError("corneum thickness must be positive with variation in [0,1)");
  }
  if (!(junction_offset > 0.0) || junction_modulation < 0.0 ||
      junction_modulation >= 2.0 * junction_offset) {
    throw ValidationError("junction offset must be positive and exceed its modulation");
  }
  if (gap_depth < 0.0 || !unit(gap_probability) || !unit(gap_width)) {
    throw ValidationError("invalid gap parameters");
  }
  const double deepest = surface_z0 + gap_depth + junction_offset + 0.5 * junction_modulation;
  if (deepest > depth - 1) {
    throw ValidationError("phantom depth " + std::to_string(depth) +
                          " is too shallow for the surface and junction settings");
  }
  for (double b : {surface_brightness, corneum_brightness, epidermis_brightness,
                   junction_brightness, dermis_brightness, plate_brightness}) {
    if (!unit(b)) throw ValidationError("phantom brightness levels must lie in [0,1]");
  }
  if (!(speckle_k > 0.0)) throw ValidationError("speckle shape must be positive");
  if (attenuation < 0.0) throw ValidationError("attenuation must be >= 0");
  if (print_smoothing < 0.0) throw ValidationError("print smoothing must be >= 0");
}

std::string PhantomParams::to_json() const {
  json j = {{"depth", depth},
            {"surface_z0", surface_z0},
            {"ridge_amplitude", ridge_amplitude},
            {"corneum_thickness", corneum_thickness},
            {"corneum_variation", corneum_variation},
            {"junction_offset", junction_offset},
            {"junction_modulation", junction_modulation},
            {"surface_brightness", surface_brightness},
            {"corneum_brightness", corneum_brightness},
            {"epidermis_brightness", epidermis_brightness},
            {"junction_brightness", junction_brightness},
            {"dermis_brightness", dermis_brightness},
            {"plate_brightness", plate_brightness},
            {"speckle_k", std::isfinite(speckle_k) ? json(speckle_k) : json("inf")},
            {"attenuation", attenuation},
            {"gap_probability", gap_probability},
            {"gap_width", gap_width},
            {"gap_depth", gap_depth},
            {"print_smoothing", print_smoothing},
            {"seed", seed}};
  return j.dump();
}

PhantomParams PhantomParams::from_json(const std::string& text) {
  PhantomParams p;
  try {
    const json j = json::parse(text);
    p.depth = j.value("depth", p.depth);
    p.surface_z0 = j.value("surface_z0", p.surface_z0);
    p.ridge_amplitude = j.value("ridge_amplitude", p.ridge_amplitude);
    p.corneum_thickness = j.value("corneum_thickness", p.corneum_thickness);
    p.corneum_variation = j.value("corneum_variation", p.corneum_variation);
    p.junction_offset = j.value("junction_offset", p.junction_offset);
    p.junction_modulation = j.value("junction_modulation", p.junction_modulation);
    p.surface_brightness = j.value("surface_brightness", p.surface_brightness);
    p.corneum_brightness = j.value("corneum_brightness", p.corneum_brightness);
    p.epidermis_brightness = j.value("epidermis_brightness", p.epidermis_brightness);
    p.junction_brightness = j.value("junction_brightness", p.junction_brightness);
    p.dermis_brightness = j.value("dermis_brightness", p.dermis_brightness);
    p.plate_brightness = j.value("plate_brightness", p.plate_brightness);
    if (j.contains("speckle_k")) {
      const auto& k = j.at("speckle_k");
      p.speckle_k = k.is_string() && k.get<std::string>() == "inf"
                        ? std::numeric_limits<double>::infinity()
                        : k.get<double>();
    }
    p.attenuation = j.value("attenuation", p.attenuation);
    p.gap_probability = j.value("gap_probability", p.gap_probability);
    p.gap_width = j.value("gap_width", p.gap_width);
    p.gap_depth = j.value("gap_depth", p.gap_depth);
    p.print_smoothing = j.value("print_smoothing", p.print_smoothing);
    p.seed = j.value("seed", p.seed);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("phantom params: ") + e.what());
  }
  p.validate();
  return p;
}

Volume3D apply_speckle(const Volume3D& v, double k, std::uint64_t seed) {
  if (!(k > 0.0)) throw ValidationError("speckle shape must be positive");
  Volume3D out = v;
  if (std::isinf(k)) return out;
  Rng rng(derive_seed(seed, {0x5bec}));
  std::gamma_distribution<double> gamma(k, 1.0 / k);
  for (auto& x : out.values()) x = static_cast<float>(std::clamp(x * gamma(rng), 0.0, 1.0));
  return out;
}

Phantom generate_phantom(const BinaryImage2D& print, const PhantomParams& params,
                         const std::optional<BinaryImage2D>& contact) {
  params.validate();
  const int h = print.height(), w = print.width(), d = params.depth;
  if (contact && (contact->height() != h || contact->width() != w)) {
    throw ValidationError("contact mask differs in size from the print");
  }
  Rng rng(derive_seed(params.seed, {0xf1}));

  const Field2D ridge = params.print_smoothing > 0.0
                            ? gaussian_filter(Field2D(print.to_image()), params.print_smoothing)
                            : Field2D(print.to_image());
  const Field2D thickness_noise = smooth_noise(h, w, 4.0, rng);

  // Optional air-gap wedge under the plate.
  Field2D gap(h, w, 0.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  if (u01(rng) < params.gap_probability && params.gap_width > 0.0) {
    const double xc = u01(rng) * (w - 1);
    const double half = 0.5 * params.gap_width * w;
    const int y0 = static_cast<int>(u01(rng) * h / 2.0);
    const int y1 = std::min(h, y0 + h / 2);
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        gap(y, x) = params.gap_depth * std::max(0.0, 1.0 - std::abs(x - xc) / half);
      }
    }
  }

  std::vector<Field2D> dermis_noise;
  dermis_noise.reserve(d);
  for (int z = 0; z < d; ++z) dermis_noise.push_back(smooth_noise(h, w, 1.5, rng));

  const double plate_z = std::max(0.0, params.surface_z0 - params.ridge_amplitude - 1.0);
  Volume3D clean(d, h, w);
  DepthMap surface_map(h, w), junction_map(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double r = std::clamp(ridge(y, x), 0.0, 1.0);
      const double s = params.surface_z0 - params.ridge_amplitude * r + gap(y, x);
      const double t = params.corneum_thickness * (1.0 + params.corneum_variation * thickness_noise(y, x));
      const double j = s + params.junction_offset + params.junction_modulation * (0.5 - r);
      const bool tissue = !contact || (*contact)(y, x) != 0;

      const int sm = std::clamp(static_cast<int>(std::lround(s)), 0, d - 2);
      surface_map(y, x) = sm;
      junction_map(y, x) = std::clamp(static_cast<int>(std::lround(j)), sm + 1, d - 1);

      for (int z = 0; z < d; ++z) {
        double val = params.plate_brightness * gauss(z - plate_z, 0.35);
        if (tissue) {
          const double occupancy = std::clamp(z + 0.5 - s, 0.0, 1.0);
          const double below = std::max(0.0, z - s);
          double layer;
          if (z < s + t) {
            layer = params.corneum_brightness;
          } else if (z < j) {
            layer = params.epidermis_brightness;
          } else {
            layer = params.dermis_brightness * (0.75 + 0.25 * dermis_noise[z](y, x));
          }
          const double att = std::exp(-params.attenuation * below);
          val += occupancy * layer * att;
          val += params.surface_brightness * (0.15 + 0.85 * r) * gauss(z - s, 0.5);
          val += params.junction_brightness * (0.3 + 0.7 * r) * gauss(z - j, 0.5) *
                 std::exp(-params.attenuation * (j - s));
        }
        clean(z, y, x) = static_cast<float>(std::clamp(val, 0.0, 1.0));
      }
    }
  }

  Phantom out;
  out.volume = apply_speckle(clean, params.speckle_k, params.seed);
  out.truth = {std::move(surface_map), std::move(junction_map), std::move(clean)};
  return out;
}

DatasetManifest build_phantom_dataset(const PhantomDatasetOptions& options,
                                      const std::filesystem::path& root) {
  options.params.validate();
  if (options.identities < 1 || options.impressions < 1) {
    throw ValidationError("dataset needs at least one identity and one impression");
  }
  if (!(options.distortion_magnitude > 0.0)) throw ValidationError("distortion magnitude must be positive");
  if (options.height < Image2D::kMinSide || options.width < Image2D::kMinSide) {
    throw ValidationError("dataset resolution too small");
  }
  DatasetManifest manifest;
  manifest.root = root;
  for (int id = 0; id < options.identities; ++id) {
    const auto identity = IdentitySpec::sample(derive_seed(options.master_seed, {0x1d, static_cast<std::uint64_t>(id)}));
    const BinaryImage2D master = synth_master_print(identity, options.height, options.width);
    for (int imp = 0; imp < options.impressions; ++imp) {
      const std::uint64_t seed = derive_seed(options.master_seed, {static_cast<std::uint64_t>(id),
                                                                   static_cast<std::uint64_t>(imp)});
      const auto spec = DistortionSpec::sample(seed, options.height, options.width);
      const BinaryImage2D warped = tps_warp_image(master, distortion_to_warp(spec, options.distortion_magnitude));
      const BinaryImage2D print = crop_impression(warped, spec);
      const BinaryImage2D mask = crop_mask(options.height, options.width, spec);

      PhantomParams params = options.params;
      params.seed = seed;
      const Phantom ph = generate_phantom(print, params, mask);

      ManifestEntry e;
      e.identity_id = id;
      e.impression_id = imp;
      e.seed = seed;
      try {
        e.category = region_category(print.to_image());
      } catch (const ValidationError&) {
        e.category = Category::kFull;
      }
      e.paths = {{"volume", rel(id, imp, "volume.p2v")},
                 {"zmean", rel(id, imp, "zmean.p2v")},
                 {"surface", rel(id, imp, "surface.p2v")},
                 {"junction", rel(id, imp, "junction.p2v")},
                 {"print", rel(id, imp, "print.p2v")}};
      write_volume(ph.volume, manifest.resolve(e, "volume"));
      write_image(z_mean_projection(ph.volume), manifest.resolve(e, "zmean"));
      write_depth_map(ph.truth.surface_map, manifest.resolve(e, "surface"));
      write_depth_map(ph.truth.junction_map, manifest.resolve(e, "junction"));
      write_binary_image(print, manifest.resolve(e, "print"));
      manifest.entries.push_back(std::move(e));
    }
  }
  save_manifest(manifest, root / "manifest.json");
  return manifest;
}

}  // namespace octsynth
