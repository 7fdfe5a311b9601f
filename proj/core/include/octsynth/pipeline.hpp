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
#include <iosfwd>
#include <string>
#include <vector>

#include "octsynth/expansion.hpp"
#include "octsynth/metrics.hpp"
#include "octsynth/phantom.hpp"
#include "octsynth/refiner.hpp"
#include "octsynth/style_transfer.hpp"
#include "octsynth/tensor_io.hpp"

namespace octsynth {

/// One run's configuration. Stage configs inherit the shared resolution.
struct PipelineConfig {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  std::uint64_t seed = 42;
  int depth = 8;
  int height = 64;
  int width = 64;

  // phantom corpus
  int identities = 64;
  int impressions = 4;
  double distortion_magnitude = 0.02;
  /// every n-th identity (id % n == n - 1) is kept out of training
  int holdout_every = 8;
  PhantomParams phantom;

  StyleStageConfig style;
  ExpansionConfig expansion = ExpansionConfig::desk();
  RefinerConfig refiner;
  TinyEmbedderConfig verifier;

  // synthesis
  int synth_identities = 8;
  int synth_impressions = 15;
  int workers = 1;

  // evaluation
  std::uint64_t embedder_seed = 0x5eed;
  int embedder_dim = 64;
  int bscan_stride = 4;
  bool verification = false;

  std::filesystem::path out = "octsynth_run";

  /// Desk-scale defaults with every stage set to `epochs`.
  static PipelineConfig desk(int epochs = 5);

  /// Checks sub-configs and cross-stage consistency.
  void validate() const;
  /// Copies the shared resolution and seeds into the stage configs.
  void propagate();

  std::string to_json() const;
  /// Missing keys keep their defaults; the result is propagated and validated.
  static PipelineConfig from_json(const std::string& text);
  static PipelineConfig load(const std::filesystem::path& path);

  std::filesystem::path phantom_dir() const { return out / "phantoms"; }
  std::filesystem::path checkpoint_dir() const { return out / "checkpoints"; }
  std::filesystem::path synth_dir() const { return out / "synth"; }
  std::filesystem::path checkpoint(const std::string& stage) const {
    return checkpoint_dir() / (stage + ".ckpt");
  }
  std::filesystem::path loss_csv(const std::string& stage) const {
    return checkpoint_dir() / (stage + "_loss.csv");
  }
};

enum class Stage { kStyle, kExpansion, kRefiner };

std::string_view to_string(Stage s);
Stage parse_stage(std::string_view s);

bool is_holdout(const PipelineConfig& cfg, int identity_id);

/// Per-impression synthesis artifacts; timing stays out of written files.
struct SynthesisRecord {
  int identity_id = 0;
  int impression_id = 0;
  std::uint64_t identity_seed = 0;
  std::uint64_t impression_seed = 0;
  /// I_ID, I_M, I_S, V_E, V_R relative to the synthesis root
  std::filesystem::path identity_print, impression_print, styled, structural, refined;
  double seconds = 0.0;
};

DatasetManifest cmd_make_phantoms(const PipelineConfig& cfg, std::ostream& log);

struct TrainOutcome {
  std::filesystem::path checkpoint;
  std::filesystem::path loss_csv;
  LossLog log;
};

/// Trains one stage on the non-held-out identities of `manifest_path`.
/// The refiner requires the expansion checkpoint.
TrainOutcome cmd_train(Stage stage, const PipelineConfig& cfg,
                       const std::filesystem::path& manifest_path, std::ostream& log);

/// V_E = G_E(z-mean) for the given entries; used to build refiner pairs.
std::vector<RefinerPair> refiner_pairs(const ExpansionModel& expansion,
                                       const DatasetManifest& manifest,
                                       const std::vector<const ManifestEntry*>& entries);

struct SynthesisResult {
  DatasetManifest manifest;
  std::vector<SynthesisRecord> records;
};

SynthesisResult cmd_synthesize(const PipelineConfig& cfg, std::ostream& log);

struct EvaluationReport {
  double fvd_structural = 0.0;
  double fvd_refined = 0.0;
  double fid_structural = 0.0;
  double fid_refined = 0.0;
  std::string embedder;
  std::size_t real_count = 0;
  std::size_t fake_count = 0;
  bool has_verification = false;
  double eer = 0.0;
  double tar_at_far_1e3 = 0.0;
  double tar_at_far_1e2 = 0.0;

  std::string to_json() const;
};

/// FVD over volumes and FID over B-scans for both V_E ("structural") and V_R
/// ("volume") of the fake manifest against the real manifest's volumes.
/// Writes `<out>/report.json`.
EvaluationReport cmd_evaluate(const PipelineConfig& cfg, const std::filesystem::path& real_manifest,
                              const std::filesystem::path& fake_manifest, std::ostream& log);

/// Fréchet distance between two feature files; their dimensions must agree.
double evaluate_feature_files(const std::filesystem::path& a, const std::filesystem::path& b);

/// Binary 8-bit PGM, values quantised with round(v * 255).
void write_pgm(const Image2D& img, const std::filesystem::path& path);
Image2D read_pgm(const std::filesystem::path& path);

/// Three B-scans (rows H/4, H/2, 3H/4), the z-mean projection and en-face
/// images at the detected surface and at surface + junction_offset.
std::vector<std::filesystem::path> cmd_export_views(const std::filesystem::path& volume_path,
                                                    const std::filesystem::path& out_dir,
                                                    int junction_offset = 3);

}  // namespace octsynth
