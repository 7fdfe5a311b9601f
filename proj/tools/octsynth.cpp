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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "octsynth/error.hpp"
#include "octsynth/pipeline.hpp"

namespace {

using namespace octsynth;
namespace fs = std::filesystem;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<int> epochs;
};

PipelineConfig resolve_config(const CommonFlags& f) {
  PipelineConfig cfg = f.config.empty() ? PipelineConfig::desk() : PipelineConfig::load(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.out = *f.out;
  if (f.workers) cfg.workers = *f.workers;
  if (f.epochs) {
    cfg.style.epochs = *f.epochs;
    cfg.expansion.epochs = *f.epochs;
    cfg.refiner.epochs = *f.epochs;
  }
  cfg.propagate();
  cfg.validate();
  return cfg;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation:
      return 2;
    case ErrorKind::kMissingPrerequisite:
      return 3;
    case ErrorKind::kIo:
    case ErrorKind::kFormat:
      return 4;
  }
  return 1;
}

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "run configuration (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "global seed");
  cmd->add_option("--out", f.out, "run output directory");
  cmd->add_option("--workers", f.workers, "synthesis worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", f.epochs, "epochs for every trained stage")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fingerprint OCT volume synthesis pipeline"};
  app.require_subcommand(1);
  CommonFlags flags;

  auto* phantoms = app.add_subcommand("make-phantoms", "build the phantom OCT corpus");
  add_common(phantoms, flags);

  std::string stage_name;
  std::string manifest;
  auto* train = app.add_subcommand("train", "train one stage: style, expansion or refiner");
  add_common(train, flags);
  train->add_option("stage", stage_name, "stage to train")
      ->required()
      ->check(CLI::IsMember({"style", "expansion", "refiner"}));
  train->add_option("--manifest", manifest, "training manifest (default: <out>/phantoms)");

  std::optional<int> synth_ids, synth_imps;
  auto* synth = app.add_subcommand("synthesize", "generate the synthetic OCT dataset");
  add_common(synth, flags);
  synth->add_option("--identities", synth_ids, "synthetic identities")->check(CLI::PositiveNumber);
  synth->add_option("--impressions", synth_imps, "impressions per identity")->check(CLI::PositiveNumber);

  std::string real, fake;
  bool verification = false;
  auto* evaluate = app.add_subcommand("evaluate", "FVD/FID and optional verification report");
  add_common(evaluate, flags);
  evaluate->add_option("--real", real, "real manifest (default: <out>/phantoms)");
  evaluate->add_option("--fake", fake, "synthetic manifest (default: <out>/synth)");
  evaluate->add_flag("--verification", verification, "train the tiny embedder and report EER/TAR");

  std::string volume, views_dir;
  int junction_offset = 3;
  auto* views = app.add_subcommand("export-views", "write B-scan, z-mean and en-face PGM images");
  add_common(views, flags);
  views->add_option("volume", volume, "volume file")->required();
  views->add_option("dir", views_dir, "output directory (default: <out>/views)");
  views->add_option("--junction-offset", junction_offset, "junction depth below the surface, voxels (default 3)")->check(CLI::PositiveNumber);

  auto* show = app.add_subcommand("show-config", "print the effective configuration");
  add_common(show, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    PipelineConfig cfg = resolve_config(flags);
    if (*phantoms) {
      cmd_make_phantoms(cfg, std::cout);
    } else if (*train) {
      const fs::path m = manifest.empty() ? cfg.phantom_dir() / "manifest.json" : fs::path(manifest);
      cmd_train(parse_stage(stage_name), cfg, m, std::cout);
    } else if (*synth) {
      if (synth_ids) cfg.synth_identities = *synth_ids;
      if (synth_imps) cfg.synth_impressions = *synth_imps;
      cmd_synthesize(cfg, std::cout);
    } else if (*evaluate) {
      if (verification) cfg.verification = true;
      const fs::path r = real.empty() ? cfg.phantom_dir() / "manifest.json" : fs::path(real);
      const fs::path f = fake.empty() ? cfg.synth_dir() / "manifest.json" : fs::path(fake);
      std::cout << cmd_evaluate(cfg, r, f, std::cout).to_json();
    } else if (*views) {
      const fs::path dir = views_dir.empty() ? cfg.out / "views" : fs::path(views_dir);
      for (const auto& p : cmd_export_views(volume, dir, junction_offset)) {
        std::cout << p.string() << "\n";
      }
    } else if (*show) {
      std::cout << cfg.to_json();
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
