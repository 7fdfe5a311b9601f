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

#include "octsynth/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "octsynth/error.hpp"
#include "octsynth/masterprint.hpp"
#include "octsynth/rng.hpp"

namespace octsynth {
namespace {

using json = nlohmann::json;

json parse_object(const std::string& text) { return json::parse(text); }

json verifier_json(const TinyEmbedderConfig& c) {
  return {{"embedding_dim", c.embedding_dim}, {"base_channels", c.base_channels},
          {"epochs", c.epochs},               {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate}, {"holdout_impressions", c.holdout_impressions},
          {"seed", c.seed}};
}

TinyEmbedderConfig verifier_from(const json& j, TinyEmbedderConfig c) {
  c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
  c.base_channels = j.value("base_channels", c.base_channels);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.holdout_impressions = j.value("holdout_impressions", c.holdout_impressions);
  c.seed = j.value("seed", c.seed);
  return c;
}

/// Defaults patched with the user's object, so partial sections work.
std::string patched(const std::string& defaults, const json& root, const char* key) {
  json j = parse_object(defaults);
  if (root.contains(key)) j.merge_patch(root.at(key));
  return j.dump();
}

std::vector<const ManifestEntry*> training_entries(const PipelineConfig& cfg,
                                                   const DatasetManifest& m) {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : m.entries) {
    if (!is_holdout(cfg, e.identity_id)) out.push_back(&e);
  }
  if (out.empty()) throw ValidationError("no training entries outside the held-out identities");
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void log_epochs(std::ostream& log, const char* stage, const LossLog& l) {
  for (std::size_t e = 0; e < l.epochs(); ++e) {
    log << stage << " epoch " << e + 1 << "/" << l.epochs() << " loss " << l.total(e) << "\n";
  }
}

std::string rel(int identity, int impression, const char* file) {
  return "id_" + std::to_string(identity) + "/imp_" + std::to_string(impression) + "/" + file;
}

}  // namespace

// --- config -----------------------------------------------------------------------------

PipelineConfig PipelineConfig::desk(int epochs) {
  PipelineConfig c;
  c.style.epochs = epochs;
  c.expansion.epochs = epochs;
  c.refiner.epochs = epochs;
  c.propagate();
  return c;
}

void PipelineConfig::propagate() {
  phantom.depth = depth;
  style.resolution = height;
  expansion.depth = depth;
  expansion.height = height;
  expansion.width = width;
  refiner.depth = depth;
  refiner.height = height;
  refiner.width = width;
  style.seed = derive_seed(seed, {1});
  expansion.seed = derive_seed(seed, {2});
  refiner.seed = derive_seed(seed, {3});
  verifier.seed = derive_seed(seed, {4});
}

void PipelineConfig::validate() const {
  if (format_version != kFormatVersion) {
    throw ValidationError("unsupported config format_version " + std::to_string(format_version));
  }
  if (height != width) throw ValidationError("the style stage needs square images");
  if (depth < 8 || height < 64) throw ValidationError("resolution must be at least 8x64x64");
  if (identities < 1 || impressions < 1) throw ValidationError("dataset sizes must be >= 1");
  if (holdout_every != 0 && holdout_every < 2) {
    throw ValidationError("holdout_every must be 0 (no hold-out) or >= 2");
  }
  if (!(distortion_magnitude > 0.0)) throw ValidationError("distortion magnitude must be positive");
  if (synth_identities < 1 || synth_impressions < 1) throw ValidationError("synthesis sizes must be >= 1");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (bscan_stride < 1 || embedder_dim < 1) throw ValidationError("invalid evaluation settings");
  phantom.validate();
  style.validate();
  expansion.validate();
  refiner.validate();
  if (phantom.depth != depth || style.resolution != height || expansion.depth != depth ||
      expansion.height != height || expansion.width != width || refiner.depth != depth ||
      refiner.height != height || refiner.width != width) {
    throw ValidationError("stage resolutions disagree with the pipeline resolution");
  }
}

std::string PipelineConfig::to_json() const {
  json j = {{"format_version", format_version},
            {"seed", seed},
            {"resolution", {{"depth", depth}, {"height", height}, {"width", width}}},
            {"dataset",
             {{"identities", identities},
              {"impressions", impressions},
              {"distortion_magnitude", distortion_magnitude},
              {"holdout_every", holdout_every}}},
            {"phantom", parse_object(phantom.to_json())},
            {"style", parse_object(style.to_json())},
            {"expansion", parse_object(expansion.to_json())},
            {"refiner", parse_object(refiner.to_json())},
            {"verifier", verifier_json(verifier)},
            {"synthesis",
             {{"identities", synth_identities},
              {"impressions", synth_impressions},
              {"workers", workers}}},
            {"evaluation",
             {{"embedder_seed", embedder_seed},
              {"embedder_dim", embedder_dim},
              {"bscan_stride", bscan_stride},
              {"verification", verification}}},
            {"out", out.string()}};
  return j.dump(2) + "\n";
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  PipelineConfig c = desk();
  try {
    const json j = json::parse(text);
    c.format_version = j.value("format_version", c.format_version);
    c.seed = j.value("seed", c.seed);
    if (j.contains("resolution")) {
      const auto& r = j.at("resolution");
      c.depth = r.value("depth", c.depth);
      c.height = r.value("height", c.height);
      c.width = r.value("width", c.width);
    }
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      c.identities = d.value("identities", c.identities);
      c.impressions = d.value("impressions", c.impressions);
      c.distortion_magnitude = d.value("distortion_magnitude", c.distortion_magnitude);
      c.holdout_every = d.value("holdout_every", c.holdout_every);
    }
    // Shapes come from "resolution"; patch them in before sub-config validation.
    c.propagate();
    c.phantom = PhantomParams::from_json(patched(c.phantom.to_json(), j, "phantom"));
    c.style = StyleStageConfig::from_json(patched(c.style.to_json(), j, "style"));
    c.expansion = ExpansionConfig::from_json(patched(c.expansion.to_json(), j, "expansion"));
    c.refiner = RefinerConfig::from_json(patched(c.refiner.to_json(), j, "refiner"));
    if (j.contains("verifier")) c.verifier = verifier_from(j.at("verifier"), c.verifier);
    if (j.contains("synthesis")) {
      const auto& s = j.at("synthesis");
      c.synth_identities = s.value("identities", c.synth_identities);
      c.synth_impressions = s.value("impressions", c.synth_impressions);
      c.workers = s.value("workers", c.workers);
    }
    if (j.contains("evaluation")) {
      const auto& e = j.at("evaluation");
      c.embedder_seed = e.value("embedder_seed", c.embedder_seed);
      c.embedder_dim = e.value("embedder_dim", c.embedder_dim);
      c.bscan_stride = e.value("bscan_stride", c.bscan_stride);
      c.verification = e.value("verification", c.verification);
    }
    c.out = j.value("out", c.out.string());
  } catch (const json::exception& e) {
    throw ValidationError(std::string("pipeline config: ") + e.what());
  }
  c.propagate();
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("config not found: " + path.string());
  const auto bytes = read_file_bytes(path);
  return from_json(std::string(bytes.begin(), bytes.end()));
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kStyle:
      return "style";
    case Stage::kExpansion:
      return "expansion";
    case Stage::kRefiner:
      return "refiner";
  }
  return "?";
}

Stage parse_stage(std::string_view s) {
  if (s == "style") return Stage::kStyle;
  if (s == "expansion") return Stage::kExpansion;
  if (s == "refiner") return Stage::kRefiner;
  throw ValidationError("unknown stage '" + std::string(s) + "'");
}

bool is_holdout(const PipelineConfig& cfg, int identity_id) {
  return cfg.holdout_every > 0 && identity_id % cfg.holdout_every == cfg.holdout_every - 1;
}

// --- make-phantoms ---------------------------------------------------------------------------

DatasetManifest cmd_make_phantoms(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  PhantomDatasetOptions o;
  o.identities = cfg.identities;
  o.impressions = cfg.impressions;
  o.height = cfg.height;
  o.width = cfg.width;
  o.distortion_magnitude = cfg.distortion_magnitude;
  o.params = cfg.phantom;
  o.master_seed = cfg.seed;
  auto m = build_phantom_dataset(o, cfg.phantom_dir());
  std::size_t held = 0;
  for (const auto& e : m.entries) held += is_holdout(cfg, e.identity_id) ? 1 : 0;
  log << "phantoms: " << cfg.identities << " identities x " << cfg.impressions
      << " impressions = " << m.entries.size() << " volumes (" << held << " held out) -> "
      << (cfg.phantom_dir() / "manifest.json").string() << "\n";
  return m;
}

// --- train -----------------------------------------------------------------------------------

std::vector<RefinerPair> refiner_pairs(const ExpansionModel& expansion,
                                       const DatasetManifest& manifest,
                                       const std::vector<const ManifestEntry*>& entries) {
  std::vector<RefinerPair> pairs;
  pairs.reserve(entries.size());
  for (const auto* e : entries) {
    pairs.push_back({expansion.expand(read_image(manifest.resolve(*e, "zmean"))),
                     read_volume(manifest.resolve(*e, "volume"))});
  }
  return pairs;
}

TrainOutcome cmd_train(Stage stage, const PipelineConfig& cfg,
                       const std::filesystem::path& manifest_path, std::ostream& log) {
  cfg.validate();
  if (!std::filesystem::exists(manifest_path)) {
    throw MissingPrerequisiteError("missing dataset manifest: " + manifest_path.string());
  }
  const DatasetManifest manifest = load_manifest(manifest_path);
  const auto train = training_entries(cfg, manifest);
  std::filesystem::create_directories(cfg.checkpoint_dir());

  TrainOutcome out;
  out.checkpoint = cfg.checkpoint(std::string(to_string(stage)));
  out.loss_csv = cfg.loss_csv(std::string(to_string(stage)));
  switch (stage) {
    case Stage::kStyle: {
      std::vector<StylePair> pairs;
      ExemplarPool pool;
      for (const auto* e : train) {
        pairs.push_back({read_binary_image(manifest.resolve(*e, "print")),
                         read_image(manifest.resolve(*e, "zmean"))});
        pool.add(e->category, pairs.back().target);
      }
      pool.validate();
      auto result = train_style_stage(pairs, pool, cfg.style);
      pool.save(cfg.checkpoint_dir());
      result.model.save(out.checkpoint);
      out.log = std::move(result.log);
      break;
    }
    case Stage::kExpansion: {
      std::vector<ExpansionPair> pairs;
      for (const auto* e : train) {
        pairs.push_back({read_image(manifest.resolve(*e, "zmean")),
                         read_volume(manifest.resolve(*e, "volume"))});
      }
      auto result = train_expansion(pairs, cfg.expansion);
      result.model.save(out.checkpoint);
      out.log = std::move(result.log);
      break;
    }
    case Stage::kRefiner: {
      const auto expansion = ExpansionModel::load(cfg.checkpoint("expansion"));
      auto result = train_refiner(refiner_pairs(expansion, manifest, train), cfg.refiner);
      result.model.save(out.checkpoint);
      out.log = std::move(result.log);
      break;
    }
  }
  out.log.write_csv(out.loss_csv);
  log_epochs(log, to_string(stage).data(), out.log);
  log << to_string(stage) << ": trained on " << train.size() << " samples -> "
      << out.checkpoint.string() << "\n";
  return out;
}

// --- synthesize ------------------------------------------------------------------------------

SynthesisResult cmd_synthesize(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto style = StyleModel::load(cfg.checkpoint("style"));
  const auto pool = ExemplarPool::load(cfg.checkpoint_dir());
  const auto expansion = ExpansionModel::load(cfg.checkpoint("expansion"));
  const auto refiner = RefinerModel::load(cfg.checkpoint("refiner"));
  if (style.config().resolution != cfg.height || expansion.config().depth != cfg.depth ||
      expansion.config().height != cfg.height || refiner.config().depth != cfg.depth ||
      refiner.config().height != cfg.height) {
    throw ValidationError("checkpoints were trained at a different resolution");
  }

  const auto root = cfg.synth_dir();
  const int h = cfg.height, w = cfg.width;
  SynthesisResult result;
  result.manifest.root = root;

  std::vector<BinaryImage2D> masters;
  std::vector<std::uint64_t> identity_seeds;
  for (int id = 0; id < cfg.synth_identities; ++id) {
    identity_seeds.push_back(derive_seed(cfg.seed, {0x5717, static_cast<std::uint64_t>(id)}));
    masters.push_back(synth_master_print(IdentitySpec::sample(identity_seeds.back()), h, w));
    write_binary_image(masters.back(), root / ("id_" + std::to_string(id)) / "identity.p2v");
  }

  const std::size_t total = static_cast<std::size_t>(cfg.synth_identities) * cfg.synth_impressions;
  result.records.resize(total);
  result.manifest.entries.resize(total);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  auto work = [&] {
    torch::NoGradGuard no_grad;
    for (std::size_t k = next++; k < total; k = next++) {
      try {
        const int id = static_cast<int>(k / cfg.synth_impressions);
        const int imp = static_cast<int>(k % cfg.synth_impressions);
        const auto t0 = std::chrono::steady_clock::now();
        SynthesisRecord rec;
        rec.identity_id = id;
        rec.impression_id = imp;
        rec.identity_seed = identity_seeds[id];
        rec.impression_seed = derive_seed(rec.identity_seed, {static_cast<std::uint64_t>(imp)});

        const auto spec = DistortionSpec::sample(rec.impression_seed, h, w);
        const BinaryImage2D i_m = crop_impression(
            tps_warp_image(masters[id], distortion_to_warp(spec, cfg.distortion_magnitude)), spec);
        const Category cat = content_category(i_m);
        const Image2D i_s = style.transfer(i_m, pool.pick(cat, rec.impression_seed));
        const Volume3D v_e = expansion.expand(i_s);
        const Volume3D v_r = refiner.refine(v_e);

        ManifestEntry e;
        e.identity_id = id;
        e.impression_id = imp;
        e.category = cat;
        e.seed = rec.impression_seed;
        e.paths = {{"identity", "id_" + std::to_string(id) + "/identity.p2v"},
                   {"print", rel(id, imp, "print.p2v")},
                   {"styled", rel(id, imp, "styled.p2v")},
                   {"structural", rel(id, imp, "structural.p2v")},
                   {"volume", rel(id, imp, "volume.p2v")},
                   {"zmean", rel(id, imp, "zmean.p2v")}};
        write_binary_image(i_m, root / e.paths.at("print"));
        write_image(i_s, root / e.paths.at("styled"));
        write_volume(v_e, root / e.paths.at("structural"));
        write_volume(v_r, root / e.paths.at("volume"));
        write_image(z_mean_projection(v_r), root / e.paths.at("zmean"));

        rec.identity_print = e.paths.at("identity");
        rec.impression_print = e.paths.at("print");
        rec.styled = e.paths.at("styled");
        rec.structural = e.paths.at("structural");
        rec.refined = e.paths.at("volume");
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.records[k] = std::move(rec);
        result.manifest.entries[k] = std::move(e);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int workers = std::min<int>(cfg.workers, static_cast<int>(total));
  std::vector<std::thread> pool_threads;
  for (int i = 1; i < workers; ++i) pool_threads.emplace_back(work);
  work();
  for (auto& t : pool_threads) t.join();
  if (error) std::rethrow_exception(error);

  save_manifest(result.manifest, root / "manifest.json");
  log << "synthesize: " << cfg.synth_identities << " identities x " << cfg.synth_impressions
      << " impressions = " << total << " records -> " << (root / "manifest.json").string() << "\n";
  return result;
}

// --- evaluate --------------------------------------------------------------------------------

std::string EvaluationReport::to_json() const {
  json j = {{"embedder", embedder},
            {"real_count", real_count},
            {"fake_count", fake_count},
            {"fvd_structural", fvd_structural},
            {"fvd_refined", fvd_refined},
            {"fid_structural", fid_structural},
            {"fid_refined", fid_refined}};
  if (has_verification) {
    j["verification"] = {{"eer", eer}, {"tar_at_far_0.001", tar_at_far_1e3},
                         {"tar_at_far_0.01", tar_at_far_1e2}};
  }
  return j.dump(2) + "\n";
}

double evaluate_feature_files(const std::filesystem::path& a, const std::filesystem::path& b) {
  const auto fa = read_features(a);
  const auto fb = read_features(b);
  if (fa.empty() || fb.empty() || fa.front().size() != fb.front().size()) {
    throw ValidationError("embedder mismatch: feature files differ in dimension");
  }
  return frechet_from_features(fa, fb);
}

EvaluationReport cmd_evaluate(const PipelineConfig& cfg, const std::filesystem::path& real_manifest,
                              const std::filesystem::path& fake_manifest, std::ostream& log) {
  cfg.validate();
  for (const auto& p : {real_manifest, fake_manifest}) {
    if (!std::filesystem::exists(p)) throw MissingPrerequisiteError("missing manifest: " + p.string());
  }
  const auto real = load_manifest(real_manifest);
  const auto fake = load_manifest(fake_manifest);
  if (real.entries.empty() || fake.entries.empty()) throw ValidationError("manifests must not be empty");
  const std::string structural_stage = fake.has_stage("structural") ? "structural" : "volume";

  auto volumes = [](const DatasetManifest& m, const std::string& stage) {
    std::vector<Volume3D> out;
    for (const auto& e : m.entries) out.push_back(read_volume(m.resolve(e, stage)));
    return out;
  };
  auto slices = [&](const std::vector<Volume3D>& vs) {
    std::vector<Image2D> out;
    for (const auto& v : vs) {
      auto s = bscan_slices(v, cfg.bscan_stride);
      out.insert(out.end(), s.begin(), s.end());
    }
    return out;
  };

  const RandomConvEmbedder emb(cfg.embedder_seed, cfg.embedder_dim);
  const auto real_v = volumes(real, "volume");
  const auto fake_e = volumes(fake, structural_stage);
  const auto fake_r = volumes(fake, "volume");

  const auto eval_dir = cfg.out / "eval";
  const auto f_real = embed_all(emb, real_v);
  const auto f_struct = embed_all(emb, fake_e);
  const auto f_refined = embed_all(emb, fake_r);
  write_features(f_real, eval_dir / "features_real.p2f");
  write_features(f_struct, eval_dir / "features_structural.p2f");
  write_features(f_refined, eval_dir / "features_refined.p2f");

  EvaluationReport r;
  r.embedder = emb.id();
  r.real_count = real_v.size();
  r.fake_count = fake_r.size();
  r.fvd_structural = frechet_from_features(f_real, f_struct);
  r.fvd_refined = frechet_from_features(f_real, f_refined);
  const auto s_real = embed_all(emb, slices(real_v));
  r.fid_structural = frechet_from_features(s_real, embed_all(emb, slices(fake_e)));
  r.fid_refined = frechet_from_features(s_real, embed_all(emb, slices(fake_r)));

  if (cfg.verification) {
    // Train on the synthetic set, verify on the real one.
    TinyEmbedderConfig vc = cfg.verifier;
    vc.holdout_impressions = 0;
    const auto verifier = tiny_embedder_train(fake, vc);
    std::vector<int> labels;
    for (const auto& e : real.entries) labels.push_back(e.identity_id);
    const auto scores = all_pairs_scores(embed_all(verifier, real_v), labels);
    write_scores(scores, eval_dir / "scores.txt");
    r.has_verification = true;
    r.eer = eer(scores);
    r.tar_at_far_1e3 = tar_at_far(scores, 1e-3);
    r.tar_at_far_1e2 = tar_at_far(scores, 1e-2);
  }

  write_text(cfg.out / "report.json", r.to_json());
  log << "evaluate: fvd_structural " << r.fvd_structural << " fvd_refined " << r.fvd_refined
      << " fid_structural " << r.fid_structural << " fid_refined " << r.fid_refined << "\n";
  return r;
}

// --- export-views ----------------------------------------------------------------------------

void write_pgm(const Image2D& img, const std::filesystem::path& path) {
  std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  for (float v : img.values()) {
    bytes.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)));
  }
  write_file_bytes(path, bytes);
}

Image2D read_pgm(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
    return t;
  };
  if (token() != "P5") throw FormatError("bad magic", path.string());
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(token());
    h = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw FormatError("bad header", path.string());
  }
  if (maxval != 255 || w <= 0 || h <= 0) throw FormatError("unsupported dtype", path.string());
  ++pos;  // single whitespace after maxval
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() < pos + n) throw FormatError("truncated payload", path.string());
  if (bytes.size() > pos + n) throw FormatError("trailing bytes", path.string());
  std::vector<float> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = bytes[pos + i] / 255.0f;
  return Image2D(h, w, std::move(v));
}

std::vector<std::filesystem::path> cmd_export_views(const std::filesystem::path& volume_path,
                                                    const std::filesystem::path& out_dir,
                                                    int junction_offset) {
  if (!std::filesystem::exists(volume_path)) {
    throw IoError("cannot read volume " + volume_path.string());
  }
  if (junction_offset < 1) throw ValidationError("junction offset must be >= 1");
  const Volume3D v = read_volume(volume_path);
  std::vector<std::filesystem::path> written;
  for (int row : {v.height() / 4, v.height() / 2, 3 * v.height() / 4}) {
    written.push_back(out_dir / ("bscan_y" + std::to_string(row) + ".pgm"));
    write_pgm(v.bscan(row), written.back());
  }
  written.push_back(out_dir / "zmean.pgm");
  write_pgm(z_mean_projection(v), written.back());

  const DepthMap surface = detect_surface(v, static_cast<float>(otsu_threshold(v.values())), 1);
  DepthMap junction(surface.height(), surface.width());
  for (int y = 0; y < surface.height(); ++y) {
    for (int x = 0; x < surface.width(); ++x) {
      junction(y, x) = std::min(surface(y, x) + junction_offset, v.depth() - 1);
    }
  }
  written.push_back(out_dir / "enface_surface.pgm");
  write_pgm(extract_enface_layer(v, surface, 1), written.back());
  written.push_back(out_dir / "enface_junction.pgm");
  write_pgm(extract_enface_layer(v, junction, 1), written.back());
  return written;
}

}  // namespace octsynth
