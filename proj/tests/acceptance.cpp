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

// Runs every acceptance criterion and prints one PASS/FAIL line per item.
// Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "octsynth/error.hpp"
#include "octsynth/expansion.hpp"
#include "octsynth/masterprint.hpp"
#include "octsynth/metrics.hpp"
#include "octsynth/pipeline.hpp"
#include "octsynth/refiner.hpp"
#include "octsynth/style_transfer.hpp"
#include "support.hpp"

namespace {

using namespace octsynth;
using octsynth::testing::brute_eer;
using octsynth::testing::brute_tar;
using octsynth::testing::gradient_check;
using octsynth::testing::reference_ssim;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

/// Accumulates named checks; the first failure is kept for the report.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++n_;
    if (!ok && failure_.empty()) failure_ = what;
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream os;
    os.precision(12);
    os << what << ": got " << got << ", want " << want << " +- " << tol;
    expect(std::abs(got - want) <= tol, os.str());
  }
  Outcome done(const std::string& summary) const {
    if (!failure_.empty()) return {false, failure_};
    return {true, summary + " (" + std::to_string(n_) + " checks)"};
  }

 private:
  int n_ = 0;
  std::string failure_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// --- 1 ------------------------------------------------------------------------------------

Outcome tps_exactness() {
  Checks c;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 0.05);
  auto points = [&](int n) {
    std::vector<Point2> p;
    for (int i = 0; i < n; ++i) p.push_back({u(rng), u(rng)});
    return p;
  };
  double worst_cp = 0.0, worst_affine = 0.0, worst_identity = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto cps = points(6 + trial);
    std::vector<Point2> d;
    for (std::size_t i = 0; i < cps.size(); ++i) d.push_back({g(rng), g(rng)});
    const auto w = fit_tps(cps, d);
    for (std::size_t i = 0; i < cps.size(); ++i) {
      const auto q = w.apply(cps[i]);
      worst_cp = std::max({worst_cp, std::abs(q.y - cps[i].y - d[i].y), std::abs(q.x - cps[i].x - d[i].x)});
    }
  }
  const double a[2][3] = {{1.05, -0.1, 0.02}, {0.07, 0.95, -0.03}};
  const auto cps = points(10);
  std::vector<Point2> d;
  for (const auto& p : cps) {
    d.push_back({a[0][0] * p.y + a[0][1] * p.x + a[0][2] - p.y, a[1][0] * p.y + a[1][1] * p.x + a[1][2] - p.x});
  }
  const auto aff = fit_tps(cps, d);
  const auto ident = fit_tps(cps, std::vector<Point2>(cps.size()));
  for (const auto& p : points(1000)) {
    const auto q = aff.apply(p);
    worst_affine = std::max({worst_affine, std::abs(q.y - (a[0][0] * p.y + a[0][1] * p.x + a[0][2])),
                             std::abs(q.x - (a[1][0] * p.y + a[1][1] * p.x + a[1][2]))});
    const auto r = ident.apply(p);
    worst_identity = std::max({worst_identity, std::abs(r.y - p.y), std::abs(r.x - p.x)});
  }
  c.expect(worst_cp <= 1e-8, "control point error " + fmt(worst_cp));
  c.expect(worst_affine <= 1e-8, "affine error " + fmt(worst_affine));
  c.expect(worst_identity == 0.0, "zero displacement moved a point by " + fmt(worst_identity));
  return c.done("max control-point error " + fmt(worst_cp) + ", affine " + fmt(worst_affine) +
                ", identity " + fmt(worst_identity));
}

// --- 2 ------------------------------------------------------------------------------------

Outcome adain_statistics() {
  Checks c;
  torch::manual_seed(2);
  double worst_mean = 0.0, worst_std = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto x = torch::randn({2, 4, 8, 8}, torch::kFloat64) * 3.0 - 1.0;
    const auto mu = torch::randn({2, 4}, torch::kFloat64) * 2.0;
    const auto sd = torch::rand({2, 4}, torch::kFloat64) * 2.0 + 0.1;
    const auto flat = adain(x, mu, sd).view({2, 4, -1});
    const auto m = flat.mean(2);
    const auto s = (flat - m.unsqueeze(2)).pow(2).mean(2).sqrt();
    worst_mean = std::max(worst_mean, (m - mu).abs().max().item<double>());
    worst_std = std::max(worst_std, (s - sd).abs().max().item<double>());
  }
  const auto x = torch::randn({1, 3, 6, 6}, torch::kFloat64);
  const auto flat = x.view({1, 3, -1});
  const auto m = flat.mean(2);
  const auto s = (flat - m.unsqueeze(2)).pow(2).mean(2).add(1e-5).sqrt();
  const double identity = (adain(x, m, s) - x).abs().max().item<double>();
  c.expect(worst_mean <= 1e-5, "mean error " + fmt(worst_mean));
  c.expect(worst_std <= 1e-4, "std error " + fmt(worst_std));
  c.expect(identity <= 1e-5, "identity error " + fmt(identity));
  return c.done("max mean error " + fmt(worst_mean) + ", std " + fmt(worst_std) + ", identity " +
                fmt(identity));
}

// --- 3 ------------------------------------------------------------------------------------

Outcome csl_closed_forms() {
  Checks c;
  torch::manual_seed(3);
  for (int m : {1, 5, 15}) {
    const auto a = torch::randn({1, 32}, torch::kFloat64);
    const auto negs = a.unsqueeze(1).expand({1, m, 32}).contiguous() * 2.0;
    c.near(csl_loss(a, a * 0.5, negs, 0.07).item<double>(), std::log(m + 1.0), 1e-6,
           "m=" + std::to_string(m));
  }
  const auto p = torch::randn({3, 8}, torch::kFloat64);
  const auto n = torch::randn({3, 15, 8}, torch::kFloat64);
  const auto a = torch::randn({3, 8}, torch::kFloat64);
  const double err = gradient_check([&](const torch::Tensor& x) { return csl_loss(x, p, n, 0.07); }, a);
  c.expect(err < 1e-6, "gradient relative error " + fmt(err));
  return c.done("ln(m+1) for m in {1,5,15}; gradient relative error " + fmt(err));
}

// --- 4 ------------------------------------------------------------------------------------

Outcome ssim_checks() {
  Checks c;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Image2D a(24, 24);
  for (float& v : a.values()) v = u(rng);
  Volume3D va(6, 12, 12);
  for (float& v : va.values()) v = u(rng);
  c.near(ssim(a, a), 1.0, 1e-9, "ssim(a,a) 2D");
  c.near(ssim(va, va), 1.0, 1e-9, "ssim(a,a) 3D");
  const double c1 = 1e-4;
  const double hand = (2 * 0.2 * 0.8 + c1) / (0.2 * 0.2 + 0.8 * 0.8 + c1);
  const double got = ssim(Image2D(32, 32, 0.2f), Image2D(32, 32, 0.8f));
  c.near(got, hand, 1e-6, "constant 0.2 vs 0.8");
  c.near(ssim(Volume3D(8, 16, 16, 0.2f), Volume3D(8, 16, 16, 0.8f)), hand, 1e-6, "constant 3D");
  torch::manual_seed(4);
  const auto b = torch::rand({1, 1, 4, 4, 4}, torch::kFloat64);
  const auto x = torch::rand({1, 1, 4, 4, 4}, torch::kFloat64);
  const double err = gradient_check(
      [&](const torch::Tensor& t) { return ssim_tensor(t, b, SsimOptions::volume()); }, x);
  c.expect(err < 1e-4, "3D-SSIM gradient relative error " + fmt(err));
  return c.done("constant case " + fmt(got) + " vs " + fmt(hand) + "; gradient error " + fmt(err));
}

// --- 5 ------------------------------------------------------------------------------------

GaussianStats make_stats(std::vector<double> mean, std::vector<double> cov) {
  const auto n = static_cast<Eigen::Index>(mean.size());
  GaussianStats s;
  s.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), n);
  s.covariance = Eigen::Map<Eigen::MatrixXd>(cov.data(), n, n);
  return s;
}

Outcome frechet_checks() {
  Checks c;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> fa, fb;
  for (int i = 0; i < 40; ++i) {
    fa.push_back({g(rng), g(rng), g(rng) * 2});
    fb.push_back({g(rng) + 1, g(rng) * 0.5, g(rng)});
  }
  const auto sa = gaussian_stats(fa), sb = gaussian_stats(fb);
  const double same = frechet_distance(sa, sa);
  c.expect(same < 1e-8, "identical stats gave " + fmt(same));
  c.near(frechet_distance(make_stats({0}, {1}), make_stats({1}, {1})), 1.0, 1e-10, "N(0,1) vs N(1,1)");
  c.near(frechet_distance(make_stats({0, 0}, {1, 0, 0, 4}), make_stats({0, 0}, {4, 0, 0, 1})), 2.0,
         1e-8, "commuting diagonal");
  c.near(frechet_distance(sa, sb), frechet_distance(sb, sa), 1e-8, "symmetry");
  return c.done("identical " + fmt(same) + ", 1D 1.0, diagonal 2.0, symmetric");
}

// --- 6 ------------------------------------------------------------------------------------

Outcome eer_tar_checks() {
  Checks c;
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> size(2, 100);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> coarse(0, 12);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    ScoreSet s;
    const bool ties = t % 3 == 0;
    const int ng = size(rng), ni = size(rng);
    for (int i = 0; i < ng; ++i) s.genuine.push_back(ties ? coarse(rng) / 12.0 + 0.15 : g(rng) + 1.2);
    for (int i = 0; i < ni; ++i) s.impostor.push_back(ties ? coarse(rng) / 12.0 : g(rng));
    worst = std::max(worst, std::abs(eer(s) - brute_eer(s)));
    for (double far : {1e-3, 1e-2, 0.1}) worst = std::max(worst, std::abs(tar_at_far(s, far) - brute_tar(s, far)));
  }
  c.expect(worst <= 1e-9, "deviation from brute force " + fmt(worst));
  c.near(eer(ScoreSet{{0.9, 0.8, 0.7}, {0.1, 0.2, 0.3}}), 0.0, 0.0, "separated EER");
  std::vector<double> same;
  for (int i = 0; i < 50; ++i) same.push_back(g(rng));
  c.near(eer(ScoreSet{same, same}), 0.5, 1e-12, "identical distributions EER");
  return c.done("max deviation from brute-force sweep " + fmt(worst) + " over 50 sets");
}

// --- 7 ------------------------------------------------------------------------------------

int closed_form_axis(int n) {
  for (int i = 0; i < 4; ++i) n = n >= 2 ? (n + 2 * 1 - 4) / 2 + 1 : (n + 2 * 1 - 3) / 1 + 1;
  return n;
}

Outcome shape_contracts() {
  Checks c;
  torch::NoGradGuard no_grad;
  {
    ExpansionNet desk(ExpansionConfig::desk());
    desk->eval();
    const auto out = desk->forward(torch::rand({1, 1, 64, 64}));
    c.expect(out.sizes() == torch::IntArrayRef({1, 1, 8, 64, 64}), "desk expansion shape");
  }
  {
    ExpansionNet full(ExpansionConfig{});
    full->eval();
    const auto out = full->forward(torch::rand({1, 1, 256, 256}));
    c.expect(out.sizes() == torch::IntArrayRef({1, 1, 32, 256, 256}), "full expansion shape");
  }
  for (auto [d, h, w] : {std::array<int, 3>{8, 64, 64}, std::array<int, 3>{32, 256, 256}}) {
    RefinerGenerator gen(16);
    gen->eval();
    const auto in = torch::rand({1, 1, d, h, w});
    c.expect(gen->forward(in).sizes() == in.sizes(), "refiner shape at D=" + std::to_string(d));
    PatchDiscriminator3D disc(d, h, w, 16);
    disc->eval();
    const auto grid = disc->forward(in).sizes();
    const auto want = patch_grid_3d(d, h, w);
    c.expect(grid[2] == want[0] && grid[3] == want[1] && grid[4] == want[2],
             "discriminator grid at D=" + std::to_string(d));
    c.expect(want[0] == closed_form_axis(d) && want[1] == closed_form_axis(h) &&
                 want[2] == closed_form_axis(w),
             "closed-form grid at D=" + std::to_string(d));
  }
  const auto g1 = patch_grid_3d(8, 64, 64), g2 = patch_grid_3d(32, 256, 256);
  return c.done("1x64x64 -> 1x8x64x64, 1x256x256 -> 1x32x256x256; grids " + std::to_string(g1[0]) +
                "x" + std::to_string(g1[1]) + "x" + std::to_string(g1[2]) + " and " +
                std::to_string(g2[0]) + "x" + std::to_string(g2[1]) + "x" + std::to_string(g2[2]));
}

// --- 8 ------------------------------------------------------------------------------------

Outcome loss_plumbing() {
  Checks c;
  torch::manual_seed(8);
  const auto pred = torch::rand({1, 1, 6, 10, 10}, torch::kFloat64) * 0.9 + 0.05;
  const auto real = torch::rand({1, 1, 6, 10, 10}, torch::kFloat64);
  const std::vector<double> p(pred.data_ptr<double>(), pred.data_ptr<double>() + pred.numel());
  const std::vector<double> r(real.data_ptr<double>(), real.data_ptr<double>() + real.numel());
  double bce = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) bce -= r[i] * std::log(p[i]) + (1 - r[i]) * std::log(1 - p[i]);
  bce /= static_cast<double>(p.size());
  const double independent = bce + (1.0 - reference_ssim(p, r, 6, 10, 10, 7, 1.5));
  c.near(expansion_loss(pred, real).item<double>(), independent, 1e-8, "expansion loss");

  const auto logits = torch::zeros({1, 1, 1, 4, 4}, torch::kFloat64);
  const auto v0 = torch::zeros({1, 1, 2, 4, 4}, torch::kFloat64);
  const auto v1 = torch::full({1, 1, 2, 4, 4}, 0.1, torch::kFloat64);
  c.near(refiner_objective(logits, v0, v1, 10.0).item<double>(), std::log(2.0) + 1.0, 1e-8,
         "refiner objective");

  const auto tiny_real = torch::rand({1, 1, 4, 4, 4}, torch::kFloat64);
  const auto tiny_pred = torch::rand({1, 1, 4, 4, 4}, torch::kFloat64) * 0.8 + 0.1;
  const double e1 = gradient_check([&](const torch::Tensor& x) { return expansion_loss(x, tiny_real); },
                                   tiny_pred);
  const auto d_logits = torch::randn({1, 1, 1, 2, 2}, torch::kFloat64);
  const double e2 = gradient_check(
      [&](const torch::Tensor& x) { return refiner_objective(d_logits, tiny_real, x, 10.0); }, tiny_pred);
  const double e3 = gradient_check(
      [&](const torch::Tensor& x) { return refiner_objective(x, tiny_real, tiny_pred, 10.0); }, d_logits);
  c.expect(e1 < 1e-4, "expansion gradient error " + fmt(e1));
  c.expect(e2 < 1e-4, "refiner L1 gradient error " + fmt(e2));
  c.expect(e3 < 1e-4, "refiner adversarial gradient error " + fmt(e3));
  return c.done("gradient errors " + fmt(e1) + ", " + fmt(e2) + ", " + fmt(e3));
}

// --- 9-12 -----------------------------------------------------------------------------------

struct SmokeRun {
  PipelineConfig cfg;
  std::vector<LossLog> logs;
  SynthesisResult synth;
  double seconds = 0.0;
  bool ok = false;
  std::string error;
};

SmokeRun& smoke(const fs::path& work) {
  static SmokeRun run;
  static bool started = false;
  if (started) return run;
  started = true;
  run.cfg = PipelineConfig::desk(5);
  run.cfg.out = work / "smoke";
  std::ostringstream log;
  const auto t0 = Clock::now();
  try {
    fs::remove_all(run.cfg.out);
    cmd_make_phantoms(run.cfg, log);
    const auto manifest = run.cfg.phantom_dir() / "manifest.json";
    for (Stage s : {Stage::kStyle, Stage::kExpansion, Stage::kRefiner}) {
      run.logs.push_back(cmd_train(s, run.cfg, manifest, log).log);
    }
    run.synth = cmd_synthesize(run.cfg, log);
    run.ok = true;
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  run.seconds = seconds_since(t0);
  return run;
}

Outcome end_to_end_smoke(const fs::path& work) {
  auto& run = smoke(work);
  if (!run.ok) return {false, "pipeline failed: " + run.error};
  Checks c;
  std::ostringstream curve;
  const char* names[] = {"style", "expansion", "refiner"};
  for (std::size_t i = 0; i < run.logs.size(); ++i) {
    const auto& l = run.logs[i];
    const double first = l.total(0), last = l.total(l.epochs() - 1);
    c.expect(l.epochs() == 5, std::string(names[i]) + " ran " + std::to_string(l.epochs()) + " epochs");
    c.expect(last < first, std::string(names[i]) + " loss " + fmt(first) + " -> " + fmt(last));
    curve << names[i] << " " << fmt(first) << "->" << fmt(last) << "; ";
  }
  for (const auto& r : run.synth.records) {
    const auto v = read_volume(run.cfg.synth_dir() / r.refined);
    bool in_range = true;
    for (float x : v.values()) in_range = in_range && std::isfinite(x) && x >= 0.0f && x <= 1.0f;
    c.expect(v.depth() == 8 && v.height() == 64 && v.width() == 64, "V_R shape " + v.shape_string());
    c.expect(in_range, "V_R value outside [0,1]");
    for (const auto& p : {r.identity_print, r.impression_print, r.styled, r.structural, r.refined}) {
      c.expect(fs::exists(run.cfg.synth_dir() / p), "missing artifact " + p.string());
    }
  }
  c.expect(run.seconds < 15 * 60, "smoke took " + fmt(run.seconds) + " s");
  return c.done(curve.str() + std::to_string(run.synth.records.size()) + " V_R volumes; " +
                fmt(run.seconds) + " s");
}

Outcome directional_fvd(const fs::path& work) {
  auto& run = smoke(work);
  if (!run.ok) return {false, "pipeline failed: " + run.error};
  Checks c;
  std::ostringstream log;
  const auto real = run.cfg.phantom_dir() / "manifest.json";
  const auto t0 = Clock::now();
  const auto r = cmd_evaluate(run.cfg, real, run.cfg.synth_dir() / "manifest.json", log);
  const double eval_seconds = seconds_since(t0);
  c.expect(r.fvd_refined <= r.fvd_structural,
           "fvd_refined " + fmt(r.fvd_refined) + " > fvd_structural " + fmt(r.fvd_structural));
  auto same_cfg = run.cfg;
  same_cfg.out = work / "smoke_identical";
  const auto same = cmd_evaluate(same_cfg, real, real, log);
  for (double v : {same.fvd_structural, same.fvd_refined, same.fid_structural, same.fid_refined}) {
    c.expect(v < 1e-6, "identical-set distance " + fmt(v));
  }
  c.expect(run.seconds + eval_seconds < 15 * 60, "smoke plus evaluation took " + fmt(run.seconds + eval_seconds));
  return c.done("fvd " + fmt(r.fvd_structural) + " -> " + fmt(r.fvd_refined) + ", fid " +
                fmt(r.fid_structural) + " -> " + fmt(r.fid_refined) + "; identical-set max " +
                fmt(std::max({same.fvd_structural, same.fvd_refined, same.fid_structural, same.fid_refined})));
}

Outcome directional_zmean(const fs::path& work) {
  auto& run = smoke(work);
  if (!run.ok) return {false, "pipeline failed: " + run.error};
  const auto model = ExpansionModel::load(run.cfg.checkpoint("expansion"));
  const auto m = load_manifest(run.cfg.phantom_dir() / "manifest.json");
  double sum = 0.0, lo = 1.0;
  int n = 0;
  for (const auto& e : m.entries) {
    if (!is_holdout(run.cfg, e.identity_id)) continue;
    const auto tmpl = read_image(m.resolve(e, "zmean"));
    const double s = ssim(z_mean_projection(model.expand(tmpl)), tmpl);
    sum += s;
    lo = std::min(lo, s);
    ++n;
  }
  if (n == 0) return {false, "no held-out phantoms"};
  const double mean = sum / n;
  return {mean > 0.6, "mean SSIM " + fmt(mean) + " (min " + fmt(lo) + ") over " + std::to_string(n) +
                          " held-out phantoms"};
}

std::vector<fs::path> tree(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
  }
  std::sort(files.begin(), files.end());
  return files;
}

Outcome determinism(const fs::path& work) {
  // Same chain twice, the second with several synthesis workers.
  auto run_chain = [&](const fs::path& out, int workers) {
    auto cfg = PipelineConfig::desk(2);
    cfg.identities = 8;
    cfg.impressions = 2;
    cfg.synth_identities = 2;
    cfg.synth_impressions = 3;
    cfg.verification = true;
    cfg.verifier.epochs = 2;
    cfg.workers = workers;
    cfg.out = out;
    fs::remove_all(out);
    std::ostringstream log;
    cmd_make_phantoms(cfg, log);
    const auto manifest = cfg.phantom_dir() / "manifest.json";
    for (Stage s : {Stage::kStyle, Stage::kExpansion, Stage::kRefiner}) cmd_train(s, cfg, manifest, log);
    cmd_synthesize(cfg, log);
    cmd_evaluate(cfg, manifest, cfg.synth_dir() / "manifest.json", log);
  };
  const auto a = work / "determinism_a", b = work / "determinism_b";
  run_chain(a, 1);
  run_chain(b, 3);
  const auto fa = tree(a), fb = tree(b);
  if (fa != fb) return {false, "runs produced different file sets"};
  for (const auto& f : fa) {
    if (read_file_bytes(a / f) != read_file_bytes(b / f)) return {false, "differs: " + f.string()};
  }
  return {true, std::to_string(fa.size()) + " files byte-identical across two runs (1 vs 3 workers)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string work = (fs::temp_directory_path() / "octsynth_acceptance").string();
  std::vector<int> only;
  bool keep = false;
  app.add_option("--work", work, "scratch directory");
  app.add_option("--only", only, "run only these criteria");
  app.add_flag("--keep", keep, "keep the scratch directory");
  CLI11_PARSE(app, argc, argv);

  const fs::path dir = work;
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"tps-exactness", tps_exactness},
      {"adain-statistics", adain_statistics},
      {"csl-closed-forms", csl_closed_forms},
      {"ssim", ssim_checks},
      {"frechet-distance", frechet_checks},
      {"eer-tar", eer_tar_checks},
      {"shape-contracts", shape_contracts},
      {"loss-plumbing", loss_plumbing},
      {"end-to-end-smoke", [&] { return end_to_end_smoke(dir); }},
      {"directional-fvd", [&] { return directional_fvd(dir); }},
      {"directional-zmean-ssim", [&] { return directional_zmean(dir); }},
      {"determinism", [&] { return determinism(dir); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2d %-24s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  if (!keep) fs::remove_all(dir);
  return failed == 0 ? 0 : 1;
}
