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

#include <random>

#include <benchmark/benchmark.h>

#include "octsynth/expansion.hpp"
#include "octsynth/masterprint.hpp"
#include "octsynth/metrics.hpp"
#include "octsynth/nn.hpp"
#include "octsynth/phantom.hpp"
#include "octsynth/refiner.hpp"

namespace {

using namespace octsynth;

Volume3D noise_volume(int d, int h, int w) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> values(static_cast<std::size_t>(d) * h * w);
  for (float& x : values) x = u(rng);
  return Volume3D(d, h, w, std::move(values));
}

void BM_MasterPrint(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(synth_master_print(IdentitySpec::sample(seed++), n, n));
}
BENCHMARK(BM_MasterPrint)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_TpsWarp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto print = synth_master_print(IdentitySpec::sample(1), n, n);
  const auto warp = distortion_to_warp(DistortionSpec::sample(2, n, n), 0.04);
  for (auto _ : state) benchmark::DoNotOptimize(tps_warp_image(print, warp));
}
BENCHMARK(BM_TpsWarp)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_Phantom(benchmark::State& state) {
  const auto print = synth_master_print(IdentitySpec::sample(3), 64, 64);
  PhantomParams p;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_phantom(print, p));
    ++p.seed;
  }
}
BENCHMARK(BM_Phantom)->Unit(benchmark::kMillisecond);

void BM_Ssim3D(benchmark::State& state) {
  const auto a = noise_volume(8, 64, 64), b = noise_volume(8, 64, 64);
  for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}
BENCHMARK(BM_Ssim3D)->Unit(benchmark::kMillisecond);

void BM_Frechet(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> a(4 * dim, std::vector<double>(dim)), b = a;
  for (auto& r : a)
    for (double& x : r) x = g(rng);
  for (auto& r : b)
    for (double& x : r) x = g(rng) + 0.1;
  const auto sa = gaussian_stats(a), sb = gaussian_stats(b);
  for (auto _ : state) benchmark::DoNotOptimize(frechet_distance(sa, sb));
}
BENCHMARK(BM_Frechet)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Eer(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  ScoreSet s;
  for (int64_t i = 0; i < state.range(0); ++i) {
    s.genuine.push_back(g(rng) + 1.5);
    s.impostor.push_back(g(rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(eer(s));
}
BENCHMARK(BM_Eer)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_RandomConvEmbed(benchmark::State& state) {
  const RandomConvEmbedder e;
  const auto v = noise_volume(8, 64, 64);
  for (auto _ : state) benchmark::DoNotOptimize(e.embed(v));
}
BENCHMARK(BM_RandomConvEmbed)->Unit(benchmark::kMillisecond);

void BM_ExpansionForward(benchmark::State& state) {
  torch::NoGradGuard no_grad;
  seed_everything(0);
  ExpansionNet net(ExpansionConfig::desk());
  net->eval();
  const auto x = torch::rand({1, 1, 64, 64});
  for (auto _ : state) benchmark::DoNotOptimize(net->forward(x));
}
BENCHMARK(BM_ExpansionForward)->Unit(benchmark::kMillisecond);

void BM_RefinerForward(benchmark::State& state) {
  torch::NoGradGuard no_grad;
  seed_everything(0);
  RefinerGenerator gen(16);
  gen->eval();
  const auto x = torch::rand({1, 1, 8, 64, 64});
  for (auto _ : state) benchmark::DoNotOptimize(gen->forward(x));
}
BENCHMARK(BM_RefinerForward)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
