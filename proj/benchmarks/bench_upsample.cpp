#include <benchmark/benchmark.h>

#include "extcam/random.hpp"
#include "extcam/upsample.hpp"

using namespace extcam;

namespace {

SaliencyGrid random_grid(std::size_t cells) {
  Xorshift64Star rng(1);
  Tensor t({cells, cells});
  for (double& v : t.values()) v = rng.uniform();
  return SaliencyGrid{std::move(t), 0, Engine::extended_cam};
}

void BM_GaussianSeparable(benchmark::State& state) {
  const SaliencyGrid grid = random_grid(14);
  const auto side = static_cast<std::size_t>(state.range(0));
  GaussianOptions opt;
  opt.sigma_x = 31.7797;
  opt.sigma_y = 33.3606;
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_upsample(grid, side, side, opt));
}
BENCHMARK(BM_GaussianSeparable)->Arg(56)->Arg(112)->Arg(224)->Unit(benchmark::kMicrosecond);

// The quadruple loop the separable path replaces.
void BM_GaussianDirect(benchmark::State& state) {
  const SaliencyGrid grid = random_grid(14);
  const auto side = static_cast<std::size_t>(state.range(0));
  GaussianOptions opt;
  opt.sigma_x = 31.7797;
  opt.sigma_y = 33.3606;
  opt.path = GaussianPath::direct;
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_upsample(grid, side, side, opt));
}
BENCHMARK(BM_GaussianDirect)->Arg(56)->Arg(112)->Arg(224)->Unit(benchmark::kMillisecond);

void BM_Bilinear(benchmark::State& state) {
  const SaliencyGrid grid = random_grid(14);
  const auto side = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bilinear_upsample(grid, side, side));
}
BENCHMARK(BM_Bilinear)->Arg(56)->Arg(112)->Arg(224)->Unit(benchmark::kMicrosecond);

}  // namespace
