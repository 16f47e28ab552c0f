#include <benchmark/benchmark.h>

#include <cmath>

#include "extcam/erf.hpp"
#include "extcam/random.hpp"

using namespace extcam;

namespace {

Tensor noisy_gaussian(std::size_t side) {
  Xorshift64Star rng(4);
  const double c = static_cast<double>(side) / 2.0, s = static_cast<double>(side) / 7.0;
  Tensor m({side, side});
  for (std::size_t x = 0; x < side; ++x) {
    for (std::size_t y = 0; y < side; ++y) {
      const double dx = double(x) - c, dy = double(y) - c;
      m.at(x, y) = std::exp(-(dx * dx + dy * dy) / (2 * s * s)) + rng.uniform(-0.01, 0.01);
    }
  }
  return m;
}

void BM_FitGaussian2d(benchmark::State& state) {
  const Tensor m = noisy_gaussian(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_gaussian2d(m));
}
BENCHMARK(BM_FitGaussian2d)->Arg(28)->Arg(56)->Arg(224)->Unit(benchmark::kMillisecond);

}  // namespace
