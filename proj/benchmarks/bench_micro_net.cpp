#include <benchmark/benchmark.h>

#include "extcam/micro_net.hpp"
#include "extcam/random.hpp"

using namespace extcam;

namespace {

Tensor random_image(const Shape& shape) {
  Xorshift64Star rng(2);
  Tensor t(shape);
  for (double& v : t.values()) v = rng.uniform();
  return t;
}

const char* arch_for(std::int64_t index) { return index == 0 ? "micro-vgg" : "micro-vgg-mlp"; }

void BM_Forward(benchmark::State& state) {
  const char* arch = arch_for(state.range(0));
  const Network net = seeded_init(arch, 3);
  const Tensor image = random_image(architecture_input_shape(arch));
  state.SetLabel(arch);
  for (auto _ : state) benchmark::DoNotOptimize(forward(net, image));
}
BENCHMARK(BM_Forward)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_BackwardToFeatureMap(benchmark::State& state) {
  const char* arch = arch_for(state.range(0));
  const Network net = seeded_init(arch, 3);
  const NetActivations acts = forward(net, random_image(architecture_input_shape(arch)));
  state.SetLabel(arch);
  for (auto _ : state) benchmark::DoNotOptimize(backward(net, acts, 0, GradTarget::last_feature_map));
}
BENCHMARK(BM_BackwardToFeatureMap)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_BackwardToInput(benchmark::State& state) {
  const Network net = seeded_init("micro-vgg", 3);
  const NetActivations acts = forward(net, random_image({3, 28, 28}));
  for (auto _ : state) benchmark::DoNotOptimize(backward(net, acts, 0, GradTarget::input));
}
BENCHMARK(BM_BackwardToInput)->Unit(benchmark::kMicrosecond);

// Diagonal second derivatives cost one dual-number pass per feature-map element.
void BM_SecondOrder(benchmark::State& state) {
  const Network net = seeded_init("micro-vgg", 3);
  const NetActivations acts = forward(net, random_image({3, 28, 28}));
  for (auto _ : state) benchmark::DoNotOptimize(backward(net, acts, 0, GradTarget::last_feature_map, 2));
}
BENCHMARK(BM_SecondOrder)->Unit(benchmark::kMillisecond);

}  // namespace
