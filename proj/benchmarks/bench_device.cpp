/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <benchmark/benchmark.h>

#include "ktram/device.hpp"
#include "ktram/rng.hpp"
#include "ktram/synapse.hpp"

using namespace ktram;

static void BM_TransitionProbabilities(benchmark::State& state) {
  const DeviceParams params = preset_params(DeviceVariant::W);
  double v = 0.8;
  for (auto _ : state) {
    benchmark::DoNotOptimize(transition_probabilities(params, v, 50e-9));
    v = -v;
  }
}
BENCHMARK(BM_TransitionProbabilities);

static void BM_ApplyPulseMeanField(benchmark::State& state) {
  const DeviceParams params = preset_params(DeviceVariant::W);
  DeviceState device = DeviceState::mean_field(0.5);
  double v = 0.8;
  for (auto _ : state) {
    device = apply_pulse(device, params, v, 50e-9);
    benchmark::DoNotOptimize(device);
    v = -v;
  }
}
BENCHMARK(BM_ApplyPulseMeanField);

static void BM_ApplyPulseStochastic(benchmark::State& state) {
  DeviceParams params = preset_params(DeviceVariant::W);
  params.n_switches = static_cast<std::uint32_t>(state.range(0));
  DeviceState device = DeviceState::stochastic(params.n_switches / 2);
  RandomStream rng(1);
  double v = 0.8;
  for (auto _ : state) {
    device = apply_pulse(device, params, v, 50e-9, &rng);
    benchmark::DoNotOptimize(device);
    v = -v;
  }
  state.SetItemsProcessed(state.iterations() * params.n_switches);
}
BENCHMARK(BM_ApplyPulseStochastic)->Arg(1000)->Arg(10000);

static void BM_SynapseRead(benchmark::State& state) {
  const DeviceParams params = preset_params(DeviceVariant::W);
  Synapse synapse = Synapse::mean_field(0.6, 0.4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(read(synapse, params, ReadPolarity::Forward, 0.2, 50e-9));
  }
}
BENCHMARK(BM_SynapseRead);

BENCHMARK_MAIN();
