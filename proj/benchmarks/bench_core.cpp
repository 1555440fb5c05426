/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "ktram/core.hpp"
#include "ktram/dataset.hpp"
#include "ktram/learners.hpp"

using namespace ktram;

static void BM_ExecuteBySpikeCount(benchmark::State& state) {
  CoreConfig config;
  config.rows = 1;
  config.cols = 1025;
  Core core(config);
  std::vector<Address> allocation(config.cols);
  std::iota(allocation.begin(), allocation.end(), 0u);
  const NodeId node = core.alloc_node(allocation);

  std::vector<Address> active(static_cast<std::size_t>(state.range(0)));
  std::iota(active.begin(), active.end(), 1u);
  const SpikeSet spikes(active);
  const Instruction fu = parse_instruction("FU");

  for (auto _ : state) {
    benchmark::DoNotOptimize(core.execute(node, spikes, fu));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ExecuteBySpikeCount)->Arg(16)->Arg(128)->Arg(1024);

static void BM_SaveState(benchmark::State& state) {
  CoreConfig config;
  config.rows = 64;
  config.cols = 64;
  Core core(config);
  for (auto _ : state) {
    benchmark::DoNotOptimize(core.save_state());
  }
}
BENCHMARK(BM_SaveState);

static void BM_ClassifierFitStep(benchmark::State& state) {
  const Dataset digits = synthetic_digits(256, 7);
  const EncoderConfig encoder{0.5, true};
  ClassifierOptions options;
  options.max_labels = 10;
  Classifier model(static_cast<std::uint32_t>(digits.feature_dim), options);
  std::size_t index = 0;
  for (auto _ : state) {
    model.fit_step(encode_threshold(digits.sample(index), encoder), digits.labels[index]);
    index = (index + 1) % digits.size();
  }
}
BENCHMARK(BM_ClassifierFitStep);

BENCHMARK_MAIN();
