/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

// End-to-end acceptance suite. Each check prints one PASS/FAIL line with the
// measured values and its wall-clock budget; the process exit code is the
// number of failed checks.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ktram/core.hpp"
#include "ktram/dataset.hpp"
#include "ktram/device.hpp"
#include "ktram/learners.hpp"
#include "ktram/rng.hpp"
#include "ktram/synapse.hpp"
#include "support/run_cli.hpp"

using namespace ktram;
using ktram_tests::run_cli;
using ktram_tests::slurp_file;

namespace {

int failures = 0;

class Timer {
public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

void report(int index, const std::string& name, bool pass, const std::string& detail,
            double elapsed, double budget) {
  const bool in_budget = elapsed < budget;
  const bool ok = pass && in_budget;
  failures += ok ? 0 : 1;
  std::printf("[%s] %d %s: %s (%.2fs of %.0fs budget)\n", ok ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str(), elapsed, budget);
  std::fflush(stdout);
}

std::string cli_path() {
  const char* cli = std::getenv("KTRAM_CLI");
  if (cli == nullptr) {
    std::fprintf(stderr, "KTRAM_CLI must point at the ktram binary\n");
    std::exit(99);
  }
  return cli;
}

std::filesystem::path data_dir() {
  const char* dir = std::getenv("KTRAM_DATA_DIR");
  if (dir == nullptr) {
    std::fprintf(stderr, "KTRAM_DATA_DIR must point at the repo data/ directory\n");
    std::exit(99);
  }
  return dir;
}

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "ktram_acceptance";
  std::filesystem::create_directories(dir);
  return dir;
}

Synapse synapse_with_weight(const DeviceParams& params, double w, double sum_n = 0.7) {
  const double ratio = params.w_on / params.w_off;
  const double diff_n = w * (2.0 + (ratio - 1.0) * sum_n) / (ratio - 1.0);
  return Synapse::mean_field((sum_n + diff_n) / 2.0, (sum_n - diff_n) / 2.0);
}

// ---------------------------------------------------------------------------
// 1. Pulse-sweep shape: bidirectional, incremental, read-disturb bounded.
// ---------------------------------------------------------------------------
void check_sweep_shape() {
  Timer timer;
  const auto trace_path = scratch_dir() / "sweep.csv";
  const auto result =
      run_cli(cli_path(), "device sweep --preset W --out '" + trace_path.string() + "'",
              scratch_dir());

  bool pass = result.exit_code == 0;
  std::string detail = "cli exit " + std::to_string(result.exit_code);
  if (pass) {
    std::ifstream in(trace_path);
    std::string line;
    std::getline(in, line); // config echo
    std::getline(in, line); // header

    int up_activations = 0;
    int down_activations = 0;
    double previous_n = 0.5;
    double previous_g = 0.0;
    {
      // reconstruct the starting conductance from the preset
      const DeviceParams params = preset_params(DeviceVariant::W);
      previous_g = conductance(DeviceState::mean_field(0.5), params);
    }
    double max_step = 0.0;
    double max_read_dg = 0.0;
    double activation_dg_sum = 0.0;
    int activation_count = 0;
    bool shape_ok = true;

    while (std::getline(in, line)) {
      std::istringstream row(line);
      std::string field;
      std::getline(row, field, ','); // step
      std::getline(row, field, ',');
      const double volts = std::stod(field);
      std::getline(row, field, ','); // seconds
      std::getline(row, field, ',');
      const double n = std::stod(field);
      std::getline(row, field, ',');
      const double g = std::stod(field);

      const double dn = n - previous_n;
      const double dg = g - previous_g;
      if (volts == 0.8) {
        shape_ok = shape_ok && dg > 0.0;
        up_activations += dg > 0.0;
        max_step = std::max(max_step, std::abs(dn));
        activation_dg_sum += std::abs(dg);
        ++activation_count;
      } else if (volts == -0.8) {
        shape_ok = shape_ok && dg < 0.0;
        down_activations += dg < 0.0;
        max_step = std::max(max_step, std::abs(dn));
        activation_dg_sum += std::abs(dg);
        ++activation_count;
      } else {
        max_read_dg = std::max(max_read_dg, std::abs(dg));
      }
      previous_n = n;
      previous_g = g;
    }
    const double mean_activation_dg = activation_dg_sum / activation_count;
    const double read_ratio = max_read_dg / mean_activation_dg;
    pass = shape_ok && up_activations == 20 && down_activations == 20 && max_step < 0.5 &&
           read_ratio < 0.10;
    std::ostringstream text;
    text << up_activations << " strict rises, " << down_activations
         << " strict falls, max pulse step " << max_step << " < 0.5, read/activation "
         << read_ratio << " < 0.10";
    detail = text.str();
  }
  report(1, "pulse-sweep shape", pass, detail, timer.seconds(), 1.0);
}

// ---------------------------------------------------------------------------
// 2. Mean-field trace matches the Monte Carlo oracle within 0.01 everywhere.
// ---------------------------------------------------------------------------
void check_oracle_equivalence() {
  Timer timer;
  DeviceParams params = preset_params(DeviceVariant::W);
  params.n_switches = 10'000;

  std::vector<Pulse> train;
  for (int i = 0; i < 50; ++i) train.push_back({0.8, 50e-9});
  for (int i = 0; i < 50; ++i) train.push_back({-0.8, 50e-9});
  for (int i = 0; i < 50; ++i) train.push_back({i % 2 ? -0.8 : 0.8, 50e-9});
  for (int i = 0; i < 50; ++i) train.push_back({0.2, 50e-9});

  const auto oracle = mc_trace_oracle(params, train, 100, 4242);
  DeviceState state = DeviceState::mean_field(0.5);
  double max_diff = 0.0;
  for (std::size_t step = 0; step < train.size(); ++step) {
    state = apply_pulse(state, params, train[step].volts, train[step].seconds);
    max_diff = std::max(max_diff, std::abs(state.on_fraction - oracle[step]));
  }
  std::ostringstream text;
  text << "200-pulse train, 10000 switches, 100 trials, max |mean-field - oracle| = " << max_diff
       << " <= 0.01";
  report(2, "oracle equivalence", max_diff <= 0.01, text.str(), timer.seconds(), 30.0);
}

// ---------------------------------------------------------------------------
// 3. Forward reads drive a synapse to the forgetful state.
// ---------------------------------------------------------------------------
void check_forgetful_decay() {
  Timer timer;
  const DeviceParams params = preset_params(DeviceVariant::W);
  Synapse synapse = synapse_with_weight(params, 0.5);
  const double start = weight(synapse, params);
  for (int i = 0; i < 1000; ++i) {
    read(synapse, params, ReadPolarity::Forward, 0.2, 50e-9);
  }
  const double final_weight = std::abs(weight(synapse, params));
  std::ostringstream text;
  text << "|w| " << start << " -> " << final_weight << " < 0.05 after 1000 reads";
  report(3, "forgetful-state decay", std::abs(start - 0.5) < 1e-9 && final_weight < 0.05,
         text.str(), timer.seconds(), 1.0);
}

// ---------------------------------------------------------------------------
// 4. Bundled separable set reaches 99% train accuracy on 10 seeds.
// ---------------------------------------------------------------------------
void check_separable_classification() {
  Timer timer;
  const auto csv = data_dir() / "separable.csv";
  int passing_seeds = 0;
  double worst = 1.0;
  for (int seed = 1; seed <= 10; ++seed) {
    const auto result = run_cli(cli_path(),
                                "bench classify --data '" + csv.string() + "' --epochs 20 --seed " +
                                    std::to_string(seed),
                                scratch_dir());
    double accuracy = 0.0;
    const std::string needle = "final train accuracy ";
    const auto at = result.out.find(needle);
    if (result.exit_code == 0 && at != std::string::npos) {
      accuracy = std::stod(result.out.substr(at + needle.size()));
    }
    worst = std::min(worst, accuracy);
    passing_seeds += accuracy >= 0.99;
  }
  std::ostringstream text;
  text << passing_seeds << "/10 seeds >= 0.99 train accuracy, worst " << worst;
  report(4, "separable classification", passing_seeds == 10, text.str(), timer.seconds(), 10.0);
}

// ---------------------------------------------------------------------------
// 5. Image benchmark at desk scale: 10k train / 2k held out, error <= 15%.
// Uses an IDX corpus from KTRAM_MNIST_DIR when provided, otherwise the
// bundled deterministic synthetic digit generator.
// ---------------------------------------------------------------------------
void check_image_benchmark() {
  Timer timer;
  Dataset train;
  Dataset test;
  std::string source;
  if (const char* mnist_dir = std::getenv("KTRAM_MNIST_DIR")) {
    const std::filesystem::path dir(mnist_dir);
    Dataset full_train =
        load_idx((dir / "train-images-idx3-ubyte").string(), (dir / "train-labels-idx1-ubyte").string());
    Dataset full_test =
        load_idx((dir / "t10k-images-idx3-ubyte").string(), (dir / "t10k-labels-idx1-ubyte").string());
    auto take = [](const Dataset& data, std::size_t count) {
      Dataset subset;
      subset.feature_dim = data.feature_dim;
      subset.features.assign(data.features.begin(),
                             data.features.begin() + count * data.feature_dim);
      subset.labels.assign(data.labels.begin(), data.labels.begin() + count);
      return subset;
    };
    train = take(full_train, 10'000);
    test = take(full_test, 2'000);
    source = "external corpus";
  } else {
    // Generated, written as IDX and reloaded so the full container path is
    // exercised at scale.
    const auto train_images = scratch_dir() / "digits-train.idx";
    const auto train_labels = scratch_dir() / "digits-train-labels.idx";
    const auto test_images = scratch_dir() / "digits-test.idx";
    const auto test_labels = scratch_dir() / "digits-test-labels.idx";
    write_idx(synthetic_digits(10'000, 1234), train_images.string(), train_labels.string());
    write_idx(synthetic_digits(2'000, 5678), test_images.string(), test_labels.string());
    train = load_idx(train_images.string(), train_labels.string());
    test = load_idx(test_images.string(), test_labels.string());
    source = "synthetic digits";
  }

  const EncoderConfig encoder{0.5, true};
  ClassifierOptions options;
  options.max_labels = 10;
  options.core.seed = 42;
  Classifier model(static_cast<std::uint32_t>(train.feature_dim), options);

  RandomStream shuffle_rng(7);
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<std::uint8_t> best;
  double best_accuracy = -1.0;
  for (int epoch = 0; epoch < 10; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(shuffle_rng.next_unit() * static_cast<double>(i));
      std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    for (std::size_t i : order) {
      model.fit_step(encode_threshold(train.sample(i), encoder), train.labels[i]);
    }
    const double train_accuracy = evaluate(model, train, encoder).accuracy;
    if (train_accuracy > best_accuracy) {
      best_accuracy = train_accuracy;
      best = model.snapshot();
    }
  }
  model.restore(best);

  const double error = 1.0 - evaluate(model, test, encoder).accuracy;
  std::ostringstream text;
  text << source << ", 10000 train / 2000 held out, error " << error << " <= 0.15";
  report(5, "image benchmark at scale", error <= 0.15, text.str(), timer.seconds(), 300.0);
}

// ---------------------------------------------------------------------------
// 6. Unsupervised feedback parks each pattern in a stable attractor.
// ---------------------------------------------------------------------------
void check_attractor_stability() {
  Timer timer;
  int passing_seeds = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CoreConfig config;
    config.rows = 1;
    config.cols = 33;
    config.seed = seed;
    Core core(config);
    std::vector<Address> allocation(33);
    for (Address i = 0; i < 33; ++i) allocation[i] = i;
    const NodeId node = core.alloc_node(allocation);

    SpikeSet pattern_a;
    SpikeSet pattern_b;
    for (Address i = 1; i <= 16; ++i) pattern_a.insert(i);
    for (Address i = 17; i <= 32; ++i) pattern_b.insert(i);

    std::vector<int> signs_a;
    std::vector<int> signs_b;
    const Instruction fu = parse_instruction("FU");
    for (int presentation = 0; presentation < 250; ++presentation) {
      signs_a.push_back(core.execute(node, pattern_a, fu) >= 0.0 ? 1 : -1);
      signs_b.push_back(core.execute(node, pattern_b, fu) >= 0.0 ? 1 : -1);
    }
    const auto stability = [](const std::vector<int>& signs) {
      int positive = 0;
      for (std::size_t i = signs.size() - 50; i < signs.size(); ++i) {
        positive += signs[i] == 1;
      }
      return std::max(positive, 50 - positive) / 50.0;
    };
    if (stability(signs_a) >= 0.95 && stability(signs_b) >= 0.95) {
      ++passing_seeds;
    }
  }
  std::ostringstream text;
  text << passing_seeds << "/10 seeds with both patterns >= 95% sign-stable over the trailing "
          "100 presentations";
  report(6, "attractor stability", passing_seeds >= 8, text.str(), timer.seconds(), 10.0);
}

// ---------------------------------------------------------------------------
// 7. Anomaly separation between disjoint pattern families, 20 seeds pooled.
// ---------------------------------------------------------------------------
void check_anomaly_separation() {
  Timer timer;
  int family_b_flagged = 0;
  int family_b_total = 0;
  int family_a_flagged = 0;
  int family_a_total = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    AnomalyOptions options;
    options.core.seed = seed;
    AnomalyDetector model(48, options);
    RandomStream pattern_rng(seed * 977 + 3);
    const auto family_sample = [&pattern_rng](std::uint32_t base) {
      SpikeSet spikes;
      for (std::uint32_t i = 0; i < 24; ++i) {
        if (pattern_rng.bernoulli(0.5)) {
          spikes.insert(base + 1 + i);
        }
      }
      if (spikes.empty()) {
        spikes.insert(base + 1);
      }
      return spikes;
    };
    for (int i = 0; i < 500; ++i) {
      model.fit(family_sample(0));
    }
    for (int i = 0; i < 50; ++i) {
      ++family_b_total;
      family_b_flagged += model.score(family_sample(24)) > 3.0;
      ++family_a_total;
      family_a_flagged += model.score(family_sample(0)) > 3.0;
    }
  }
  const double b_rate = static_cast<double>(family_b_flagged) / family_b_total;
  const double a_rate = static_cast<double>(family_a_flagged) / family_a_total;
  std::ostringstream text;
  text << "disjoint-support flagged " << b_rate * 100 << "% >= 90%, held-out false flags "
       << a_rate * 100 << "% < 5%";
  report(7, "anomaly separation", b_rate >= 0.90 && a_rate < 0.05, text.str(), timer.seconds(),
         30.0);
}

// ---------------------------------------------------------------------------
// 8. Determinism and persistence.
// ---------------------------------------------------------------------------
void check_determinism_persistence() {
  Timer timer;
  bool pass = true;
  std::ostringstream text;

  // (a) identical seeds give byte-identical trace and state files
  const auto trace_a = scratch_dir() / "det_a.csv";
  const auto trace_b = scratch_dir() / "det_b.csv";
  pass &= run_cli(cli_path(),
                  "device sweep --preset W --mode stochastic --seed 5 --out '" +
                      trace_a.string() + "'",
                  scratch_dir())
              .exit_code == 0;
  pass &= run_cli(cli_path(),
                  "device sweep --preset W --mode stochastic --seed 5 --out '" +
                      trace_b.string() + "'",
                  scratch_dir())
              .exit_code == 0;
  const bool traces_equal = slurp_file(trace_a) == slurp_file(trace_b);
  pass &= traces_equal;

  const auto state_a = scratch_dir() / "det_a.state";
  const auto state_b = scratch_dir() / "det_b.state";
  run_cli(cli_path(), "core save --state '" + state_a.string() + "' --rows 6 --cols 6 --seed 5",
          scratch_dir());
  run_cli(cli_path(), "core save --state '" + state_b.string() + "' --rows 6 --cols 6 --seed 5",
          scratch_dir());
  const bool states_equal =
      !slurp_file(state_a).empty() && slurp_file(state_a) == slurp_file(state_b);
  pass &= states_equal;

  // (b) save -> load -> save is a bitwise fixed point in both modes
  bool fixed_point = true;
  for (UpdateMode mode : {UpdateMode::MeanField, UpdateMode::Stochastic}) {
    CoreConfig config;
    config.rows = 5;
    config.cols = 5;
    config.seed = 99;
    config.mode = mode;
    Core core(config);
    std::vector<Address> allocation(10);
    for (Address i = 0; i < 10; ++i) allocation[i] = i;
    const NodeId node = core.alloc_node(allocation);
    for (int i = 0; i < 9; ++i) {
      core.execute(node, SpikeSet{1, 3, 8}, parse_instruction(i % 2 ? "FU" : "FH"));
    }
    const auto bytes = core.save_state();
    fixed_point = fixed_point && Core::load_state(bytes).save_state() == bytes;
  }
  pass &= fixed_point;

  // (c) post-load behavior matches pre-save behavior over 10 executes
  CoreConfig config;
  config.rows = 4;
  config.cols = 4;
  config.seed = 2026;
  config.mode = UpdateMode::Stochastic;
  config.renorm_interval = 1000;
  Core original(config);
  const NodeId warm = original.alloc_node(std::vector<Address>{0, 1, 2, 3, 4, 5, 6, 7});
  for (int i = 0; i < 5; ++i) {
    original.execute(warm, SpikeSet{2, 5}, parse_instruction("FU"));
  }
  original.free_node(warm);
  const auto snapshot = original.save_state();
  Core replica = Core::load_state(snapshot);
  const NodeId node_a = original.alloc_node(std::vector<Address>{0, 1, 2, 3, 4, 5, 6, 7});
  const NodeId node_b = replica.alloc_node(std::vector<Address>{0, 1, 2, 3, 4, 5, 6, 7});
  bool behavior_equal = true;
  const char* program[10] = {"FH", "FU", "FZ", "RL", "FU", "FH", "RZ", "FA", "FU", "FH"};
  for (int i = 0; i < 10; ++i) {
    const double y_original =
        original.execute(node_a, SpikeSet{1, 4, 7}, parse_instruction(program[i]));
    const double y_replica =
        replica.execute(node_b, SpikeSet{1, 4, 7}, parse_instruction(program[i]));
    behavior_equal = behavior_equal && y_original == y_replica;
  }
  pass &= behavior_equal;

  text << "traces " << (traces_equal ? "identical" : "DIFFER") << ", states "
       << (states_equal ? "identical" : "DIFFER") << ", save/load/save "
       << (fixed_point ? "fixed point" : "NOT fixed point") << ", 10 post-load executes "
       << (behavior_equal ? "bit-identical" : "DIFFER");
  report(8, "determinism and persistence", pass, text.str(), timer.seconds(), 60.0);
}

} // namespace

int main() {
  std::printf("ktram acceptance suite\n");
  check_sweep_shape();
  check_oracle_equivalence();
  check_forgetful_decay();
  check_separable_classification();
  check_image_benchmark();
  check_attractor_stability();
  check_anomaly_separation();
  check_determinism_persistence();
  std::printf("%s: %d of 8 checks failed\n", failures == 0 ? "OK" : "FAILED", failures);
  return failures;
}
