/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ktram/config.hpp"
#include "ktram/core.hpp"
#include "ktram/dataset.hpp"
#include "ktram/errors.hpp"
#include "ktram/learners.hpp"
#include "ktram/version.hpp"

using namespace ktram;

namespace {

// Exit codes: 0 success, 1 usage, 2 data/file, 3 invariant/limit violation.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInvariant = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> preset;
  std::string config_path;
};

/// Effective run configuration after merging env var, config file and flags
/// (flags win, the KTRAM_SEED env var is the lowest-precedence seed source).
struct RunConfig {
  std::uint64_t seed = 42;
  UpdateMode mode = UpdateMode::MeanField;
  DeviceVariant variant = DeviceVariant::W;
  DeviceParams params = preset_params(DeviceVariant::W);
  double v_read = 0.2;
  double v_write = 0.8;
  double t_pulse = 50e-9;
  std::uint32_t renorm_interval = 100;
  bool renorm_from_user = false; // when false, learners keep their own cadence

  std::string echo() const;

  CoreOptions core_options() const {
    CoreOptions options;
    options.params = params;
    options.v_read = v_read;
    options.v_write = v_write;
    options.t_pulse = t_pulse;
    options.renorm_interval = renorm_interval;
    options.mode = mode;
    options.seed = seed;
    return options;
  }
};

UpdateMode mode_from_name(const std::string& name) {
  if (name == "meanfield") return UpdateMode::MeanField;
  if (name == "stochastic") return UpdateMode::Stochastic;
  throw UsageError("unknown mode '" + name + "', valid: meanfield, stochastic");
}

RunConfig resolve_config(const GlobalFlags& flags) {
  RunConfig run;

  if (const char* env_seed = std::getenv("KTRAM_SEED")) {
    try {
      run.seed = std::stoull(env_seed);
    } catch (const std::exception&) {
      throw UsageError(std::string("KTRAM_SEED is not an unsigned integer: ") + env_seed);
    }
  }

  std::optional<KeyValueFile> config;
  if (!flags.config_path.empty()) {
    config = KeyValueFile::parse_file(flags.config_path);
    if (const auto value = config->get("", "seed")) run.seed = config->get_u64("", "seed");
    if (const auto value = config->get("", "preset")) {
      run.variant = variant_from_name(*value);
    }
    if (const auto value = config->get("", "mode")) run.mode = mode_from_name(*value);
  }

  if (flags.preset) run.variant = variant_from_name(*flags.preset);
  if (flags.mode) run.mode = mode_from_name(*flags.mode);
  if (flags.seed) run.seed = *flags.seed;

  run.params = preset_params(run.variant);
  if (config) {
    // A [device] section overrides the preset record, unless the preset was
    // forced on the command line (flags win).
    if (config->has_section("device") && !flags.preset) {
      run.params = params_from_config(*config, "device");
    }
    if (const auto value = config->get("", "v_read")) run.v_read = config->get_double("", "v_read");
    if (const auto value = config->get("", "v_write"))
      run.v_write = config->get_double("", "v_write");
    if (const auto value = config->get("", "t_pulse"))
      run.t_pulse = config->get_double("", "t_pulse");
    if (const auto value = config->get("", "renorm_interval")) {
      run.renorm_interval = static_cast<std::uint32_t>(config->get_u64("", "renorm_interval"));
      run.renorm_from_user = true;
    }
  }
  return run;
}

// Shortest decimal form that round-trips to the same double; deterministic,
// so identical runs emit byte-identical files.
std::string format_num(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::string RunConfig::echo() const {
  std::ostringstream out;
  out << "ktram " << kVersionString << " seed=" << seed << " mode="
      << (mode == UpdateMode::MeanField ? "meanfield" : "stochastic")
      << " preset=" << variant_name(variant) << " v_read=" << format_num(v_read)
      << " v_write=" << format_num(v_write) << " t_pulse=" << format_num(t_pulse)
      << " renorm_interval=" << renorm_interval << " n_switches=" << params.n_switches
      << " v_on=" << format_num(params.v_on) << " v_off=" << format_num(params.v_off)
      << " tau=" << format_num(params.tau) << " beta=" << format_num(params.beta);
  return out.str();
}

std::ofstream open_output(const std::string& path, const RunConfig& run) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write output file: " + path);
  }
  out << "# " << run.echo() << "\n";
  return out;
}

// -------------------------------------------------------------------------
// device sweep
// -------------------------------------------------------------------------

std::vector<Pulse> default_sweep_train() {
  // 20 forward and 20 reverse 0.8 V activation pulses at 50 ns, each followed
  // by a 0.2 V read pulse.
  std::vector<Pulse> train;
  for (int i = 0; i < 20; ++i) {
    train.push_back({0.8, 50e-9});
    train.push_back({0.2, 50e-9});
  }
  for (int i = 0; i < 20; ++i) {
    train.push_back({-0.8, 50e-9});
    train.push_back({0.2, 50e-9});
  }
  return train;
}

std::vector<Pulse> load_pulse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open pulse file: " + path);
  }
  std::vector<Pulse> train;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw DataError(path + " line " + std::to_string(line_no) + ": expected volts,seconds");
    }
    try {
      train.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    } catch (const std::exception&) {
      if (line_no == 1) continue; // tolerate a header row
      throw DataError(path + " line " + std::to_string(line_no) + ": expected volts,seconds");
    }
  }
  if (train.empty()) {
    throw DataError(path + ": no pulses");
  }
  return train;
}

int run_device_sweep(const RunConfig& run, const std::string& out_path,
                     const std::string& pulses_path) {
  const std::vector<Pulse> train =
      pulses_path.empty() ? default_sweep_train() : load_pulse_file(pulses_path);

  RandomStream rng(run.seed);
  DeviceState state = run.mode == UpdateMode::MeanField
                          ? DeviceState::mean_field(0.5)
                          : DeviceState::stochastic((run.params.n_switches + 1) / 2);

  std::ofstream out = open_output(out_path, run);
  out << "step,volts,seconds,on_fraction,conductance_S\n";
  for (std::size_t step = 0; step < train.size(); ++step) {
    state = apply_pulse(state, run.params, train[step].volts, train[step].seconds, &rng);
    out << (step + 1) << "," << format_num(train[step].volts) << ","
        << format_num(train[step].seconds) << "," << format_num(state.fraction(run.params)) << ","
        << format_num(conductance(state, run.params)) << "\n";
  }
  std::cout << "# " << run.echo() << "\n";
  std::cout << "wrote " << train.size() << " trace rows to " << out_path << "\n";
  return kExitOk;
}

// -------------------------------------------------------------------------
// bench classify
// -------------------------------------------------------------------------

void print_metrics(std::ostream& out, const Metrics& metrics, const std::string& prefix) {
  out << prefix << " accuracy " << format_num(metrics.accuracy) << " error "
      << format_num(1.0 - metrics.accuracy) << "\n";
}

void write_metrics_file(std::ofstream& out, const Metrics& metrics) {
  out << "accuracy = " << format_num(metrics.accuracy) << "\n";
  out << "error = " << format_num(1.0 - metrics.accuracy) << "\n";
  out << "labels = ";
  for (std::size_t i = 0; i < metrics.labels.size(); ++i) {
    out << (i ? "," : "") << metrics.labels[i];
  }
  out << "\n";
  for (std::size_t i = 0; i < metrics.labels.size(); ++i) {
    out << "confusion_" << metrics.labels[i] << " = ";
    for (std::size_t j = 0; j < metrics.confusion[i].size(); ++j) {
      out << (j ? "," : "") << metrics.confusion[i][j];
    }
    out << "\n";
  }
  for (std::size_t i = 0; i < metrics.labels.size(); ++i) {
    out << "precision_" << metrics.labels[i] << " = " << format_num(metrics.precision[i]) << "\n";
    out << "recall_" << metrics.labels[i] << " = " << format_num(metrics.recall[i]) << "\n";
  }
}

int run_bench_classify(const RunConfig& run, const std::string& data_path,
                       const std::string& idx_labels, const std::string& test_path,
                       const std::string& test_labels, int epochs, double theta, bool keep_best,
                       const std::string& out_path) {
  const bool idx = !idx_labels.empty();
  const Dataset train_data =
      idx ? load_idx(data_path, idx_labels) : load_csv(data_path, /*has_header=*/false);
  if (!train_data.labeled()) {
    throw DataError("classification needs a labeled dataset");
  }
  std::optional<Dataset> test_data;
  if (!test_path.empty()) {
    test_data = idx ? load_idx(test_path, test_labels) : load_csv(test_path, false);
  }

  const EncoderConfig encoder{theta, true};
  const auto vocab = train_data.label_vocabulary();

  ClassifierOptions options;
  const std::uint32_t learner_cadence = options.core.renorm_interval;
  options.core = run.core_options();
  if (!run.renorm_from_user) {
    options.core.renorm_interval = learner_cadence;
  }
  options.max_labels = static_cast<std::uint32_t>(vocab.size());
  Classifier model(static_cast<std::uint32_t>(train_data.feature_dim), options);

  std::cout << "# " << run.echo() << "\n";
  std::cout << "samples " << train_data.size() << " features " << train_data.feature_dim
            << " labels " << vocab.size() << "\n";

  std::vector<std::size_t> order(train_data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  RandomStream shuffle_rng(run.seed ^ 0x5A77FE5ULL);

  Metrics train_metrics;
  std::vector<std::uint8_t> best_snapshot;
  double best_accuracy = -1.0;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    // Deterministic Fisher-Yates reshuffle per epoch.
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(shuffle_rng.next_unit() * static_cast<double>(i));
      std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    for (const std::size_t index : order) {
      const SpikeSet spikes = encode_threshold(train_data.sample(index), encoder);
      model.fit_step(spikes, train_data.labels[index]);
    }
    train_metrics = evaluate(model, train_data, encoder);
    std::cout << "epoch " << epoch << " train_accuracy " << format_num(train_metrics.accuracy)
              << "\n";
    if (keep_best && train_metrics.accuracy > best_accuracy) {
      best_accuracy = train_metrics.accuracy;
      best_snapshot = model.snapshot();
    }
  }
  if (keep_best && !best_snapshot.empty() && train_metrics.accuracy < best_accuracy) {
    // Error-driven online updates ring from epoch to epoch; keep the epoch
    // that scored best on the training set.
    model.restore(best_snapshot);
    train_metrics = evaluate(model, train_data, encoder);
    std::cout << "restored best epoch, train_accuracy " << format_num(train_metrics.accuracy)
              << "\n";
  }
  print_metrics(std::cout, train_metrics, "final train");

  std::optional<Metrics> test_metrics;
  if (test_data) {
    test_metrics = evaluate(model, *test_data, encoder);
    print_metrics(std::cout, *test_metrics, "final test");
  }

  if (!out_path.empty()) {
    std::ofstream out = open_output(out_path, run);
    out << "[train]\n";
    write_metrics_file(out, train_metrics);
    if (test_metrics) {
      out << "[test]\n";
      write_metrics_file(out, *test_metrics);
    }
  }
  return kExitOk;
}

// -------------------------------------------------------------------------
// bench anomaly / bench cluster
// -------------------------------------------------------------------------

int run_bench_anomaly(const RunConfig& run, const std::string& data_path, int fits, double theta,
                      const std::string& out_path) {
  const Dataset data = load_csv(data_path, false);
  const EncoderConfig encoder{theta, true};

  AnomalyOptions options;
  const std::uint32_t learner_cadence = options.core.renorm_interval;
  options.core = run.core_options();
  if (!run.renorm_from_user) {
    options.core.renorm_interval = learner_cadence;
  }
  AnomalyDetector model(static_cast<std::uint32_t>(data.feature_dim), options);

  for (int i = 0; i < fits; ++i) {
    model.fit(encode_threshold(data.sample(i % data.size()), encoder));
  }

  std::cout << "# " << run.echo() << "\n";
  std::cout << "fits " << fits << " mu " << format_num(model.mu()) << " sigma "
            << format_num(model.sigma()) << "\n";

  std::size_t flagged = 0;
  std::ofstream out;
  if (!out_path.empty()) {
    out = open_output(out_path, run);
    out << "sample,score,flag\n";
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double score = model.score(encode_threshold(data.sample(i), encoder));
    const bool flag = score > 3.0;
    flagged += flag ? 1 : 0;
    if (out.is_open()) {
      out << i << "," << format_num(score) << "," << (flag ? 1 : 0) << "\n";
    }
  }
  std::cout << "flagged " << flagged << " of " << data.size() << " training samples\n";
  return kExitOk;
}

int run_bench_cluster(const RunConfig& run, const std::string& data_path, int nodes, int fits,
                      double theta, const std::string& out_path) {
  const Dataset data = load_csv(data_path, false);
  const EncoderConfig encoder{theta, true};

  ClusterOptions options;
  options.core = run.core_options();
  options.ensemble_size = static_cast<std::uint32_t>(nodes);
  ClusterLearner model(static_cast<std::uint32_t>(data.feature_dim), options);

  for (int i = 0; i < fits; ++i) {
    model.fit(encode_threshold(data.sample(i % data.size()), encoder));
  }

  std::cout << "# " << run.echo() << "\n";
  std::ofstream out;
  if (!out_path.empty()) {
    out = open_output(out_path, run);
    out << "sample,signature\n";
  }
  std::vector<std::string> signatures;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::vector<bool> bits = model.signature(encode_threshold(data.sample(i), encoder));
    std::string text;
    for (bool bit : bits) text += bit ? '1' : '0';
    if (out.is_open()) {
      out << i << "," << text << "\n";
    }
    if (std::find(signatures.begin(), signatures.end(), text) == signatures.end()) {
      signatures.push_back(text);
    }
  }
  std::cout << "fits " << fits << " distinct_signatures " << signatures.size() << " of "
            << data.size() << " samples\n";
  return kExitOk;
}

// -------------------------------------------------------------------------
// core save / load
// -------------------------------------------------------------------------

int run_core_save(const RunConfig& run, const std::string& state_path, std::uint32_t rows,
                  std::uint32_t cols) {
  CoreConfig config;
  config.rows = rows;
  config.cols = cols;
  config.params = run.params;
  config.v_read = run.v_read;
  config.v_write = run.v_write;
  config.t_pulse = run.t_pulse;
  config.renorm_interval = run.renorm_interval;
  config.mode = run.mode;
  config.seed = run.seed;
  const Core core(config);
  const std::vector<std::uint8_t> image = core.save_state();
  std::ofstream out(state_path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write state file: " + state_path);
  }
  out.write(reinterpret_cast<const char*>(image.data()),
            static_cast<std::streamsize>(image.size()));
  std::cout << "# " << run.echo() << "\n";
  std::cout << "saved " << rows << "x" << cols << " core (" << image.size() << " bytes) to "
            << state_path << "\n";
  return kExitOk;
}

int run_core_load(const RunConfig& run, const std::string& state_path) {
  std::ifstream in(state_path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open state file: " + state_path);
  }
  const std::vector<std::uint8_t> image((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  const Core core = Core::load_state(image);
  const CoreConfig& config = core.config();

  double mean_abs_weight = 0.0;
  for (std::uint32_t address = 0; address < core.size(); ++address) {
    mean_abs_weight += std::abs(core.synapse_weight(address));
  }
  mean_abs_weight /= core.size();

  std::cout << "# " << run.echo() << "\n";
  std::cout << "loaded core rows=" << config.rows << " cols=" << config.cols << " mode="
            << (config.mode == UpdateMode::MeanField ? "meanfield" : "stochastic")
            << " seed=" << config.seed << " mean_abs_weight=" << format_num(mean_abs_weight)
            << "\n";
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"kT-RAM neuromemristive co-processor emulator"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags flags;
  std::uint64_t seed_flag = 0;
  std::string mode_flag;
  std::string preset_flag;
  auto* seed_opt = app.add_option("--seed", seed_flag, "random seed (default 42)");
  auto* mode_opt = app.add_option("--mode", mode_flag, "meanfield | stochastic");
  auto* preset_opt = app.add_option("--preset", preset_flag, "device variant: W | Sn | Cr");
  app.add_option("--config", flags.config_path, "key=value config file (flags win)");

  // device sweep
  auto* device = app.add_subcommand("device", "device-level operations");
  device->require_subcommand(1);
  auto* sweep = device->add_subcommand("sweep", "pulse-train sweep writing a trace CSV");
  std::string sweep_out;
  std::string sweep_pulses;
  sweep->add_option("--out", sweep_out, "trace CSV path")->required();
  sweep->add_option("--pulses", sweep_pulses, "CSV of volts,seconds rows (default Fig-style train)");

  // bench
  auto* bench = app.add_subcommand("bench", "machine-learning benchmark runs");
  bench->require_subcommand(1);

  auto* classify = bench->add_subcommand("classify", "train and evaluate the classifier");
  std::string cls_data, cls_idx_labels, cls_test, cls_test_labels, cls_out;
  int cls_epochs = 20;
  double cls_theta = 0.5;
  classify->add_option("--data", cls_data, "training CSV, or IDX images with --idx-labels")
      ->required();
  classify->add_option("--idx-labels", cls_idx_labels, "IDX label file for --data");
  classify->add_option("--test", cls_test, "held-out set (same container as --data)");
  classify->add_option("--test-labels", cls_test_labels, "IDX label file for --test");
  classify->add_option("--epochs", cls_epochs, "training epochs (default 20)");
  classify->add_option("--theta", cls_theta, "threshold encoder theta (default 0.5)");
  bool cls_keep_best = true;
  classify->add_flag("--keep-best,!--no-keep-best", cls_keep_best,
                     "keep the epoch with the best train accuracy (default on)");
  classify->add_option("--out", cls_out, "metrics output file");

  auto* synth = bench->add_subcommand("synth", "generate the synthetic digit IDX files");
  std::string synth_images, synth_labels;
  std::uint32_t synth_count = 10000;
  std::uint64_t synth_data_seed = 1234;
  synth->add_option("--out-images", synth_images, "IDX image file path")->required();
  synth->add_option("--out-labels", synth_labels, "IDX label file path")->required();
  synth->add_option("--count", synth_count, "number of images (default 10000)");
  synth->add_option("--data-seed", synth_data_seed, "glyph randomization seed (default 1234)");

  auto* anomaly = bench->add_subcommand("anomaly", "train the anomaly detector on CSV data");
  std::string anom_data, anom_out;
  int anom_fits = 500;
  double anom_theta = 0.5;
  anomaly->add_option("--data", anom_data, "training CSV")->required();
  anomaly->add_option("--fits", anom_fits, "number of fits (default 500)");
  anomaly->add_option("--theta", anom_theta, "threshold encoder theta (default 0.5)");
  anomaly->add_option("--out", anom_out, "per-sample score output file");

  auto* cluster = bench->add_subcommand("cluster", "run the cluster-signature learner on CSV data");
  std::string clu_data, clu_out;
  int clu_nodes = 16;
  int clu_fits = 500;
  double clu_theta = 0.5;
  cluster->add_option("--data", clu_data, "input CSV")->required();
  cluster->add_option("--nodes", clu_nodes, "ensemble size (default 16)");
  cluster->add_option("--fits", clu_fits, "number of fits (default 500)");
  cluster->add_option("--theta", clu_theta, "threshold encoder theta (default 0.5)");
  cluster->add_option("--out", clu_out, "per-sample signature output file");

  // core save / load
  auto* core_cmd = app.add_subcommand("core", "core state management");
  core_cmd->require_subcommand(1);
  auto* save = core_cmd->add_subcommand("save", "create a fresh core and save its state file");
  std::string save_state;
  std::uint32_t save_rows = 8;
  std::uint32_t save_cols = 8;
  save->add_option("--state", save_state, "state file path")->required();
  save->add_option("--rows", save_rows, "core rows (default 8)");
  save->add_option("--cols", save_cols, "core cols (default 8)");
  auto* load = core_cmd->add_subcommand("load", "load and summarize a state file");
  std::string load_state;
  load->add_option("--state", load_state, "state file path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    std::cout << app.help() << std::endl;
    return kExitOk;
  } catch (const CLI::ParseError& error) {
    std::cerr << "ktram: error: " << error.what() << "\n";
    std::cerr << app.help() << std::endl;
    return kExitUsage;
  }

  try {
    if (seed_opt->count()) flags.seed = seed_flag;
    if (mode_opt->count()) flags.mode = mode_flag;
    if (preset_opt->count()) flags.preset = preset_flag;

    RunConfig run;
    try {
      run = resolve_config(flags);
    } catch (const std::invalid_argument& error) {
      throw UsageError(error.what());
    }

    if (sweep->parsed()) {
      return run_device_sweep(run, sweep_out, sweep_pulses);
    }
    if (classify->parsed()) {
      return run_bench_classify(run, cls_data, cls_idx_labels, cls_test, cls_test_labels,
                                cls_epochs, cls_theta, cls_keep_best, cls_out);
    }
    if (synth->parsed()) {
      const Dataset digits = synthetic_digits(synth_count, synth_data_seed);
      write_idx(digits, synth_images, synth_labels);
      std::cout << "# " << run.echo() << "\n";
      std::cout << "wrote " << digits.size() << " synthetic digit images to " << synth_images
                << "\n";
      return kExitOk;
    }
    if (anomaly->parsed()) {
      return run_bench_anomaly(run, anom_data, anom_fits, anom_theta, anom_out);
    }
    if (cluster->parsed()) {
      return run_bench_cluster(run, clu_data, clu_nodes, clu_fits, clu_theta, clu_out);
    }
    if (save->parsed()) {
      return run_core_save(run, save_state, save_rows, save_cols);
    }
    if (load->parsed()) {
      return run_core_load(run, load_state);
    }
    throw UsageError("no subcommand selected");
  } catch (const UsageError& error) {
    std::cerr << "ktram: error: " << error.what() << "\n";
    return kExitUsage;
  } catch (const DataError& error) {
    std::cerr << "ktram: error: " << error.what() << "\n";
    return kExitData;
  } catch (const StateFormatError& error) {
    std::cerr << "ktram: error: " << error.what() << "\n";
    return kExitData;
  } catch (const std::ios_base::failure& error) {
    std::cerr << "ktram: error: " << error.what() << "\n";
    return kExitData;
  } catch (const std::exception& error) {
    // PulseRangeError, invalid_argument and friends: emulated-regime or
    // invariant violations.
    std::cerr << "ktram: error: " << error.what() << "\n";
    return kExitInvariant;
  }
}
