/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "ktram/learners.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "ktram/config.hpp"
#include "ktram/errors.hpp"

namespace ktram {

CoreConfig make_core_config(const CoreOptions& options, std::uint32_t rows, std::uint32_t cols) {
  CoreConfig config;
  config.rows = rows;
  config.cols = cols;
  config.params = options.params;
  config.v_read = options.v_read;
  config.v_write = options.v_write;
  config.t_pulse = options.t_pulse;
  config.renorm_interval = options.renorm_interval;
  config.mode = options.mode;
  config.seed = options.seed;
  return config;
}

void RunningStats::add(double value) {
  ++count;
  const double delta = value - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (value - mean);
}

double RunningStats::variance() const {
  return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
}

double RunningStats::stddev() const { return std::sqrt(variance()); }

namespace {

void check_encoder_addresses(const SpikeSet& spikes, std::uint32_t input_dim) {
  for (Address address : spikes) {
    if (address > input_dim) {
      throw std::invalid_argument("spike address " + std::to_string(address) +
                                  " outside encoder space of dim " + std::to_string(input_dim));
    }
  }
}

} // namespace

// ---------------------------------------------------------------------------
// Classifier
// ---------------------------------------------------------------------------

Classifier::Classifier(std::uint32_t input_dim, ClassifierOptions options)
    : input_dim_(input_dim), options_(options),
      core_(make_core_config(options.core, options.max_labels, input_dim + 1)) {
  if (input_dim < 1) {
    throw std::invalid_argument("input_dim must be >= 1");
  }
  if (options.max_labels < 1) {
    throw std::invalid_argument("max_labels must be >= 1");
  }
}

std::size_t Classifier::row_of(const std::string& label) const {
  const auto it = std::find(vocab_.begin(), vocab_.end(), label);
  if (it == vocab_.end()) {
    throw std::invalid_argument("unknown label: " + label);
  }
  return static_cast<std::size_t>(it - vocab_.begin());
}

std::size_t Classifier::register_label(const std::string& label) {
  const auto it = std::find(vocab_.begin(), vocab_.end(), label);
  if (it != vocab_.end()) {
    return static_cast<std::size_t>(it - vocab_.begin());
  }
  if (vocab_.size() >= options_.max_labels) {
    throw std::invalid_argument("label capacity " + std::to_string(options_.max_labels) +
                                " exhausted, cannot register '" + label + "'");
  }
  const std::size_t row = vocab_.size();
  const std::uint32_t cols = input_dim_ + 1;
  std::vector<Address> allocation(cols);
  for (std::uint32_t i = 0; i < cols; ++i) {
    allocation[i] = static_cast<Address>(row * cols + i);
  }
  node_of_.push_back(core_.alloc_node(allocation, /*with_bias=*/true));
  vocab_.push_back(label);
  stats_.emplace_back();
  return row;
}

SpikeSet Classifier::map_to_row(const SpikeSet& spikes, std::size_t row) const {
  const std::uint32_t cols = input_dim_ + 1;
  std::vector<Address> mapped;
  mapped.reserve(spikes.size());
  for (Address address : spikes) {
    mapped.push_back(static_cast<Address>(row * cols + address));
  }
  return SpikeSet(std::move(mapped));
}

void Classifier::fit_step(const SpikeSet& spikes, std::span<const std::string> true_labels) {
  if (spikes.empty()) {
    throw std::invalid_argument("spike set must not be empty");
  }
  check_encoder_addresses(spikes, input_dim_);
  for (const std::string& label : true_labels) {
    register_label(label);
  }
  for (std::size_t row = 0; row < vocab_.size(); ++row) {
    const bool positive =
        std::find(true_labels.begin(), true_labels.end(), vocab_[row]) != true_labels.end();
    const SpikeSet mapped = map_to_row(spikes, row);

    Feedback feedback = positive ? Feedback::H : Feedback::L;
    if (options_.only_on_error) {
      const double current = core_.activation_sum(node_of_[row], mapped);
      const bool correct = positive ? (current >= 0.0) : (current < 0.0);
      if (correct) {
        feedback = Feedback::Z;
      }
    }
    const double y =
        core_.execute(node_of_[row], mapped, Instruction{ReadPolarity::Forward, feedback});
    stats_[row].add(y);
  }
}

void Classifier::fit_step(const SpikeSet& spikes, const std::string& true_label) {
  fit_step(spikes, std::span<const std::string>(&true_label, 1));
}

std::vector<Prediction> Classifier::predict(const SpikeSet& spikes) const {
  if (vocab_.empty()) {
    throw std::logic_error("predict requires at least one registered label");
  }
  check_encoder_addresses(spikes, input_dim_);
  std::vector<Prediction> ranked;
  ranked.reserve(vocab_.size());
  for (std::size_t row = 0; row < vocab_.size(); ++row) {
    ranked.push_back(
        Prediction{vocab_[row], core_.activation_sum(node_of_[row], map_to_row(spikes, row))});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Prediction& a, const Prediction& b) {
    if (a.confidence != b.confidence) {
      return a.confidence > b.confidence;
    }
    return a.label < b.label;
  });
  return ranked;
}

std::vector<Prediction> Classifier::predict_with_read_disturb(const SpikeSet& spikes) {
  if (vocab_.empty()) {
    throw std::logic_error("predict requires at least one registered label");
  }
  check_encoder_addresses(spikes, input_dim_);
  std::vector<Prediction> ranked;
  ranked.reserve(vocab_.size());
  for (std::size_t row = 0; row < vocab_.size(); ++row) {
    const double y = core_.execute(node_of_[row], map_to_row(spikes, row),
                                   Instruction{ReadPolarity::Forward, Feedback::Z});
    ranked.push_back(Prediction{vocab_[row], y});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Prediction& a, const Prediction& b) {
    if (a.confidence != b.confidence) {
      return a.confidence > b.confidence;
    }
    return a.label < b.label;
  });
  return ranked;
}

const RunningStats& Classifier::label_stats(const std::string& label) const {
  return stats_[row_of(label)];
}

Address Classifier::address_of(const std::string& label, Address encoder_address) const {
  if (encoder_address > input_dim_) {
    throw std::invalid_argument("encoder address out of range");
  }
  return static_cast<Address>(row_of(label) * (input_dim_ + 1) + encoder_address);
}

void Classifier::restore(std::span<const std::uint8_t> snapshot_bytes) {
  Core restored = Core::load_state(snapshot_bytes);
  if (restored.config().rows != options_.max_labels ||
      restored.config().cols != input_dim_ + 1) {
    throw std::invalid_argument("snapshot geometry does not match this classifier");
  }
  core_ = std::move(restored);
  // Node bindings are session state, not part of the image; rebuild them in
  // vocab order, which reproduces the original allocation exactly.
  node_of_.clear();
  const std::uint32_t cols = input_dim_ + 1;
  for (std::size_t row = 0; row < vocab_.size(); ++row) {
    std::vector<Address> allocation(cols);
    for (std::uint32_t i = 0; i < cols; ++i) {
      allocation[i] = static_cast<Address>(row * cols + i);
    }
    node_of_.push_back(core_.alloc_node(allocation, /*with_bias=*/true));
  }
}

void Classifier::save(const std::string& state_path, const std::string& header_path) const {
  const std::vector<std::uint8_t> image = core_.save_state();
  std::ofstream state(state_path, std::ios::binary);
  if (!state) {
    throw DataError("cannot write state file: " + state_path);
  }
  state.write(reinterpret_cast<const char*>(image.data()),
              static_cast<std::streamsize>(image.size()));

  KeyValueFile header;
  header.set("classifier", "input_dim", std::to_string(input_dim_));
  header.set("classifier", "max_labels", std::to_string(options_.max_labels));
  header.set("classifier", "only_on_error", options_.only_on_error ? "1" : "0");
  header.set("classifier", "label_count", std::to_string(vocab_.size()));
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    const std::string suffix = std::to_string(i);
    header.set("labels", "label_" + suffix, vocab_[i]);
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", stats_[i].mean);
    header.set("stats", "mean_" + suffix, buffer);
    std::snprintf(buffer, sizeof(buffer), "%.17g", stats_[i].m2);
    header.set("stats", "m2_" + suffix, buffer);
    header.set("stats", "count_" + suffix, std::to_string(stats_[i].count));
  }
  header.write_file(header_path);
}

Classifier Classifier::load(const std::string& state_path, const std::string& header_path) {
  std::ifstream state(state_path, std::ios::binary);
  if (!state) {
    throw DataError("cannot open state file: " + state_path);
  }
  std::vector<std::uint8_t> image((std::istreambuf_iterator<char>(state)),
                                  std::istreambuf_iterator<char>());
  Core core = Core::load_state(image);

  const KeyValueFile header = KeyValueFile::parse_file(header_path);
  const auto input_dim = static_cast<std::uint32_t>(header.get_u64("classifier", "input_dim"));
  const auto max_labels = static_cast<std::uint32_t>(header.get_u64("classifier", "max_labels"));
  const auto label_count = header.get_u64("classifier", "label_count");

  ClassifierOptions options;
  options.max_labels = max_labels;
  options.only_on_error = header.get_u64("classifier", "only_on_error") != 0;
  const CoreConfig& config = core.config();
  options.core.params = config.params;
  options.core.v_read = config.v_read;
  options.core.v_write = config.v_write;
  options.core.t_pulse = config.t_pulse;
  options.core.renorm_interval = config.renorm_interval;
  options.core.mode = config.mode;
  options.core.seed = config.seed;

  Classifier model(input_dim, options);
  model.core_ = std::move(core);
  for (std::uint64_t i = 0; i < label_count; ++i) {
    const std::string suffix = std::to_string(i);
    const auto label = header.get("labels", "label_" + suffix);
    if (!label) {
      throw DataError("companion header missing label_" + suffix);
    }
    const std::size_t row = model.register_label(*label);
    model.stats_[row].mean = header.get_double("stats", "mean_" + suffix);
    model.stats_[row].m2 = header.get_double("stats", "m2_" + suffix);
    model.stats_[row].count = header.get_u64("stats", "count_" + suffix);
  }
  return model;
}

// ---------------------------------------------------------------------------
// AnomalyDetector
// ---------------------------------------------------------------------------

AnomalyDetector::AnomalyDetector(std::uint32_t input_dim, AnomalyOptions options)
    : input_dim_(input_dim), options_(options),
      core_(make_core_config(options.core, 1, input_dim + 1)) {
  if (input_dim < 1) {
    throw std::invalid_argument("input_dim must be >= 1");
  }
  std::vector<Address> allocation(input_dim + 1);
  for (std::uint32_t i = 0; i <= input_dim; ++i) {
    allocation[i] = i;
  }
  node_ = core_.alloc_node(allocation, /*with_bias=*/true);

  // Charge the bias synapse positive through the instruction set before any
  // data arrives: FH writes it up, the extra RZ reads sink its partner
  // device. Without this prior the first samples would decide the attractor
  // sign by init noise, and a negative lock inverts every later score.
  const SpikeSet bias_only{0};
  for (std::uint32_t cycle = 0; cycle < options_.bias_boost_cycles; ++cycle) {
    core_.execute(node_, bias_only, Instruction{ReadPolarity::Forward, Feedback::H});
    for (int i = 0; i < 3; ++i) {
      core_.execute(node_, bias_only, Instruction{ReadPolarity::Reverse, Feedback::Z});
    }
  }
}

SpikeSet AnomalyDetector::check_spikes(const SpikeSet& spikes) const {
  if (spikes.empty()) {
    throw std::invalid_argument("spike set must not be empty");
  }
  check_encoder_addresses(spikes, input_dim_);
  return spikes;
}

void AnomalyDetector::fit(const SpikeSet& spikes) {
  const double y =
      core_.execute(node_, check_spikes(spikes), Instruction{ReadPolarity::Forward, Feedback::U});
  stats_.add(y);
}

double AnomalyDetector::score(const SpikeSet& spikes) const {
  if (stats_.count < 2) {
    throw std::logic_error("anomaly score requires at least 2 fits");
  }
  const double y = core_.activation_sum(node_, check_spikes(spikes));
  const double sigma = std::max(stats_.stddev(), options_.sigma_floor);
  return std::max(0.0, (stats_.mean - y) / sigma);
}

bool AnomalyDetector::is_anomalous(const SpikeSet& spikes) const {
  return score(spikes) > options_.flag_threshold;
}

void AnomalyDetector::save(const std::string& state_path, const std::string& header_path) const {
  const std::vector<std::uint8_t> image = core_.save_state();
  std::ofstream state(state_path, std::ios::binary);
  if (!state) {
    throw DataError("cannot write state file: " + state_path);
  }
  state.write(reinterpret_cast<const char*>(image.data()),
              static_cast<std::streamsize>(image.size()));

  KeyValueFile header;
  char buffer[64];
  header.set("anomaly", "input_dim", std::to_string(input_dim_));
  header.set("anomaly", "bias_boost_cycles", std::to_string(options_.bias_boost_cycles));
  std::snprintf(buffer, sizeof(buffer), "%.17g", options_.sigma_floor);
  header.set("anomaly", "sigma_floor", buffer);
  std::snprintf(buffer, sizeof(buffer), "%.17g", options_.flag_threshold);
  header.set("anomaly", "flag_threshold", buffer);
  std::snprintf(buffer, sizeof(buffer), "%.17g", stats_.mean);
  header.set("stats", "mean", buffer);
  std::snprintf(buffer, sizeof(buffer), "%.17g", stats_.m2);
  header.set("stats", "m2", buffer);
  header.set("stats", "count", std::to_string(stats_.count));
  header.write_file(header_path);
}

AnomalyDetector AnomalyDetector::load(const std::string& state_path,
                                      const std::string& header_path) {
  std::ifstream state(state_path, std::ios::binary);
  if (!state) {
    throw DataError("cannot open state file: " + state_path);
  }
  const std::vector<std::uint8_t> image((std::istreambuf_iterator<char>(state)),
                                        std::istreambuf_iterator<char>());
  Core core = Core::load_state(image);

  const KeyValueFile header = KeyValueFile::parse_file(header_path);
  AnomalyOptions options;
  const auto input_dim = static_cast<std::uint32_t>(header.get_u64("anomaly", "input_dim"));
  options.bias_boost_cycles = 0; // the saved fabric already carries the prior
  options.sigma_floor = header.get_double("anomaly", "sigma_floor");
  options.flag_threshold = header.get_double("anomaly", "flag_threshold");
  const CoreConfig& config = core.config();
  options.core.params = config.params;
  options.core.v_read = config.v_read;
  options.core.v_write = config.v_write;
  options.core.t_pulse = config.t_pulse;
  options.core.renorm_interval = config.renorm_interval;
  options.core.mode = config.mode;
  options.core.seed = config.seed;

  AnomalyDetector model(input_dim, options);
  model.core_ = std::move(core);
  // Node bindings are session state: rebuild the full-row coupling.
  std::vector<Address> allocation(input_dim + 1);
  for (std::uint32_t i = 0; i <= input_dim; ++i) {
    allocation[i] = i;
  }
  model.node_ = model.core_.alloc_node(allocation, /*with_bias=*/true);
  model.options_.bias_boost_cycles = static_cast<std::uint32_t>(
      header.get_u64("anomaly", "bias_boost_cycles"));
  model.stats_.mean = header.get_double("stats", "mean");
  model.stats_.m2 = header.get_double("stats", "m2");
  model.stats_.count = header.get_u64("stats", "count");
  return model;
}

// ---------------------------------------------------------------------------
// ClusterLearner
// ---------------------------------------------------------------------------

ClusterLearner::ClusterLearner(std::uint32_t input_dim, ClusterOptions options)
    : input_dim_(input_dim), options_(options),
      core_(make_core_config(options.core, std::max(options.ensemble_size, 1u), input_dim + 1)) {
  if (input_dim < 1) {
    throw std::invalid_argument("input_dim must be >= 1");
  }
  if (options.ensemble_size < 1) {
    throw std::invalid_argument("ensemble_size must be >= 1");
  }
  std::uint32_t field_size = options_.field_size;
  if (field_size == 0) {
    field_size = std::max(1u, input_dim / 2);
  }
  if (field_size > input_dim) {
    throw std::invalid_argument("field_size exceeds input_dim");
  }

  // Receptive fields drawn from a stream decoupled from the core's device
  // init so both stay reproducible independently.
  RandomStream field_rng(options_.core.seed ^ 0x5EEDF1E1Du);
  const std::uint32_t cols = input_dim + 1;
  for (std::uint32_t node = 0; node < options_.ensemble_size; ++node) {
    std::vector<std::uint32_t> pool(input_dim);
    for (std::uint32_t i = 0; i < input_dim; ++i) {
      pool[i] = i;
    }
    for (std::uint32_t i = 0; i < field_size; ++i) {
      const auto j =
          i + static_cast<std::uint32_t>(field_rng.next_unit() * static_cast<double>(input_dim - i));
      std::swap(pool[i], pool[std::min(j, input_dim - 1)]);
    }
    std::vector<std::uint32_t> field(pool.begin(), pool.begin() + field_size);
    std::sort(field.begin(), field.end());

    std::vector<Address> allocation;
    allocation.reserve(field_size + 1);
    allocation.push_back(node * cols); // bias
    for (std::uint32_t feature : field) {
      allocation.push_back(node * cols + 1 + feature);
    }
    nodes_.push_back(core_.alloc_node(allocation, /*with_bias=*/true));
    fields_.push_back(std::move(field));
  }
}

SpikeSet ClusterLearner::map_to_row(const SpikeSet& spikes, std::size_t row,
                                    bool* any_active) const {
  const std::uint32_t cols = input_dim_ + 1;
  std::vector<Address> mapped;
  for (Address address : spikes) {
    if (address == 0) {
      continue; // bias marker, re-added by the core
    }
    const std::uint32_t feature = address - 1;
    if (std::binary_search(fields_[row].begin(), fields_[row].end(), feature)) {
      mapped.push_back(static_cast<Address>(row * cols + 1 + feature));
    }
  }
  if (any_active != nullptr) {
    *any_active = !mapped.empty();
  }
  return SpikeSet(std::move(mapped));
}

void ClusterLearner::fit(const SpikeSet& spikes) {
  if (spikes.empty()) {
    throw std::invalid_argument("spike set must not be empty");
  }
  check_encoder_addresses(spikes, input_dim_);
  for (std::size_t row = 0; row < nodes_.size(); ++row) {
    bool any_active = false;
    const SpikeSet mapped = map_to_row(spikes, row, &any_active);
    if (!any_active) {
      continue; // input misses this node's field entirely
    }
    core_.execute(nodes_[row], mapped, Instruction{ReadPolarity::Forward, Feedback::U});
  }
}

std::vector<bool> ClusterLearner::signature(const SpikeSet& spikes) const {
  check_encoder_addresses(spikes, input_dim_);
  std::vector<bool> bits;
  bits.reserve(nodes_.size());
  for (std::size_t row = 0; row < nodes_.size(); ++row) {
    const SpikeSet mapped = map_to_row(spikes, row, nullptr);
    bits.push_back(core_.activation_sum(nodes_[row], mapped) >= 0.0);
  }
  return bits;
}

const std::vector<std::uint32_t>& ClusterLearner::field(std::size_t node_index) const {
  return fields_.at(node_index);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

Metrics evaluate(const Classifier& model, const Dataset& data, const EncoderConfig& encoder) {
  if (!data.labeled() || data.size() == 0) {
    throw std::invalid_argument("evaluation requires a non-empty labeled dataset");
  }
  std::vector<std::string> predicted;
  predicted.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const SpikeSet spikes = encode_threshold(data.sample(i), encoder);
    predicted.push_back(model.predict(spikes).front().label);
  }
  return compute_metrics(data.labels, predicted);
}

} // namespace ktram
