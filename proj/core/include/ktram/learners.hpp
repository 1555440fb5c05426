/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef KTRAM_LEARNERS_HPP
#define KTRAM_LEARNERS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ktram/core.hpp"
#include "ktram/dataset.hpp"

namespace ktram {

/// Knobs forwarded to a learner's owned core.
struct CoreOptions {
  DeviceParams params = preset_params(DeviceVariant::W);
  double v_read = 0.2;
  double v_write = 0.8;
  double t_pulse = 50e-9;
  std::uint32_t renorm_interval = 100;
  UpdateMode mode = UpdateMode::MeanField;
  std::uint64_t seed = 42;
};

CoreConfig make_core_config(const CoreOptions& options, std::uint32_t rows, std::uint32_t cols);

/// Welford running mean / standard deviation.
struct RunningStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double value);
  double variance() const;
  double stddev() const;
};

struct Prediction {
  std::string label;
  double confidence;
};

struct ClassifierOptions {
  /// Every sample forward-reads every spiked synapse on every label node, so
  /// total conductance climbs quickly; a tighter renormalization cadence than
  /// the general core default keeps trained weights from compressing
  /// between corrective writes.
  ClassifierOptions() { core.renorm_interval = 25; }

  CoreOptions core;
  std::uint32_t max_labels = 16;
  /// Error-driven updates: nodes already on the correct side of zero get a
  /// plain FZ read instead of a corrective write.
  bool only_on_error = true;
};

/**
 * Supervised multi-label classifier: one AHaH node per label, all nodes
 * sharing one core. Input spike sets use the encoder address space (0 = bias,
 * feature i at address i + 1); each node owns one core row mapping that space.
 *
 * Training presents each sample to every label node: positive labels get FH,
 * negative labels get FL, degraded to FZ under only_on_error when the node
 * already scores the sample on the correct side of zero.
 */
class Classifier {
public:
  Classifier(std::uint32_t input_dim, ClassifierOptions options = ClassifierOptions{});

  /// One online update. Unknown labels auto-register new nodes (throws when
  /// the label capacity is exhausted). Throws on an empty spike set.
  void fit_step(const SpikeSet& spikes, std::span<const std::string> true_labels);
  void fit_step(const SpikeSet& spikes, const std::string& true_label);

  /// Ranked predictions from non-mutating weight sums, descending confidence,
  /// lexicographic label tie-break. Throws when no label has been seen.
  std::vector<Prediction> predict(const SpikeSet& spikes) const;

  /// Hardware-faithful variant: ranks by mutating FZ reads, so the scored
  /// core suffers the same read disturbance the physical chip would.
  std::vector<Prediction> predict_with_read_disturb(const SpikeSet& spikes);

  const std::vector<std::string>& labels() const { return vocab_; }
  std::uint32_t input_dim() const { return input_dim_; }
  bool only_on_error() const { return options_.only_on_error; }
  const RunningStats& label_stats(const std::string& label) const;
  const Core& core() const { return core_; }
  /// Direct fabric access for harnesses and diagnostics.
  Core& core_mut() { return core_; }
  /// Core-row address of an encoder-space address for a given label.
  Address address_of(const std::string& label, Address encoder_address) const;

  /// Persists the owned core (bit-exact state file) plus a key=value
  /// companion header carrying vocab, stats and flags.
  void save(const std::string& state_path, const std::string& header_path) const;
  static Classifier load(const std::string& state_path, const std::string& header_path);

  /// In-memory checkpoint of the synaptic state, for schedules that keep the
  /// best epoch of a noisy online run. Labels registered after the snapshot
  /// survive a restore with their synapses back at the snapshot values.
  std::vector<std::uint8_t> snapshot() const { return core_.save_state(); }
  void restore(std::span<const std::uint8_t> snapshot_bytes);

private:
  std::size_t row_of(const std::string& label) const;
  std::size_t register_label(const std::string& label);
  SpikeSet map_to_row(const SpikeSet& spikes, std::size_t row) const;

  std::uint32_t input_dim_;
  ClassifierOptions options_;
  Core core_;
  std::vector<std::string> vocab_;
  std::vector<NodeId> node_of_;
  std::vector<RunningStats> stats_;
};

struct AnomalyOptions {
  /// A detector drives the same node on every operation, so forward-read
  /// disturbance accumulates much faster than on a multi-node core;
  /// renormalizing after every operation keeps the baseline flat.
  AnomalyOptions() { core.renorm_interval = 1; }

  CoreOptions core;
  /// Boot cycles that charge the bias synapse positive before any data, so
  /// unsupervised feedback locks onto the positive attractor.
  std::uint32_t bias_boost_cycles = 150;
  double sigma_floor = 1e-6;
  double flag_threshold = 3.0;
};

/**
 * Anomaly detector: a single FU-trained node plus running statistics of its
 * activation on training data. The score is the z-scored activation deficit
 * max(0, (mu - y) / sigma); values above flag_threshold (default 3.0) are
 * considered anomalous.
 */
class AnomalyDetector {
public:
  AnomalyDetector(std::uint32_t input_dim, AnomalyOptions options = AnomalyOptions{});

  void fit(const SpikeSet& spikes);

  /// Non-mutating score; throws std::logic_error before 2 fits. A degenerate
  /// zero-sigma history falls back to sigma_floor.
  double score(const SpikeSet& spikes) const;
  bool is_anomalous(const SpikeSet& spikes) const;

  std::uint64_t fit_count() const { return stats_.count; }
  double mu() const { return stats_.mean; }
  double sigma() const { return stats_.stddev(); }
  const Core& core() const { return core_; }

  /// Same persistence scheme as the classifier: core state file plus a
  /// key=value companion with the running statistics and flags.
  void save(const std::string& state_path, const std::string& header_path) const;
  static AnomalyDetector load(const std::string& state_path, const std::string& header_path);

private:
  SpikeSet check_spikes(const SpikeSet& spikes) const;

  std::uint32_t input_dim_;
  AnomalyOptions options_;
  Core core_;
  NodeId node_;
  RunningStats stats_;
};

struct ClusterOptions {
  CoreOptions core;
  std::uint32_t ensemble_size = 16;
  /// Synapses per node's receptive field; 0 means half the input space.
  std::uint32_t field_size = 0;
};

/**
 * Unsupervised cluster-signature learner: an ensemble of FU-driven nodes,
 * each wired to an independent random subset of the input space. Inputs that
 * fall into different attractor basins produce different sign-bit signatures.
 */
class ClusterLearner {
public:
  ClusterLearner(std::uint32_t input_dim, ClusterOptions options = ClusterOptions{});

  /// FU on every ensemble node; nodes whose field misses the input skip.
  void fit(const SpikeSet& spikes);

  /// Sign bits (y >= 0 -> 1) of all ensemble nodes, non-mutating.
  std::vector<bool> signature(const SpikeSet& spikes) const;

  std::uint32_t ensemble_size() const { return static_cast<std::uint32_t>(nodes_.size()); }
  const std::vector<std::uint32_t>& field(std::size_t node_index) const;
  const Core& core() const { return core_; }

private:
  SpikeSet map_to_row(const SpikeSet& spikes, std::size_t row, bool* any_active) const;

  std::uint32_t input_dim_;
  ClusterOptions options_;
  Core core_;
  std::vector<NodeId> nodes_;
  std::vector<std::vector<std::uint32_t>> fields_; // feature indices per node, sorted
};

/// Top-1 evaluation of a classifier over a labeled dataset.
Metrics evaluate(const Classifier& model, const Dataset& data, const EncoderConfig& encoder);

} // namespace ktram

#endif // KTRAM_LEARNERS_HPP
