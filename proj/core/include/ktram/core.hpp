/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef KTRAM_CORE_HPP
#define KTRAM_CORE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ktram/device.hpp"
#include "ktram/rng.hpp"
#include "ktram/synapse.hpp"

namespace ktram {

using Address = std::uint32_t;
using NodeId = std::uint32_t;

/**
 * Configuration of one emulated core: a rows x cols array of differential
 * memristor pairs plus the pulse set used by instruction execution.
 */
struct CoreConfig {
  std::uint32_t rows = 1;
  std::uint32_t cols = 1;
  DeviceParams params = preset_params(DeviceVariant::W);
  double v_read = 0.2;   ///< read pulse amplitude [V], must stay below v_write
  double v_write = 0.8;  ///< write pulse amplitude [V]
  double t_pulse = 50e-9; ///< pulse width [s]
  std::uint32_t renorm_interval = 100; ///< node ops between conductance renormalizations
  UpdateMode mode = UpdateMode::MeanField;
  std::uint64_t seed = 42;
  PulseLimits limits;
};

/// Throws std::invalid_argument naming the first violated constraint.
void validate(const CoreConfig& config);

/// Set of active synapse addresses presented to a node in one operation.
/// Stored sorted and deduplicated.
class SpikeSet {
public:
  SpikeSet() = default;
  SpikeSet(std::initializer_list<Address> addresses);
  explicit SpikeSet(std::vector<Address> addresses);

  void insert(Address address);
  bool contains(Address address) const;
  bool empty() const { return addresses_.empty(); }
  std::size_t size() const { return addresses_.size(); }
  const std::vector<Address>& addresses() const { return addresses_; }

  auto begin() const { return addresses_.begin(); }
  auto end() const { return addresses_.end(); }

private:
  std::vector<Address> addresses_;
};

/**
 * Feedback half of an instruction: what the write phase does after the read.
 *   H  write UP on every spiked synapse
 *   L  write DOWN on every spiked synapse
 *   U  write UP when the activation is >= 0, DOWN otherwise
 *   A  the opposite of U
 *   Z  no write
 */
enum class Feedback : std::uint8_t { H, L, U, A, Z };

/// One instruction: read polarity (F or R) plus feedback mode. 10 combinations.
struct Instruction {
  ReadPolarity polarity = ReadPolarity::Forward;
  Feedback feedback = Feedback::Z;
};

/// Parses a two-letter mnemonic such as "FH" or "RZ"; throws std::invalid_argument.
Instruction parse_instruction(std::string_view mnemonic);
std::string instruction_name(Instruction instruction);

/**
 * The emulated core: a flat row-major array of synapses, address-coupled into
 * AHaH nodes, driven through the instruction set.
 *
 * A core is exclusively owned by one logical task; all operations are plain
 * state transitions and all randomness comes from the core's own seeded
 * stream, so behavior is independent of thread scheduling.
 */
class Core {
public:
  explicit Core(const CoreConfig& config);

  const CoreConfig& config() const { return config_; }
  std::uint32_t size() const { return config_.rows * config_.cols; }

  /**
   * Couples the given synapses into a new node with exclusive ownership.
   * When `with_bias` is set the lowest allocated address becomes the node's
   * bias synapse, included in every operation on the node.
   * Throws std::invalid_argument on overlap or out-of-range addresses.
   */
  NodeId alloc_node(std::span<const Address> addresses, bool with_bias = true);
  NodeId alloc_node(const SpikeSet& addresses, bool with_bias = true);
  void free_node(NodeId node);
  bool has_node(NodeId node) const;
  std::vector<Address> node_allocation(NodeId node) const;
  std::optional<Address> node_bias(NodeId node) const;

  /**
   * Executes one instruction on a node.
   *
   * The activation y is the sum of pre-read weights over spikes plus the bias
   * synapse, negated under reverse polarity. Every spiked synapse then
   * undergoes one read pulse, followed by the feedback write chosen by the
   * instruction. Every renorm_interval operations the node's synapses get one
   * reverse read to pull total conductance back down (forward reads raise it
   * monotonically).
   */
  double execute(NodeId node, const SpikeSet& spikes, Instruction instruction);

  /// Current weights of a node's synapses, without disturbing state.
  std::map<Address, double> node_weights(NodeId node) const;

  /// Non-mutating weight of one synapse.
  double synapse_weight(Address address) const;

  /// Sum of non-mutating weights over spikes plus the node bias. This is the
  /// activation execute() would report under FZ, without the read disturbance.
  double activation_sum(NodeId node, const SpikeSet& spikes) const;

  /// Direct state access for diagnostics and test harnesses.
  const Synapse& synapse_at(Address address) const;
  void set_synapse_state(Address address, const Synapse& synapse);

  /// Bit-exact state image (synaptic fabric, config, RNG position). Node
  /// bindings are session state and are not part of the image; callers
  /// re-allocate them, which is deterministic.
  std::vector<std::uint8_t> save_state() const;
  static Core load_state(std::span<const std::uint8_t> bytes);

private:
  struct Node {
    std::vector<Address> allocation; // sorted
    std::optional<Address> bias;
    std::uint32_t op_counter = 0;
  };

  void check_address(Address address) const;
  const Node& node_ref(NodeId node) const;
  Node& node_ref(NodeId node);
  RandomStream* stream();

  CoreConfig config_;
  std::vector<Synapse> grid_;
  std::vector<NodeId> owner_; // per-address owner, kNoOwner when free
  std::map<NodeId, Node> nodes_;
  NodeId next_node_ = 0;
  RandomStream rng_;

  static constexpr NodeId kNoOwner = 0xFFFFFFFFu;
};

} // namespace ktram

#endif // KTRAM_CORE_HPP
