/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "ktram/core.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ktram/errors.hpp"

namespace ktram {

void validate(const CoreConfig& config) {
  validate(config.params);
  if (config.rows < 1 || config.cols < 1) {
    throw std::invalid_argument("core geometry must satisfy rows >= 1 and cols >= 1");
  }
  const std::uint64_t cells =
      static_cast<std::uint64_t>(config.rows) * static_cast<std::uint64_t>(config.cols);
  if (cells > 0xFFFFFFFFull) {
    throw std::invalid_argument("core geometry exceeds the 32-bit address space");
  }
  if (!(config.v_read > 0.0) || !(config.v_read < config.v_write)) {
    throw std::invalid_argument("pulse set must satisfy 0 < v_read < v_write");
  }
  if (config.v_write > config.limits.max_abs_volts) {
    throw std::invalid_argument("v_write exceeds the pulse amplitude limit");
  }
  if (!(config.t_pulse > 0.0) || config.t_pulse > config.limits.max_dt) {
    throw std::invalid_argument("t_pulse outside the pulse width limit");
  }
  if (config.renorm_interval < 1) {
    throw std::invalid_argument("renorm_interval must be >= 1");
  }
}

SpikeSet::SpikeSet(std::initializer_list<Address> addresses)
    : SpikeSet(std::vector<Address>(addresses)) {}

SpikeSet::SpikeSet(std::vector<Address> addresses) : addresses_(std::move(addresses)) {
  std::sort(addresses_.begin(), addresses_.end());
  addresses_.erase(std::unique(addresses_.begin(), addresses_.end()), addresses_.end());
}

void SpikeSet::insert(Address address) {
  const auto it = std::lower_bound(addresses_.begin(), addresses_.end(), address);
  if (it == addresses_.end() || *it != address) {
    addresses_.insert(it, address);
  }
}

bool SpikeSet::contains(Address address) const {
  return std::binary_search(addresses_.begin(), addresses_.end(), address);
}

Instruction parse_instruction(std::string_view mnemonic) {
  if (mnemonic.size() != 2) {
    throw std::invalid_argument("instruction mnemonic must be two letters, e.g. FH");
  }
  Instruction instruction;
  switch (mnemonic[0]) {
  case 'F': instruction.polarity = ReadPolarity::Forward; break;
  case 'R': instruction.polarity = ReadPolarity::Reverse; break;
  default:
    throw std::invalid_argument("instruction read polarity must be F or R");
  }
  switch (mnemonic[1]) {
  case 'H': instruction.feedback = Feedback::H; break;
  case 'L': instruction.feedback = Feedback::L; break;
  case 'U': instruction.feedback = Feedback::U; break;
  case 'A': instruction.feedback = Feedback::A; break;
  case 'Z': instruction.feedback = Feedback::Z; break;
  default:
    throw std::invalid_argument("instruction feedback must be one of H, L, U, A, Z");
  }
  return instruction;
}

std::string instruction_name(Instruction instruction) {
  std::string name;
  name += (instruction.polarity == ReadPolarity::Forward) ? 'F' : 'R';
  switch (instruction.feedback) {
  case Feedback::H: name += 'H'; break;
  case Feedback::L: name += 'L'; break;
  case Feedback::U: name += 'U'; break;
  case Feedback::A: name += 'A'; break;
  case Feedback::Z: name += 'Z'; break;
  }
  return name;
}

Core::Core(const CoreConfig& config) : config_(config), rng_(config.seed) {
  validate(config_);
  const std::uint32_t cells = size();
  grid_.reserve(cells);
  owner_.assign(cells, kNoOwner);
  const std::uint32_t total = config_.params.n_switches;
  for (std::uint32_t i = 0; i < cells; ++i) {
    const double n_a = 0.5 + rng_.next_uniform(-0.05, 0.05);
    const double n_b = 0.5 + rng_.next_uniform(-0.05, 0.05);
    if (config_.mode == UpdateMode::MeanField) {
      grid_.push_back(Synapse::mean_field(n_a, n_b));
    } else {
      grid_.push_back(Synapse::stochastic(
          static_cast<std::uint32_t>(std::lround(n_a * total)),
          static_cast<std::uint32_t>(std::lround(n_b * total))));
    }
  }
}

void Core::check_address(Address address) const {
  if (address >= size()) {
    std::ostringstream msg;
    msg << "address " << address << " out of range for a " << config_.rows << "x" << config_.cols
        << " core";
    throw std::invalid_argument(msg.str());
  }
}

NodeId Core::alloc_node(std::span<const Address> addresses, bool with_bias) {
  if (addresses.empty()) {
    throw std::invalid_argument("node allocation must not be empty");
  }
  std::vector<Address> sorted(addresses.begin(), addresses.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (Address address : sorted) {
    check_address(address);
    if (owner_[address] != kNoOwner) {
      std::ostringstream msg;
      msg << "address " << address << " already owned by node " << owner_[address];
      throw std::invalid_argument(msg.str());
    }
  }

  const NodeId id = next_node_++;
  for (Address address : sorted) {
    owner_[address] = id;
  }
  Node node;
  node.bias = with_bias ? std::optional<Address>(sorted.front()) : std::nullopt;
  node.allocation = std::move(sorted);
  nodes_.emplace(id, std::move(node));
  return id;
}

NodeId Core::alloc_node(const SpikeSet& addresses, bool with_bias) {
  return alloc_node(std::span<const Address>(addresses.addresses()), with_bias);
}

void Core::free_node(NodeId node) {
  const auto it = nodes_.find(node);
  if (it == nodes_.end()) {
    throw std::invalid_argument("unknown node id " + std::to_string(node));
  }
  for (Address address : it->second.allocation) {
    owner_[address] = kNoOwner;
  }
  nodes_.erase(it);
}

bool Core::has_node(NodeId node) const { return nodes_.count(node) != 0; }

std::vector<Address> Core::node_allocation(NodeId node) const {
  return node_ref(node).allocation;
}

std::optional<Address> Core::node_bias(NodeId node) const { return node_ref(node).bias; }

const Core::Node& Core::node_ref(NodeId node) const {
  const auto it = nodes_.find(node);
  if (it == nodes_.end()) {
    throw std::invalid_argument("unknown node id " + std::to_string(node));
  }
  return it->second;
}

Core::Node& Core::node_ref(NodeId node) {
  const auto it = nodes_.find(node);
  if (it == nodes_.end()) {
    throw std::invalid_argument("unknown node id " + std::to_string(node));
  }
  return it->second;
}

RandomStream* Core::stream() {
  return config_.mode == UpdateMode::Stochastic ? &rng_ : nullptr;
}

double Core::execute(NodeId node_id, const SpikeSet& spikes, Instruction instruction) {
  Node& node = node_ref(node_id);
  if (spikes.empty()) {
    throw std::invalid_argument("spike set must not be empty");
  }
  for (Address address : spikes) {
    check_address(address);
    if (owner_[address] != node_id) {
      std::ostringstream msg;
      msg << "spike address " << address << " is not allocated to node " << node_id;
      throw std::invalid_argument(msg.str());
    }
  }

  SpikeSet effective = spikes;
  if (node.bias) {
    effective.insert(*node.bias);
  }

  // Read phase. ReadResult carries the pre-read weight, so the reported
  // activation is exactly the sum of weights before any disturbance.
  double activation = 0.0;
  for (Address address : effective) {
    const ReadResult result = read(grid_[address], config_.params, instruction.polarity,
                                   config_.v_read, config_.t_pulse, stream(), config_.limits);
    activation += result.weight;
  }
  if (instruction.polarity == ReadPolarity::Reverse) {
    activation = -activation;
  }

  // Feedback phase.
  std::optional<WriteDirection> direction;
  switch (instruction.feedback) {
  case Feedback::H: direction = WriteDirection::Up; break;
  case Feedback::L: direction = WriteDirection::Down; break;
  case Feedback::U:
    direction = (activation >= 0.0) ? WriteDirection::Up : WriteDirection::Down;
    break;
  case Feedback::A:
    direction = (activation >= 0.0) ? WriteDirection::Down : WriteDirection::Up;
    break;
  case Feedback::Z: break;
  }
  if (direction) {
    for (Address address : effective) {
      write(grid_[address], config_.params, *direction, config_.v_write, config_.t_pulse,
            stream(), config_.limits);
    }
  }

  // Conductance management: forward reads only ever raise total conductance,
  // so every renorm_interval operations the whole node gets one reverse read.
  if (++node.op_counter >= config_.renorm_interval) {
    for (Address address : node.allocation) {
      read(grid_[address], config_.params, ReadPolarity::Reverse, config_.v_read,
           config_.t_pulse, stream(), config_.limits);
    }
    node.op_counter = 0;
  }

  return activation;
}

std::map<Address, double> Core::node_weights(NodeId node_id) const {
  const Node& node = node_ref(node_id);
  std::map<Address, double> weights;
  for (Address address : node.allocation) {
    weights.emplace(address, weight(grid_[address], config_.params));
  }
  return weights;
}

double Core::synapse_weight(Address address) const {
  check_address(address);
  return weight(grid_[address], config_.params);
}

double Core::activation_sum(NodeId node_id, const SpikeSet& spikes) const {
  const Node& node = node_ref(node_id);
  SpikeSet effective = spikes;
  if (node.bias) {
    effective.insert(*node.bias);
  }
  double sum = 0.0;
  for (Address address : effective) {
    check_address(address);
    sum += weight(grid_[address], config_.params);
  }
  return sum;
}

const Synapse& Core::synapse_at(Address address) const {
  check_address(address);
  return grid_[address];
}

void Core::set_synapse_state(Address address, const Synapse& synapse) {
  check_address(address);
  grid_[address] = synapse;
}

// ---------------------------------------------------------------------------
// State image: magic "KTRAM1", version u16, config fields in declaration
// order, synapse records row-major, RNG position, CRC32. Little-endian.
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<std::uint8_t, 6> kMagic = {'K', 'T', 'R', 'A', 'M', '1'};
constexpr std::uint16_t kVersion = 1;

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  // CRC-32 (IEEE), bitwise form; the state file is small enough that a table
  // is not worth carrying.
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::uint8_t byte : bytes) {
    crc ^= byte;
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc >> 1) ^ (0xEDB88320u & (~(crc & 1u) + 1u));
    }
  }
  return ~crc;
}

class Writer {
public:
  void u8(std::uint8_t value) { bytes_.push_back(value); }
  void u16(std::uint16_t value) {
    for (int i = 0; i < 2; ++i) bytes_.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
  void u32(std::uint32_t value) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
  void u64(std::uint64_t value) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
  void f64(double value) { u64(std::bit_cast<std::uint64_t>(value)); }
  void raw(std::span<const std::uint8_t> data) {
    bytes_.insert(bytes_.end(), data.begin(), data.end());
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }
  std::span<const std::uint8_t> view() const { return bytes_; }

private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() { return static_cast<std::uint16_t>(gather(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(gather(4)); }
  std::uint64_t u64() { return gather(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::span<const std::uint8_t> take(std::size_t count) {
    if (offset_ + count > bytes_.size()) {
      throw StateFormatError(StateFormatError::Kind::Truncated,
                             "state image truncated at byte " + std::to_string(bytes_.size()) +
                                 " (needed " + std::to_string(offset_ + count) + ")",
                             bytes_.size());
    }
    const auto view = bytes_.subspan(offset_, count);
    offset_ += count;
    return view;
  }
  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return bytes_.size() - offset_; }

private:
  std::uint64_t gather(std::size_t count) {
    const auto view = take(count);
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < count; ++i) {
      value |= static_cast<std::uint64_t>(view[i]) << (8 * i);
    }
    return value;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t offset_ = 0;
};

} // namespace

std::vector<std::uint8_t> Core::save_state() const {
  Writer out;
  out.raw(kMagic);
  out.u16(kVersion);
  out.u32(config_.rows);
  out.u32(config_.cols);
  out.u32(config_.params.n_switches);
  out.f64(config_.params.w_on);
  out.f64(config_.params.w_off);
  out.f64(config_.params.v_on);
  out.f64(config_.params.v_off);
  out.f64(config_.params.tau);
  out.f64(config_.params.beta);
  out.f64(config_.v_read);
  out.f64(config_.v_write);
  out.f64(config_.t_pulse);
  out.u32(config_.renorm_interval);
  out.u8(static_cast<std::uint8_t>(config_.mode));
  out.u64(config_.seed);
  for (const Synapse& synapse : grid_) {
    if (config_.mode == UpdateMode::MeanField) {
      out.f64(synapse.dev_a.on_fraction);
      out.f64(synapse.dev_b.on_fraction);
    } else {
      out.u32(synapse.dev_a.on_count);
      out.u32(synapse.dev_b.on_count);
    }
  }
  out.u64(rng_.position());
  const std::uint32_t checksum = crc32(out.view());
  out.u32(checksum);
  return out.take();
}

Core Core::load_state(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  const auto magic = in.take(kMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
    throw StateFormatError(StateFormatError::Kind::BadMagic, "state image has bad magic", 0);
  }
  const std::uint16_t version = in.u16();
  if (version != kVersion) {
    throw StateFormatError(StateFormatError::Kind::BadVersion,
                           "unsupported state image version " + std::to_string(version), 6);
  }

  CoreConfig config;
  config.rows = in.u32();
  config.cols = in.u32();
  config.params.n_switches = in.u32();
  config.params.w_on = in.f64();
  config.params.w_off = in.f64();
  config.params.v_on = in.f64();
  config.params.v_off = in.f64();
  config.params.tau = in.f64();
  config.params.beta = in.f64();
  config.v_read = in.f64();
  config.v_write = in.f64();
  config.t_pulse = in.f64();
  config.renorm_interval = in.u32();
  const std::uint8_t mode_byte = in.u8();
  if (mode_byte > 1) {
    throw StateFormatError(StateFormatError::Kind::BadField,
                           "invalid mode byte " + std::to_string(mode_byte), in.offset() - 1);
  }
  config.mode = static_cast<UpdateMode>(mode_byte);
  config.seed = in.u64();
  try {
    validate(config);
  } catch (const std::invalid_argument& error) {
    throw StateFormatError(StateFormatError::Kind::BadField,
                           std::string("invalid config in state image: ") + error.what(),
                           in.offset());
  }

  const std::uint64_t cells =
      static_cast<std::uint64_t>(config.rows) * static_cast<std::uint64_t>(config.cols);
  std::vector<Synapse> grid;
  grid.reserve(cells);
  for (std::uint64_t i = 0; i < cells; ++i) {
    if (config.mode == UpdateMode::MeanField) {
      const double n_a = in.f64();
      const double n_b = in.f64();
      if (!(n_a >= 0.0 && n_a <= 1.0) || !(n_b >= 0.0 && n_b <= 1.0)) {
        throw StateFormatError(StateFormatError::Kind::BadField,
                               "on_fraction outside [0,1] in synapse record " + std::to_string(i),
                               in.offset());
      }
      grid.push_back(Synapse::mean_field(n_a, n_b));
    } else {
      const std::uint32_t count_a = in.u32();
      const std::uint32_t count_b = in.u32();
      if (count_a > config.params.n_switches || count_b > config.params.n_switches) {
        throw StateFormatError(StateFormatError::Kind::BadField,
                               "on_count above n_switches in synapse record " + std::to_string(i),
                               in.offset());
      }
      grid.push_back(Synapse::stochastic(count_a, count_b));
    }
  }
  const std::uint64_t rng_position = in.u64();

  const std::size_t payload_size = in.offset();
  const std::uint32_t stored_checksum = in.u32();
  if (in.remaining() != 0) {
    throw StateFormatError(StateFormatError::Kind::Truncated,
                           "state image has " + std::to_string(in.remaining()) +
                               " trailing bytes",
                           in.offset());
  }
  const std::uint32_t computed = crc32(bytes.subspan(0, payload_size));
  if (computed != stored_checksum) {
    throw StateFormatError(StateFormatError::Kind::BadChecksum, "state image checksum mismatch",
                           payload_size);
  }

  Core core(config);
  core.grid_ = std::move(grid);
  core.rng_ = RandomStream(config.seed, rng_position);
  return core;
}

} // namespace ktram
