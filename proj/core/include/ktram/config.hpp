/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef KTRAM_CONFIG_HPP
#define KTRAM_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ktram/device.hpp"

namespace ktram {

/**
 * Line-oriented `key = value` text with optional `[section]` headers.
 * `#` starts a comment. Keys outside any header land in the "" section.
 * Order is preserved for writing. Used for the device preset file, the CLI
 * config file and model companion headers.
 */
class KeyValueFile {
public:
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
  };

  static KeyValueFile parse(std::string_view text);
  static KeyValueFile parse_file(const std::string& path);

  /// Last value wins when a key repeats within a section.
  std::optional<std::string> get(std::string_view section, std::string_view key) const;
  double get_double(std::string_view section, std::string_view key) const;
  std::uint64_t get_u64(std::string_view section, std::string_view key) const;

  bool has_section(std::string_view section) const;
  void set(std::string_view section, std::string_view key, std::string_view value);

  std::string serialize() const;
  void write_file(const std::string& path) const;

  const std::vector<Section>& sections() const { return sections_; }

private:
  Section& section(std::string_view name);
  std::vector<Section> sections_;
};

/// Reads one `[variant]` section of a preset file into a DeviceParams record.
DeviceParams params_from_config(const KeyValueFile& file, std::string_view section);

/// Renders params as one preset-file section body (keys in field order).
void params_to_config(KeyValueFile& file, std::string_view section, const DeviceParams& params);

} // namespace ktram

#endif // KTRAM_CONFIG_HPP
