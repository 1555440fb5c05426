/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "ktram/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ktram/errors.hpp"

namespace ktram {

namespace {

std::string_view trim(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t' || text.front() == '\r')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  return text;
}

} // namespace

KeyValueFile KeyValueFile::parse(std::string_view text) {
  KeyValueFile file;
  std::string current;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
    ++line_no;

    line = trim(line);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw DataError("config line " + std::to_string(line_no) + ": malformed section header");
      }
      current = std::string(trim(line.substr(1, line.size() - 2)));
      file.section(current);
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw DataError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw DataError("config line " + std::to_string(line_no) + ": empty key");
    }
    file.section(current).entries.emplace_back(std::string(key), std::string(value));
  }
  return file;
}

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open config file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::optional<std::string> KeyValueFile::get(std::string_view section_name,
                                             std::string_view key) const {
  for (const Section& section : sections_) {
    if (section.name != section_name) {
      continue;
    }
    std::optional<std::string> found;
    for (const auto& [entry_key, entry_value] : section.entries) {
      if (entry_key == key) {
        found = entry_value;
      }
    }
    return found;
  }
  return std::nullopt;
}

double KeyValueFile::get_double(std::string_view section_name, std::string_view key) const {
  const auto text = get(section_name, key);
  if (!text) {
    throw DataError("missing config key '" + std::string(key) + "' in section [" +
                    std::string(section_name) + "]");
  }
  try {
    std::size_t consumed = 0;
    const double value = std::stod(*text, &consumed);
    if (consumed != text->size()) {
      throw std::invalid_argument("trailing characters");
    }
    return value;
  } catch (const std::exception&) {
    throw DataError("config key '" + std::string(key) + "' is not a number: " + *text);
  }
}

std::uint64_t KeyValueFile::get_u64(std::string_view section_name, std::string_view key) const {
  const auto text = get(section_name, key);
  if (!text) {
    throw DataError("missing config key '" + std::string(key) + "' in section [" +
                    std::string(section_name) + "]");
  }
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), value);
  if (ec != std::errc{} || ptr != text->data() + text->size()) {
    throw DataError("config key '" + std::string(key) + "' is not an unsigned integer: " + *text);
  }
  return value;
}

bool KeyValueFile::has_section(std::string_view section_name) const {
  for (const Section& section : sections_) {
    if (section.name == section_name) {
      return true;
    }
  }
  return false;
}

void KeyValueFile::set(std::string_view section_name, std::string_view key,
                       std::string_view value) {
  Section& target = section(section_name);
  for (auto& [entry_key, entry_value] : target.entries) {
    if (entry_key == key) {
      entry_value = std::string(value);
      return;
    }
  }
  target.entries.emplace_back(std::string(key), std::string(value));
}

std::string KeyValueFile::serialize() const {
  std::ostringstream out;
  bool first = true;
  for (const Section& section : sections_) {
    if (!first) {
      out << "\n";
    }
    first = false;
    if (!section.name.empty()) {
      out << "[" << section.name << "]\n";
    }
    for (const auto& [key, value] : section.entries) {
      out << key << " = " << value << "\n";
    }
  }
  return out.str();
}

void KeyValueFile::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write config file: " + path);
  }
  out << serialize();
}

KeyValueFile::Section& KeyValueFile::section(std::string_view name) {
  for (Section& section : sections_) {
    if (section.name == name) {
      return section;
    }
  }
  sections_.push_back(Section{std::string(name), {}});
  return sections_.back();
}

namespace {

// Shortest decimal form that round-trips to the same double.
std::string format_double(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

} // namespace

DeviceParams params_from_config(const KeyValueFile& file, std::string_view section) {
  DeviceParams params;
  params.n_switches = static_cast<std::uint32_t>(file.get_u64(section, "n_switches"));
  params.w_on = file.get_double(section, "w_on");
  params.w_off = file.get_double(section, "w_off");
  params.v_on = file.get_double(section, "v_on");
  params.v_off = file.get_double(section, "v_off");
  params.tau = file.get_double(section, "tau");
  params.beta = file.get_double(section, "beta");
  validate(params);
  return params;
}

void params_to_config(KeyValueFile& file, std::string_view section, const DeviceParams& params) {
  file.set(section, "n_switches", std::to_string(params.n_switches));
  file.set(section, "w_on", format_double(params.w_on));
  file.set(section, "w_off", format_double(params.w_off));
  file.set(section, "v_on", format_double(params.v_on));
  file.set(section, "v_off", format_double(params.v_off));
  file.set(section, "tau", format_double(params.tau));
  file.set(section, "beta", format_double(params.beta));
}

} // namespace ktram
