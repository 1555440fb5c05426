/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef KTRAM_ERRORS_HPP
#define KTRAM_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ktram {

/// A pulse outside the emulated operating regime (amplitude or width limit).
class PulseRangeError : public std::domain_error {
public:
  explicit PulseRangeError(const std::string& what) : std::domain_error(what) {}
};

/// Malformed or corrupt core state image.
class StateFormatError : public std::runtime_error {
public:
  enum class Kind { BadMagic, BadVersion, Truncated, BadChecksum, BadField };

  StateFormatError(Kind kind, const std::string& what, std::size_t offset = 0)
      : std::runtime_error(what), kind_(kind), offset_(offset) {}

  Kind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

private:
  Kind kind_;
  std::size_t offset_;
};

/// Unreadable or malformed dataset file (IDX, CSV).
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ktram

#endif // KTRAM_ERRORS_HPP
