/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef KTRAM_VERSION_HPP
#define KTRAM_VERSION_HPP

namespace ktram {

inline constexpr const char* kVersionString = "0.1.0";

} // namespace ktram

#endif // KTRAM_VERSION_HPP
