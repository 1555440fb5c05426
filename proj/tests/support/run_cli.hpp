/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef KTRAM_TESTS_RUN_CLI_HPP
#define KTRAM_TESTS_RUN_CLI_HPP

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace ktram_tests {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string slurp_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

/// Runs `binary args...` through the shell, capturing exit code and streams.
inline CliResult run_cli(const std::string& binary, const std::string& args,
                         const std::filesystem::path& scratch_dir) {
  std::filesystem::create_directories(scratch_dir);
  const auto out_file = scratch_dir / "cli_stdout.txt";
  const auto err_file = scratch_dir / "cli_stderr.txt";
  std::ostringstream command;
  command << "'" << binary << "' " << args << " >'" << out_file.string() << "' 2>'"
          << err_file.string() << "'";
  const int status = std::system(command.str().c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp_file(out_file);
  result.err = slurp_file(err_file);
  return result;
}

} // namespace ktram_tests

#endif // KTRAM_TESTS_RUN_CLI_HPP
