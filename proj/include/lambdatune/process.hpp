#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lambdatune {

struct ProcessResult {
  int exit_code = 0;
  // Combined stdout and stderr.
  std::string output;
};

// Runs argv directly (no shell). argv[0] is looked up on PATH when it has
// no slash. Output is captured through `capture_path`, which is left in
// place for inspection. Throws ProcessError when the child cannot start.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::filesystem::path& capture_path);

}  // namespace lambdatune
