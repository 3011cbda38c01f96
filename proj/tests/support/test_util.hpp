#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "annotator/io.hpp"

namespace test_util {

// Fresh directory under the system temp root; unique per call.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  const auto dir = std::filesystem::temp_directory_path() /
                   ("annotator_" + tag + "_" + std::to_string(stamp) + "_" +
                    std::to_string(counter.fetch_add(1)));
  std::filesystem::create_directories(dir);
  return dir;
}

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs a shell command; stdout/stderr captured via files in `dir`.
inline CommandResult run_command(const std::filesystem::path& dir,
                                 const std::string& command) {
  const auto out_path = dir / "cmd.out";
  const auto err_path = dir / "cmd.err";
  const std::string full = command + " > " + out_path.string() + " 2> " +
                           err_path.string();
  const int status = std::system(full.c_str());
  CommandResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (std::filesystem::exists(out_path)) {
    result.out = annotator::read_file(out_path);
  }
  if (std::filesystem::exists(err_path)) {
    result.err = annotator::read_file(err_path);
  }
  return result;
}

}  // namespace test_util
