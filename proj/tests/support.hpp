#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "ego_focus/focus_io.hpp"
#include "ego_focus/geometry.hpp"

namespace test_support {

inline ego_focus::Intrinsics vga() { return ego_focus::Intrinsics{500.0, 500.0, 320.0, 240.0, 640, 480}; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ego_focus_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Relative path -> file bytes, for byte-wise tree comparison.
inline std::map<std::string, std::string> read_tree(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).string()] = ego_focus::read_file(e.path());
  }
  return out;
}

/// Runs the CLI through the shell; returns the exit code.
inline int run_cli(const std::string& args, const std::string& env = "") {
#ifdef EGO_FOCUS_CLI
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + EGO_FOCUS_CLI + "' " + args;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#else
  (void)args;
  (void)env;
  return -1;
#endif
}

}  // namespace test_support
