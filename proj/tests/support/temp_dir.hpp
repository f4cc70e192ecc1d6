#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace testing_support {

/// Scratch directory: $PACBAYES_TEST_TMP if set, else under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& leaf) {
  const char* env = std::getenv("PACBAYES_TEST_TMP");
  const std::filesystem::path base = env ? std::filesystem::path(env) : std::filesystem::temp_directory_path() / "pacbayes_tests";
  const auto dir = base / leaf;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace testing_support
