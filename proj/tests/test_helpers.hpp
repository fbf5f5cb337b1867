#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "cbnn/ternary_net.hpp"
#include "cbnn/wine_data.hpp"

namespace testing {

inline std::filesystem::path wine_path() { return std::filesystem::path(CBNN_DATA_DIR) / "wine.data"; }
inline std::filesystem::path default_config() { return std::filesystem::path(CBNN_CONFIG_DIR) / "default.json"; }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cbnn_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline cbnn::TernarySolution random_solution(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> w(-1, 1);
  std::normal_distribution<double> b(0.0, 0.5);
  cbnn::TernarySolution s;
  for (int k = 0; k < s.w1.size(); ++k) s.w1.data()[k] = w(rng);
  for (int k = 0; k < s.w2.size(); ++k) s.w2.data()[k] = w(rng);
  for (int k = 0; k < cbnn::kHidden; ++k) s.b1[k] = b(rng);
  for (int k = 0; k < cbnn::kNumClasses; ++k) s.b2[k] = b(rng);
  s.seed = rng();
  return s;
}

}  // namespace testing
