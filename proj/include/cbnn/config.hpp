#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbnn/crossbar.hpp"
#include "cbnn/gnorm_study.hpp"
#include "cbnn/hw_inference.hpp"
#include "cbnn/trainer.hpp"

namespace cbnn {

struct GridSpec {
  double start = 1.0;
  double stop = 12.0;
  double step = 0.1;

  std::vector<double> values() const { return make_grid(start, stop, step); }
};

struct SizeBlock {
  std::string name;
  DeviceParams device;
  LineGeometry lines;
};

/// Everything an experiment needs. Relative paths are resolved against the
/// directory of the config file.
struct StudyConfig {
  std::uint64_t seed = 1;
  std::filesystem::path dataset;
  std::uint64_t split_seed = 0;
  TrainConfig training;
  int n_solutions = 300;
  VerifyConfig verify;
  ZeroEncoding zero = ZeroEncoding::BothOff;
  double v_read = 0.2;
  GridSpec grid;
  int n_realizations = 30;
  SuperpositionConfig superposition;
  std::filesystem::path output_dir = "out";
  int jobs = 1;
  std::vector<SizeBlock> sizes;

  const SizeBlock& size(const std::string& name) const;
  ArraySetup array_setup(const SizeBlock& block) const;
};

/// Parses and validates; every violation raises ConfigError.
StudyConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
StudyConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const StudyConfig& c);

}  // namespace cbnn
