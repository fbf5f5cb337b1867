#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cbnn/config.hpp"

namespace cbnn {

/// Command-line overrides. CBNN_OUT_DIR and CBNN_JOBS from the environment
/// apply first; explicit flags win over both the environment and the file.
struct RunOptions {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

StudyConfig resolve_config(const std::filesystem::path& config_path, const RunOptions& opts);

std::filesystem::path solutions_dir(const StudyConfig& cfg);
/// Throws ConfigError telling the user to run `train` when files are missing.
std::vector<TernarySolution> load_solutions(const StudyConfig& cfg);

void cmd_train(const StudyConfig& cfg, std::ostream& log);
void cmd_characterize(const StudyConfig& cfg, const std::string& size, std::ostream& log);
void cmd_sweep(const StudyConfig& cfg, const std::string& size, std::ostream& log);
void cmd_variation_study(const StudyConfig& cfg, std::ostream& log);
void cmd_superposition(const StudyConfig& cfg, const std::string& size, std::ostream& log);

/// Exit code for an exception escaping a command: 2 config, 3 training,
/// 4 solver, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace cbnn
