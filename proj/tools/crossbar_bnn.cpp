#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cbnn/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Binary neural network inference on a simulated passive MTJ crossbar"};
  app.require_subcommand(1);

  std::string config_path;
  std::string size;
  cbnn::RunOptions opts;
  std::string out;
  std::uint64_t seed = 0;
  int jobs = 0;

  auto add_common = [&](CLI::App* cmd, bool with_size) {
    cmd->add_option("--config", config_path, "study config (JSON)")->required()->check(CLI::ExistingFile);
    if (with_size) cmd->add_option("--size", size, "size block name (default: first block)");
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--seed", seed, "global seed");
    cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  };
  auto* train = app.add_subcommand("train", "train the ternary solutions");
  auto* characterize = app.add_subcommand("characterize", "switching and conductance maps of one array");
  auto* sweep = app.add_subcommand("sweep", "program every solution and sweep g_norm");
  auto* variation = app.add_subcommand("variation-study", "repeat the sweep over array realizations and sizes");
  auto* superposition = app.add_subcommand("superposition", "parallel vs serial read check");
  add_common(train, false);
  add_common(characterize, true);
  add_common(sweep, true);
  add_common(variation, false);
  add_common(superposition, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage problems count as configuration errors; --help still exits 0
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    for (auto* cmd : app.get_subcommands()) {
      if (cmd->count("--out")) opts.out = out;
      if (cmd->count("--seed")) opts.seed = seed;
      if (cmd->count("--jobs")) opts.jobs = jobs;
    }
    const cbnn::StudyConfig cfg = cbnn::resolve_config(config_path, opts);
    const std::string size_name = size.empty() ? cfg.sizes.front().name : size;
    if (train->parsed()) cbnn::cmd_train(cfg, std::cout);
    if (characterize->parsed()) cbnn::cmd_characterize(cfg, size_name, std::cout);
    if (sweep->parsed()) cbnn::cmd_sweep(cfg, size_name, std::cout);
    if (variation->parsed()) cbnn::cmd_variation_study(cfg, std::cout);
    if (superposition->parsed()) cbnn::cmd_superposition(cfg, size_name, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cbnn::exit_code_for(e);
  }
  return 0;
}
