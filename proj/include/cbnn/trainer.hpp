#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "cbnn/ternary_net.hpp"
#include "cbnn/wine_data.hpp"

namespace cbnn {

/// Straight-through-estimator training of the ternary network. Latent weights
/// are real, clipped to [-latent_clip, latent_clip], and quantized with a
/// symmetric dead zone of half-width `quantization_threshold` on every
/// forward pass. `batch_size` 0 means full batch.
struct TrainConfig {
  int epochs = 1000;
  double learning_rate = 0.2;
  double quantization_threshold = 0.3;
  int batch_size = 0;
  double latent_clip = 1.0;
  double target_train_accuracy = 0.96;
  // A solution is only accepted when its test accuracy also reaches this
  // value (0 disables the gate).
  double min_test_accuracy = 0.0;
  int max_restarts = 50;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct TrainHistory {
  // Mean cross-entropy of the latent (unquantized) network, one per epoch.
  std::vector<double> latent_loss;
};

int quantize(double latent, double threshold);

/// One training run from the initialization drawn with `init_seed`, no
/// restarts. The returned solution's seed is `init_seed`.
TernarySolution train_attempt(std::uint64_t init_seed, const Dataset& train,
                              const TrainConfig& cfg, TrainHistory* history = nullptr);

/// Trains until the accuracy targets are met, re-drawing the initialization
/// up to cfg.max_restarts times. Throws TrainingFailure with the best train
/// accuracy seen otherwise.
TernarySolution train_one(std::uint64_t seed, const Dataset& train, const TrainConfig& cfg,
                          const Dataset* test = nullptr);

std::vector<TernarySolution> generate_solutions(int n, std::uint64_t base_seed,
                                                const Dataset& train, const Dataset* test,
                                                const TrainConfig& cfg, int jobs = 1);

/// For each solution, the index of the first earlier solution with identical
/// weights, or -1.
std::vector<int> duplicate_of(const std::vector<TernarySolution>& solutions);

}  // namespace cbnn
