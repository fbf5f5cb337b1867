#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace cbnn {

inline constexpr int kNumFeatures = 13;
inline constexpr int kNumClasses = 3;
inline constexpr int kWineSamples = 178;
inline constexpr int kWineTestSamples = 30;

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, kNumFeatures, Eigen::RowMajor>;
using FeatureVector = Eigen::Matrix<double, kNumFeatures, 1>;

/// Samples x 13 attributes with 0-based class labels. `sample_ids` keeps the
/// row index each sample had in the source file so splits can be audited.
struct Dataset {
  FeatureMatrix features;
  std::vector<int> labels;
  std::vector<int> sample_ids;

  int size() const { return static_cast<int>(labels.size()); }
  FeatureVector sample(int k) const { return features.row(k).transpose(); }
};

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

/// Parses the UCI layout: label (1-3) first, then 13 comma-separated numbers.
/// Blank lines are skipped. Throws ParseError (with line number) or
/// std::runtime_error when the file cannot be opened.
Dataset load_wine(const std::filesystem::path& path);

/// Column-wise min-max scaling into [0, 1]; constant columns become 0.
Dataset normalize(const Dataset& ds);

/// Stratified shuffle split into 148 train / 30 test. Requires 178 samples.
TrainTestSplit split(const Dataset& ds, std::uint64_t seed);

std::array<int, kNumClasses> class_histogram(const Dataset& ds);

/// Rows `idx` of `ds`, in the given order.
Dataset subset(const Dataset& ds, const std::vector<int>& idx);

/// Load, check the UCI class histogram, normalize over all samples and split.
TrainTestSplit load_wine_split(const std::filesystem::path& path, std::uint64_t split_seed);

}  // namespace cbnn
