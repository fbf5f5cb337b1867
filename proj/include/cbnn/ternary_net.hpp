#pragma once

#include <cstdint>

#include <Eigen/Core>
#include <json.hpp>

#include "cbnn/wine_data.hpp"

namespace cbnn {

inline constexpr int kHidden = 6;

using Layer1Weights = Eigen::Matrix<int, kNumFeatures, kHidden>;
using Layer2Weights = Eigen::Matrix<int, kHidden, kNumClasses>;
using HiddenVector = Eigen::Matrix<double, kHidden, 1>;
using OutputVector = Eigen::Matrix<double, kNumClasses, 1>;

/// A trained 13-6-3 network. Weights are exactly -1, 0 or +1; biases are real
/// and stay in software. Accuracies are the software values recorded by the
/// trainer (negative when unknown).
struct TernarySolution {
  Layer1Weights w1 = Layer1Weights::Zero();
  HiddenVector b1 = HiddenVector::Zero();
  Layer2Weights w2 = Layer2Weights::Zero();
  OutputVector b2 = OutputVector::Zero();
  std::uint64_t seed = 0;
  double train_accuracy = -1.0;
  double test_accuracy = -1.0;

  bool is_ternary() const;
};

struct ForwardPass {
  HiddenVector z;
  HiddenVector a;
  OutputVector logits;
  OutputVector probs;
};

ForwardPass forward(const TernarySolution& net, const FeatureVector& x);

/// Numerically stable softmax.
OutputVector softmax(const OutputVector& logits);

/// Index of the largest entry; ties resolve to the lowest index.
int argmax(const OutputVector& v);

int predict(const TernarySolution& net, const FeatureVector& x);

/// Fraction of samples classified correctly. Throws std::invalid_argument on
/// an empty dataset.
double accuracy(const TernarySolution& net, const Dataset& ds);

void to_json(nlohmann::json& j, const TernarySolution& s);
/// Validates shapes and that every weight is ternary; throws ParseError.
void from_json(const nlohmann::json& j, TernarySolution& s);

}  // namespace cbnn
