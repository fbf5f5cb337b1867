#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "cbnn/crossbar.hpp"
#include "cbnn/stats.hpp"
#include "cbnn/ternary_net.hpp"
#include "cbnn/weight_mapper.hpp"
#include "cbnn/wine_data.hpp"

namespace cbnn {

inline constexpr double kDefaultVRead = 0.2;

struct HwOutput {
  OutputVector outputs;
  int predicted = 0;
};

/// Inference from measured conductances: column currents are summed from
/// per-device conductances (serial-superposition model), differenced per
/// column pair and normalized by V_read * g_norm. Throws std::invalid_argument
/// if g_norm <= 0.
HwOutput hw_forward(const ConductanceMap& g, double g_norm, const HiddenVector& b1,
                    const OutputVector& b2, const FeatureVector& x, double v_read = kDefaultVRead);

double solution_accuracy(const ConductanceMap& g, double g_norm, const TernarySolution& net,
                         const Dataset& ds, double v_read = kDefaultVRead);

/// sqrt(sum of squared layer-1 errors) + sqrt(sum of squared layer-2 errors).
double rms_deviation(const TernarySolution& net, const HardwareWeights& hw);

/// Evaluates one measured map at many g_norm values. The input-dependent part
/// of layer 1 is computed once; each g_norm then costs a few small products.
class HardwareEvaluator {
 public:
  HardwareEvaluator(const ConductanceMap& g, const TernarySolution& net, const Dataset& ds);

  double accuracy(double g_norm) const;
  double rms(double g_norm) const;
  /// samples x 3 outputs at g_norm.
  Eigen::MatrixXd outputs(double g_norm) const;

 private:
  const TernarySolution& net_;
  std::vector<int> labels_;
  Eigen::Matrix<double, kNumFeatures, kHidden> d1_;   // g_e - g_i, layer 1
  Eigen::Matrix<double, kHidden, kNumClasses> d2_;    // g_e - g_i, layer 2
  Eigen::MatrixXd xd1_;                               // samples x hidden
};

struct HwEvalResult {
  std::uint64_t seed = 0;
  double g_norm = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double rms_deviation = 0.0;
  // Filled only when traces are requested: train samples then test samples.
  Eigen::MatrixXd traces;
  std::vector<int> trace_labels;
};

HwEvalResult evaluate_solution(const ConductanceMap& g, double g_norm, const TernarySolution& net,
                               const Dataset& train, const Dataset& test, bool keep_traces);

void to_json(nlohmann::json& j, const HwEvalResult& r);
/// Header `sample,I_out1,I_out2,I_out3,label`, labels 1-based.
void write_trace_csv(std::ostream& os, const HwEvalResult& r);

struct SuperpositionConfig {
  int n_vectors = 100;
  std::vector<double> voltages{0.1, 0.2, 0.3, 0.4, 0.5};
  double v_read = kDefaultVRead;
};

struct SuperpositionResult {
  std::vector<double> voltages;
  std::vector<std::vector<double>> deviation;  // [voltage][vector]
  std::vector<Quartiles> stats;
};

/// Compares simultaneous multi-row drive ("parallel") against the sum of
/// serially read device conductances for random binary input vectors.
SuperpositionResult superposition_check(Crossbar& xbar, const SuperpositionConfig& cfg,
                                        std::uint64_t seed);

void to_json(nlohmann::json& j, const SuperpositionResult& r);

}  // namespace cbnn
