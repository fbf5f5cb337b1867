#pragma once

#include <string>

#include <Eigen/Core>

#include "cbnn/grid.hpp"
#include "cbnn/random.hpp"
#include "cbnn/ternary_net.hpp"

namespace cbnn {

// Differential layout (0-based): w1[i][n] uses row i, columns 2n (g_e) and
// 2n+1 (g_i); w2[n][c] uses column 12+c, rows 2n (g_e) and 2n+1 (g_i).
// Rows 13-14 and row 12 columns 12-14 are never used.

enum class ZeroEncoding { BothOff, BothOn };

ZeroEncoding parse_zero_encoding(const std::string& name);
std::string to_string(ZeroEncoding e);

TargetStateMap map_weights(const TernarySolution& net, ZeroEncoding zero = ZeroEncoding::BothOff);

/// True for the 13*12 + 12*3 cells the layout uses.
bool cell_used(int i, int j);

struct HardwareWeights {
  Eigen::Matrix<double, kNumFeatures, kHidden> w1;
  Eigen::Matrix<double, kHidden, kNumClasses> w2;
};

/// (g_e - g_i) / g_norm per weight. Throws std::invalid_argument if g_norm <= 0.
HardwareWeights extract_weights(const ConductanceMap& g, double g_norm);

/// Target map of a network with uniformly random ternary weights.
TargetStateMap random_solution_targets(Rng& rng);

}  // namespace cbnn
