#pragma once

#include <vector>

#include <json.hpp>

namespace cbnn {

struct Quartiles {
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

/// Order statistics with linear interpolation between closest ranks.
/// Throws std::invalid_argument on an empty input.
Quartiles quartile_stats(std::vector<double> values);

double median(std::vector<double> values);

void to_json(nlohmann::json& j, const Quartiles& q);

}  // namespace cbnn
