#include "cbnn/stats.hpp"

#include <algorithm>
#include <stdexcept>

namespace cbnn {
namespace {

double at_fraction(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

Quartiles quartile_stats(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("quartile_stats: empty input");
  std::sort(values.begin(), values.end());
  return {values.front(), at_fraction(values, 0.25), at_fraction(values, 0.5), at_fraction(values, 0.75),
          values.back()};
}

double median(std::vector<double> values) { return quartile_stats(std::move(values)).median; }

void to_json(nlohmann::json& j, const Quartiles& q) {
  j = {{"min", q.min}, {"q25", q.q25}, {"median", q.median}, {"q75", q.q75}, {"max", q.max}};
}

}  // namespace cbnn
