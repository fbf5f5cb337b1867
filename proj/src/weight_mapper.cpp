#include "cbnn/weight_mapper.hpp"

#include <stdexcept>

#include "cbnn/errors.hpp"

namespace cbnn {
namespace {

void place(TargetStateMap& m, int ei, int ej, int ii, int ij, int w, ZeroEncoding zero) {
  const bool both = w == 0 && zero == ZeroEncoding::BothOn;
  m.set(ei, ej, w > 0 || both);
  m.set(ii, ij, w < 0 || both);
}

}  // namespace

ZeroEncoding parse_zero_encoding(const std::string& name) {
  if (name == "off_off") return ZeroEncoding::BothOff;
  if (name == "on_on") return ZeroEncoding::BothOn;
  throw ConfigError("zero_encoding must be \"off_off\" or \"on_on\", got \"" + name + "\"");
}

std::string to_string(ZeroEncoding e) { return e == ZeroEncoding::BothOff ? "off_off" : "on_on"; }

TargetStateMap map_weights(const TernarySolution& net, ZeroEncoding zero) {
  TargetStateMap m;
  for (int i = 0; i < kNumFeatures; ++i)
    for (int n = 0; n < kHidden; ++n) place(m, i, 2 * n, i, 2 * n + 1, net.w1(i, n), zero);
  for (int n = 0; n < kHidden; ++n)
    for (int c = 0; c < kNumClasses; ++c) place(m, 2 * n, 12 + c, 2 * n + 1, 12 + c, net.w2(n, c), zero);
  return m;
}

bool cell_used(int i, int j) {
  if (j < 2 * kHidden) return i < kNumFeatures;
  return j < 2 * kHidden + kNumClasses && i < 2 * kHidden;
}

HardwareWeights extract_weights(const ConductanceMap& g, double g_norm) {
  if (!(g_norm > 0.0)) throw std::invalid_argument("extract_weights: g_norm must be > 0");
  HardwareWeights w;
  for (int i = 0; i < kNumFeatures; ++i)
    for (int n = 0; n < kHidden; ++n) w.w1(i, n) = (g(i, 2 * n) - g(i, 2 * n + 1)) / g_norm;
  for (int n = 0; n < kHidden; ++n)
    for (int c = 0; c < kNumClasses; ++c) w.w2(n, c) = (g(2 * n, 12 + c) - g(2 * n + 1, 12 + c)) / g_norm;
  return w;
}

TargetStateMap random_solution_targets(Rng& rng) {
  std::uniform_int_distribution<int> pick(-1, 1);
  TernarySolution net;
  for (int k = 0; k < net.w1.size(); ++k) net.w1.data()[k] = pick(rng);
  for (int k = 0; k < net.w2.size(); ++k) net.w2.data()[k] = pick(rng);
  return map_weights(net);
}

}  // namespace cbnn
