#include <doctest.h>

#include <random>
#include <sstream>

#include "cbnn/hw_inference.hpp"
#include "cbnn/weight_mapper.hpp"
#include "test_helpers.hpp"

using namespace cbnn;

namespace {

const TrainTestSplit& wine() {
  static const TrainTestSplit s = load_wine_split(testing::wine_path(), 0);
  return s;
}

ConductanceMap ideal_map(const TargetStateMap& m, double g_off, double g_on) {
  ConductanceMap g;
  for (int i = 0; i < kRows; ++i)
    for (int j = 0; j < kCols; ++j) g(i, j) = m.at(i, j) ? g_on : g_off;
  return g;
}

}  // namespace

TEST_CASE("an ideal map at g_norm = g_on - g_off reproduces software inference") {
  std::mt19937_64 rng(31);
  const TernarySolution net = testing::random_solution(rng);
  const ConductanceMap g = ideal_map(map_weights(net), 7.0, 13.5);
  for (int k = 0; k < wine().test.size(); ++k) {
    const FeatureVector x = wine().test.sample(k);
    const HwOutput hw = hw_forward(g, 6.5, net.b1, net.b2, x);
    const ForwardPass sw = forward(net, x);
    for (int c = 0; c < kNumClasses; ++c) CHECK(hw.outputs[c] == doctest::Approx(sw.logits[c]).epsilon(1e-12));
    CHECK(hw.predicted == predict(net, x));
  }
  CHECK(solution_accuracy(g, 6.5, net, wine().train) == accuracy(net, wine().train));
  CHECK(rms_deviation(net, extract_weights(g, 6.5)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("read voltage cancels out of the normalized outputs") {
  std::mt19937_64 rng(2);
  const TernarySolution net = testing::random_solution(rng);
  ConductanceMap g = ConductanceMap::Random().array() * 3.0 + 9.0;
  const FeatureVector x = wine().train.sample(5);
  const HwOutput a = hw_forward(g, 5.0, net.b1, net.b2, x, 0.2);
  const HwOutput b = hw_forward(g, 5.0, net.b1, net.b2, x, 0.05);
  CHECK(a.outputs.isApprox(b.outputs, 1e-12));
  CHECK_THROWS_AS(hw_forward(g, -1.0, net.b1, net.b2, x), std::invalid_argument);
}

TEST_CASE("the batched evaluator agrees with the per-sample model") {
  std::mt19937_64 rng(44);
  const TernarySolution net = testing::random_solution(rng);
  const ConductanceMap g = ConductanceMap::Random().array() * 4.0 + 10.0;
  const HardwareEvaluator ev(g, net, wine().train);
  for (double gn : {1.0, 3.3, 7.0, 15.5}) {
    CHECK(ev.accuracy(gn) == solution_accuracy(g, gn, net, wine().train));
    CHECK(ev.rms(gn) == doctest::Approx(rms_deviation(net, extract_weights(g, gn))));
    const Eigen::MatrixXd out = ev.outputs(gn);
    const HwOutput one = hw_forward(g, gn, net.b1, net.b2, wine().train.sample(17));
    CHECK(out.row(17).transpose().isApprox(one.outputs, 1e-12));
  }
}

TEST_CASE("rms deviation sums the two layer norms") {
  TernarySolution net;
  HardwareWeights hw{decltype(HardwareWeights::w1)::Zero(), decltype(HardwareWeights::w2)::Zero()};
  hw.w1(0, 0) = 3.0;
  hw.w1(1, 1) = 4.0;
  hw.w2(2, 2) = -2.0;
  CHECK(rms_deviation(net, hw) == doctest::Approx(7.0));
}

TEST_CASE("evaluate_solution keeps traces in train-then-test order") {
  std::mt19937_64 rng(5);
  const TernarySolution net = testing::random_solution(rng);
  const ConductanceMap g = ideal_map(map_weights(net), 8.0, 15.0);
  const HwEvalResult r = evaluate_solution(g, 7.0, net, wine().train, wine().test, true);
  CHECK(r.traces.rows() == 178);
  CHECK(r.train_accuracy == accuracy(net, wine().train));
  CHECK(r.test_accuracy == accuracy(net, wine().test));
  CHECK(r.trace_labels[148] == wine().test.labels[0]);
  std::ostringstream os;
  write_trace_csv(os, r);
  const std::string csv = os.str();
  CHECK(csv.rfind("sample,I_out1,I_out2,I_out3,label\n1,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 179);
}

TEST_CASE("superposition is exact for linear devices and degrades with nonlinearity") {
  DeviceParams p;
  p.read_noise_std = 0.0;
  LineGeometry geo;
  geo.row_lead = triangular_lead_profile(1000.0);
  geo.col_lead = triangular_lead_profile(1000.0);
  SuperpositionConfig cfg;
  cfg.n_vectors = 10;
  cfg.voltages = {0.1, 0.5};
  Crossbar lin(p, geo, 9);
  const SuperpositionResult a = superposition_check(lin, cfg, 1);
  CHECK(a.deviation.size() == 2u);
  CHECK(a.deviation[0].size() == 10u);
  CHECK(a.stats[1].max < 1e-9);

  p.nonlinearity = 0.5;
  Crossbar nl(p, geo, 9);
  const SuperpositionResult b = superposition_check(nl, cfg, 1);
  CHECK(b.stats[0].median > 1e-4);
  CHECK(b.stats[1].median > b.stats[0].median);
}
