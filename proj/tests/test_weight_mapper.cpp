#include <doctest.h>

#include <random>

#include "cbnn/errors.hpp"
#include "cbnn/weight_mapper.hpp"
#include "test_helpers.hpp"

using namespace cbnn;

TEST_CASE("used cells cover exactly the differential layout") {
  int used = 0;
  for (int i = 0; i < kRows; ++i)
    for (int j = 0; j < kCols; ++j) used += cell_used(i, j);
  CHECK(used == 13 * 12 + 12 * 3);
  CHECK_FALSE(cell_used(13, 0));
  CHECK_FALSE(cell_used(12, 12));
  CHECK(cell_used(11, 14));
  CHECK(cell_used(12, 11));
}

TEST_CASE("each weight value lands on its cell pair") {
  TernarySolution net;
  net.w1(4, 2) = 1;
  net.w1(7, 5) = -1;
  net.w2(3, 1) = 1;
  net.w2(0, 2) = -1;
  const TargetStateMap m = map_weights(net);
  CHECK(m.at(4, 4));
  CHECK_FALSE(m.at(4, 5));
  CHECK_FALSE(m.at(7, 10));
  CHECK(m.at(7, 11));
  CHECK(m.at(6, 13));
  CHECK_FALSE(m.at(7, 13));
  CHECK_FALSE(m.at(0, 14));
  CHECK(m.at(1, 14));
  CHECK(m.count_on() == 4);

  const TargetStateMap both = map_weights(net, ZeroEncoding::BothOn);
  CHECK(both.at(0, 0));
  CHECK(both.at(0, 1));
  CHECK(both.at(4, 4));
  CHECK_FALSE(both.at(4, 5));
  for (int i = 0; i < kRows; ++i)
    for (int j = 0; j < kCols; ++j)
      if (!cell_used(i, j)) CHECK_FALSE(both.at(i, j));
}

TEST_CASE("extraction inverts the mapping on an ideal map") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const TernarySolution net = testing::random_solution(rng);
    for (ZeroEncoding z : {ZeroEncoding::BothOff, ZeroEncoding::BothOn}) {
      const TargetStateMap m = map_weights(net, z);
      ConductanceMap g;
      for (int i = 0; i < kRows; ++i)
        for (int j = 0; j < kCols; ++j) g(i, j) = m.at(i, j) ? 14.0 : 8.0;
      const HardwareWeights hw = extract_weights(g, 6.0);
      CHECK(hw.w1.isApprox(net.w1.cast<double>()));
      CHECK(hw.w2.isApprox(net.w2.cast<double>()));
    }
  }
  CHECK_THROWS_AS(extract_weights(ConductanceMap::Zero(), 0.0), std::invalid_argument);
}

TEST_CASE("zero encoding names") {
  CHECK(parse_zero_encoding("off_off") == ZeroEncoding::BothOff);
  CHECK(parse_zero_encoding("on_on") == ZeroEncoding::BothOn);
  CHECK(to_string(ZeroEncoding::BothOn) == "on_on");
  CHECK_THROWS_AS(parse_zero_encoding("zero"), ConfigError);
}

TEST_CASE("random solution targets turn on about a third of the used cells") {
  Rng rng(4);
  double on = 0;
  for (int k = 0; k < 200; ++k) {
    const TargetStateMap m = random_solution_targets(rng);
    on += m.count_on();
    for (int i = 0; i < kRows; ++i)
      for (int j = 0; j < kCols; ++j)
        if (!cell_used(i, j)) CHECK_FALSE(m.at(i, j));
  }
  CHECK(on / 200 == doctest::Approx(96.0 * 2 / 3).epsilon(0.03));
}
