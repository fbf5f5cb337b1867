#include <doctest.h>

#include "cbnn/stats.hpp"

using namespace cbnn;

TEST_CASE("quartiles interpolate between ranks") {
  const Quartiles q = quartile_stats({4.0, 1.0, 3.0, 2.0});
  CHECK(q.min == 1.0);
  CHECK(q.q25 == doctest::Approx(1.75));
  CHECK(q.median == doctest::Approx(2.5));
  CHECK(q.q75 == doctest::Approx(3.25));
  CHECK(q.max == 4.0);
  CHECK(median({5.0}) == 5.0);
  CHECK(median({3.0, 9.0, 1.0}) == 3.0);
  CHECK_THROWS_AS(quartile_stats({}), std::invalid_argument);
  const nlohmann::json j = q;
  CHECK(j["median"] == 2.5);
}
