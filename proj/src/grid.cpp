#include "cbnn/grid.hpp"

#include <algorithm>

namespace cbnn {

int TargetStateMap::count_on() const { return static_cast<int>(std::count(on.begin(), on.end(), true)); }

void write_csv(std::ostream& os, const TargetStateMap& map) {
  for (int i = 0; i < kRows; ++i) {
    for (int j = 0; j < kCols; ++j) os << (j ? "," : "") << (map.at(i, j) ? 1 : 0);
    os << '\n';
  }
}

void write_csv(std::ostream& os, const ConductanceMap& map) {
  const auto old = os.precision(10);
  for (int i = 0; i < kRows; ++i) {
    for (int j = 0; j < kCols; ++j) os << (j ? "," : "") << map(i, j);
    os << '\n';
  }
  os.precision(old);
}

}  // namespace cbnn
