#pragma once

#include <array>
#include <ostream>

#include <Eigen/Core>

namespace cbnn {

inline constexpr int kRows = 15;
inline constexpr int kCols = 15;
inline constexpr int kCells = kRows * kCols;
inline constexpr int kPorts = kRows + kCols;
inline constexpr int kLineNodes = 2 * kCells;

// Ports 0..14 are the row lines, 15..29 the column lines.
inline constexpr int row_port(int i) { return i; }
inline constexpr int col_port(int j) { return kRows + j; }
inline constexpr int cell_index(int i, int j) { return i * kCols + j; }
// Row-line node under cell (i, j), and the column-line node above it.
inline constexpr int row_node(int i, int j) { return cell_index(i, j); }
inline constexpr int col_node(int i, int j) { return kCells + cell_index(i, j); }

/// Effective port-to-port conductances in uS, indexed (row, col) 0-based.
using ConductanceMap = Eigen::Matrix<double, kRows, kCols, Eigen::RowMajor>;

/// On/off target for every cell.
struct TargetStateMap {
  std::array<bool, kCells> on{};

  bool at(int i, int j) const { return on[cell_index(i, j)]; }
  void set(int i, int j, bool value) { on[cell_index(i, j)] = value; }
  int count_on() const;
  friend bool operator==(const TargetStateMap&, const TargetStateMap&) = default;
};

/// 15 lines of 15 comma-separated 0/1 values, no header.
void write_csv(std::ostream& os, const TargetStateMap& map);
/// 15 lines of 15 comma-separated conductances in uS, no header.
void write_csv(std::ostream& os, const ConductanceMap& map);

}  // namespace cbnn
