#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <json.hpp>

#include "cbnn/grid.hpp"
#include "cbnn/mtj_device.hpp"

namespace cbnn {

using DeviceGrid = std::array<MtjDevice, kCells>;

/// Resistive line model. Each row and column line is a chain of `r_segment`
/// resistors between adjacent cells. A port connects to one end of its line
/// through `r_contact` plus a per-line lead resistance (the external routing).
struct LineGeometry {
  double r_segment = 20.0;  // ohm
  double r_contact = 0.0;   // ohm
  std::array<double, kRows> row_lead{};  // ohm
  std::array<double, kCols> col_lead{};  // ohm
  bool row_ports_left = true;     // row port at column 0, else column 14
  bool col_ports_bottom = true;   // column port at row 14, else row 0

  void validate() const;
  LineGeometry ideal() const;
  int row_port_node(int i) const;
  int col_port_node(int j) const;
};

/// Lead resistance per line, rising linearly from 0 at the outer lines to
/// `peak` on the center line.
std::array<double, kRows> triangular_lead_profile(double peak);

void to_json(nlohmann::json& j, const LineGeometry& g);
void from_json(const nlohmann::json& j, LineGeometry& g);

/// Boundary condition per port: a voltage, or nullopt for a floating port.
/// Grounded ports are driven at 0 V.
struct PortDrive {
  std::array<std::optional<double>, kPorts> voltage;

  static PortDrive grounded();
};

struct NetworkSolve {
  Eigen::VectorXd node_voltages;      // kLineNodes: row-line nodes, then column-line nodes
  std::array<double, kPorts> port_currents{};  // uA flowing from the port into the array
  int iterations = 1;
};

/// Full nodal solve. Device conductances are evaluated at their own voltage
/// drop; when any device is nonlinear the solve is repeated as a fixed point
/// until node voltages move by less than 1e-9 V (at most 100 iterations).
/// Throws SolverError when every port floats or the iteration diverges.
NetworkSolve solve_network(const DeviceGrid& devices, const LineGeometry& geometry,
                           const PortDrive& drive);

/// Voltage across every device (column node minus row node) for a solve.
std::array<double, kCells> device_voltages(const NetworkSolve& solve);

/// Linear response of the array with every port held at a fixed voltage.
/// Caches the node-voltage response to a unit drive on each port, so device
/// voltages and port currents for any drive pattern are linear combinations.
/// A device conductance change is folded in with a rank-one update; the
/// sparse factorization is refreshed after a bounded number of updates.
class PortResponse {
 public:
  PortResponse(const DeviceGrid& devices, const LineGeometry& geometry);

  /// Device voltages for the drive pattern `drive` = {(port, volts), ...};
  /// ports not listed are grounded.
  void device_voltages(std::span<const std::pair<int, double>> drive,
                       std::array<double, kCells>& out) const;

  /// Current into the array at `port` per volt applied at `driven_port`.
  double transfer(int port, int driven_port) const;

  void set_conductance(int cell, double g);
  double conductance(int cell) const { return g_device_[cell]; }

 private:
  struct Edge {
    int a;
    int b;
    double g;
  };
  // One pending rank-one update: device `cell` changed from g_before by delta.
  struct Eta {
    int cell = 0;
    int a = 0, b = 0;    // groups of the device terminals
    int fa = -1, fb = -1;  // their free indices, -1 for port groups
    double g_before = 0.0;
    double delta = 0.0;
    double scale = 0.0;
    Eigen::VectorXd w;   // A^-1 (e_a - e_b) before the update
    Eigen::VectorXd wd;  // w mapped to device voltages
  };

  int free_of(int group) const { return group < n_free_ ? group : -1; }
  double edge_g(int e) const;
  void assemble_and_factor();
  void refresh();
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  void sync(int port) const;

  std::vector<int> group_of_;          // node -> group; free groups first, then the 30 ports
  int n_free_ = 0;
  std::vector<Edge> fixed_edges_;      // segments and port links between distinct groups
  std::array<double, kCells> g_device_{};
  std::array<int, kCells> dev_a_{}, dev_b_{};
  std::array<std::vector<int>, kPorts> port_edges_;  // edges crossing each port group; >= 0 fixed, < 0 device ~idx
  mutable Eigen::MatrixXd response_;   // groups x ports
  mutable Eigen::MatrixXd dv_;         // device voltage per unit drive: cells x ports
  mutable std::array<std::size_t, kPorts> applied_{};  // etas folded into each column
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor_;
  std::vector<Eta> etas_;
};

}  // namespace cbnn
