#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "cbnn/errors.hpp"
#include "cbnn/network.hpp"
#include "oracle.hpp"
#include "random_network.hpp"

using namespace cbnn;
using testing::Instance;
using testing::random_instance;

namespace {

std::array<double, kCells> conductances(const DeviceGrid& devs) {
  std::array<double, kCells> g{};
  for (int c = 0; c < kCells; ++c) g[c] = conductance(devs[c], 0.0);
  return g;
}

double max_abs(const std::array<double, kPorts>& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("nodal solve matches the dense oracle on random instances") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    const Instance in = random_instance(rng, true);
    const NetworkSolve s = solve_network(in.devices, in.geo, in.drive);
    const oracle::Result ref = oracle::solve(conductances(in.devices), in.geo, in.drive);
    const double scale = max_abs(ref.port_i);
    for (int p = 0; p < kPorts; ++p) CHECK(std::abs(s.port_currents[p] - ref.port_i[p]) <= 1e-9 * scale);
    for (int k = 0; k < kLineNodes; ++k) CHECK(s.node_voltages[k] == doctest::Approx(ref.node_v[k]).epsilon(1e-9));
    const double sum = std::accumulate(s.port_currents.begin(), s.port_currents.end(), 0.0);
    CHECK(std::abs(sum) <= 1e-12 * scale * kPorts);
  }
}

TEST_CASE("zero line resistance: single driven row gives column current g*V") {
  std::mt19937_64 rng(3);
  Instance in = random_instance(rng, false);
  in.geo = in.geo.ideal();
  in.drive = PortDrive::grounded();
  in.drive.voltage[row_port(4)] = 0.7;
  const NetworkSolve s = solve_network(in.devices, in.geo, in.drive);
  for (int j = 0; j < kCols; ++j)
    CHECK(-s.port_currents[col_port(j)] == doctest::Approx(conductance(in.devices[cell_index(4, j)], 0.0) * 0.7));
}

TEST_CASE("linear superposition of two drives") {
  std::mt19937_64 rng(5);
  Instance in = random_instance(rng, false);
  PortDrive a = PortDrive::grounded(), b = PortDrive::grounded(), ab = PortDrive::grounded();
  a.voltage[row_port(2)] = 0.4;
  b.voltage[col_port(9)] = -0.25;
  ab.voltage[row_port(2)] = 0.4;
  ab.voltage[col_port(9)] = -0.25;
  const auto sa = solve_network(in.devices, in.geo, a);
  const auto sb = solve_network(in.devices, in.geo, b);
  const auto sab = solve_network(in.devices, in.geo, ab);
  for (int p = 0; p < kPorts; ++p)
    CHECK(sab.port_currents[p] == doctest::Approx(sa.port_currents[p] + sb.port_currents[p]).epsilon(1e-10));
}

TEST_CASE("all ports floating is a solver error") {
  DeviceGrid devs{};
  PortDrive d;
  CHECK_THROWS_AS(solve_network(devs, LineGeometry{}, d), SolverError);
}

TEST_CASE("nonlinear devices converge to a self-consistent fixed point") {
  std::mt19937_64 rng(17);
  Instance in = random_instance(rng, false);
  for (auto& d : in.devices) d.nonlinearity = 0.3;
  const NetworkSolve s = solve_network(in.devices, in.geo, in.drive);
  CHECK(s.iterations > 1);
  const auto v = device_voltages(s);
  std::array<double, kCells> g{};
  for (int c = 0; c < kCells; ++c) g[c] = conductance(in.devices[c], v[c]);
  const oracle::Result ref = oracle::solve(g, in.geo, in.drive);
  for (int k = 0; k < kLineNodes; ++k) CHECK(std::abs(s.node_voltages[k] - ref.node_v[k]) < 1e-8);
}

TEST_CASE("port response agrees with full solves through rank-one updates") {
  std::mt19937_64 rng(23);
  Instance in = random_instance(rng, false);
  PortResponse resp(in.devices, in.geo);
  std::uniform_int_distribution<int> cell(0, kCells - 1);
  for (int step = 0; step < 80; ++step) {
    const int c = cell(rng);
    in.devices[c].state = opposite(in.devices[c].state);
    resp.set_conductance(c, conductance(in.devices[c], 0.0));
    if (step % 20 != 19) continue;
    const int rp = row_port(step % kRows), cp = col_port((3 * step) % kCols);
    PortDrive d = PortDrive::grounded();
    d.voltage[rp] = -0.6;
    d.voltage[cp] = 0.6;
    const NetworkSolve full = solve_network(in.devices, in.geo, d);
    const std::pair<int, double> drive[] = {{rp, -0.6}, {cp, 0.6}};
    std::array<double, kCells> v{};
    resp.device_voltages(drive, v);
    const auto ref_v = device_voltages(full);
    for (int k = 0; k < kCells; ++k) CHECK(v[k] == doctest::Approx(ref_v[k]).epsilon(1e-9));
    for (int p = 0; p < kPorts; ++p) {
      const double i = resp.transfer(p, rp) * -0.6 + resp.transfer(p, cp) * 0.6;
      CHECK(std::abs(i - full.port_currents[p]) < 1e-9 * max_abs(full.port_currents));
    }
  }
}

TEST_CASE("port response handles a device toggled back and forth") {
  std::mt19937_64 rng(29);
  Instance in = random_instance(rng, false);
  PortResponse resp(in.devices, in.geo);
  auto check = [&](int rp, int cp) {
    PortDrive d = PortDrive::grounded();
    d.voltage[rp] = -0.5;
    d.voltage[cp] = 0.5;
    const auto ref_v = device_voltages(solve_network(in.devices, in.geo, d));
    const std::pair<int, double> drive[] = {{rp, -0.5}, {cp, 0.5}};
    std::array<double, kCells> v{};
    resp.device_voltages(drive, v);
    for (int k = 0; k < kCells; ++k) CHECK(v[k] == doctest::Approx(ref_v[k]).epsilon(1e-9));
  };
  std::uniform_int_distribution<int> cell(0, kCells - 1), line(0, kRows - 1);
  for (int step = 0; step < 50; ++step) {
    const int c = cell(rng);
    const int rp = row_port(line(rng)), cp = col_port(line(rng));
    for (int flip = 0; flip < 2; ++flip) {
      in.devices[c].state = opposite(in.devices[c].state);
      resp.set_conductance(c, conductance(in.devices[c], 0.0));
      if (step % 5 == 0) check(rp, cp);
    }
    if (step % 7 == 0) {
      // leave one toggle in place so later undos sit on top of real updates
      in.devices[c].state = opposite(in.devices[c].state);
      resp.set_conductance(c, conductance(in.devices[c], 0.0));
    }
  }
  check(row_port(3), col_port(11));
}

TEST_CASE("line geometry validation and lead profile") {
  LineGeometry g;
  g.r_segment = -1.0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  const auto lead = triangular_lead_profile(700.0);
  CHECK(lead[0] == 0.0);
  CHECK(lead[14] == 0.0);
  CHECK(lead[7] == doctest::Approx(700.0));
  CHECK(lead[3] == doctest::Approx(lead[11]));
}
