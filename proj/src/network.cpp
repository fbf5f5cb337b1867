#include "cbnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SparseCore>

#include "cbnn/errors.hpp"

namespace cbnn {
namespace {

constexpr int kTerminal0 = kLineNodes;  // terminal node of port p is kTerminal0 + p
constexpr int kAllNodes = kLineNodes + kPorts;
constexpr std::size_t kMaxEtas = 32;

double to_microsiemens(double ohm) { return 1.0e6 / ohm; }

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

struct Resistor {
  int a;
  int b;
  double ohm;
};

// Segment and port-link resistors of the line model, in a fixed order.
std::vector<Resistor> line_resistors(const LineGeometry& geo) {
  std::vector<Resistor> out;
  out.reserve(2 * kRows * (kCols - 1) + kPorts);
  for (int i = 0; i < kRows; ++i)
    for (int j = 0; j + 1 < kCols; ++j) out.push_back({row_node(i, j), row_node(i, j + 1), geo.r_segment});
  for (int j = 0; j < kCols; ++j)
    for (int i = 0; i + 1 < kRows; ++i) out.push_back({col_node(i, j), col_node(i + 1, j), geo.r_segment});
  for (int i = 0; i < kRows; ++i)
    out.push_back({kTerminal0 + row_port(i), geo.row_port_node(i), geo.r_contact + geo.row_lead[i]});
  for (int j = 0; j < kCols; ++j)
    out.push_back({kTerminal0 + col_port(j), geo.col_port_node(j), geo.r_contact + geo.col_lead[j]});
  return out;
}

bool is_port_link(const Resistor& r) { return r.a >= kTerminal0; }

}  // namespace

void LineGeometry::validate() const {
  auto bad = [](double r) { return !(r >= 0.0) || !std::isfinite(r); };
  if (bad(r_segment) || bad(r_contact)) throw ConfigError("line resistances must be finite and >= 0");
  for (double r : row_lead)
    if (bad(r)) throw ConfigError("lead resistances must be finite and >= 0");
  for (double r : col_lead)
    if (bad(r)) throw ConfigError("lead resistances must be finite and >= 0");
}

LineGeometry LineGeometry::ideal() const {
  LineGeometry g = *this;
  g.r_segment = 0.0;
  g.r_contact = 0.0;
  g.row_lead.fill(0.0);
  g.col_lead.fill(0.0);
  return g;
}

int LineGeometry::row_port_node(int i) const { return row_node(i, row_ports_left ? 0 : kCols - 1); }
int LineGeometry::col_port_node(int j) const { return col_node(col_ports_bottom ? kRows - 1 : 0, j); }

std::array<double, kRows> triangular_lead_profile(double peak) {
  std::array<double, kRows> out{};
  const double center = (kRows - 1) / 2.0;
  for (int k = 0; k < kRows; ++k) out[k] = peak * (1.0 - std::abs(k - center) / center);
  return out;
}

void to_json(nlohmann::json& j, const LineGeometry& g) {
  j = {{"r_segment", g.r_segment},
       {"r_contact", g.r_contact},
       {"row_lead", g.row_lead},
       {"col_lead", g.col_lead},
       {"row_ports_left", g.row_ports_left},
       {"col_ports_bottom", g.col_ports_bottom}};
}

void from_json(const nlohmann::json& j, LineGeometry& g) {
  g.r_segment = j.value("r_segment", g.r_segment);
  g.r_contact = j.value("r_contact", g.r_contact);
  if (j.contains("lead_peak")) {
    g.row_lead = triangular_lead_profile(j.at("lead_peak").get<double>());
    g.col_lead = g.row_lead;
  }
  if (j.contains("row_lead")) g.row_lead = j.at("row_lead").get<std::array<double, kRows>>();
  if (j.contains("col_lead")) g.col_lead = j.at("col_lead").get<std::array<double, kCols>>();
  g.row_ports_left = j.value("row_ports_left", g.row_ports_left);
  g.col_ports_bottom = j.value("col_ports_bottom", g.col_ports_bottom);
}

PortDrive PortDrive::grounded() {
  PortDrive d;
  d.voltage.fill(0.0);
  return d;
}

NetworkSolve solve_network(const DeviceGrid& devices, const LineGeometry& geometry,
                           const PortDrive& drive) {
  geometry.validate();
  if (std::none_of(drive.voltage.begin(), drive.voltage.end(), [](const auto& v) { return v.has_value(); }))
    throw SolverError("solve_network: every port is floating");

  const std::vector<Resistor> resistors = line_resistors(geometry);
  UnionFind uf(kAllNodes);
  for (const auto& r : resistors) {
    if (is_port_link(r) && !drive.voltage[r.a - kTerminal0]) continue;
    if (r.ohm == 0.0) uf.unite(r.a, r.b);
  }

  // Group numbering: free groups get unknown indices, driven groups a fixed voltage.
  std::vector<int> group(kAllNodes);
  std::vector<int> root_to_group(kAllNodes, -1);
  int n_groups = 0;
  for (int n = 0; n < kAllNodes; ++n) {
    const int root = uf.find(n);
    if (root_to_group[root] < 0) root_to_group[root] = n_groups++;
    group[n] = root_to_group[root];
  }
  std::vector<std::optional<double>> fixed(static_cast<std::size_t>(n_groups));
  for (int p = 0; p < kPorts; ++p)
    if (drive.voltage[p]) fixed[group[kTerminal0 + p]] = *drive.voltage[p];
  struct Branch {
    int a;
    int b;
    double g;
  };
  std::vector<Branch> branches;
  for (const auto& r : resistors) {
    if (is_port_link(r) && !drive.voltage[r.a - kTerminal0]) continue;
    if (group[r.a] == group[r.b]) continue;
    branches.push_back({group[r.a], group[r.b], to_microsiemens(r.ohm)});
  }
  const std::size_t first_device = branches.size();
  bool nonlinear = false;
  for (int c = 0; c < kCells; ++c) {
    const int i = c / kCols, j = c % kCols;
    branches.push_back({group[row_node(i, j)], group[col_node(i, j)], conductance(devices[c], 0.0)});
    nonlinear = nonlinear || devices[c].nonlinearity != 0.0;
  }

  // Floating terminals with a resistive link end up isolated; they get no unknown.
  std::vector<bool> connected(static_cast<std::size_t>(n_groups), false);
  for (const auto& br : branches) connected[br.a] = connected[br.b] = true;
  std::vector<int> unknown(static_cast<std::size_t>(n_groups), -1);
  int n_unknown = 0;
  for (int g = 0; g < n_groups; ++g)
    if (!fixed[g] && connected[g]) unknown[g] = n_unknown++;

  Eigen::VectorXd group_v(n_groups);
  for (int g = 0; g < n_groups; ++g) group_v[g] = fixed[g].value_or(0.0);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;
  NetworkSolve out;
  const int max_iterations = nonlinear ? 100 : 1;
  bool converged = !nonlinear;
  int iteration = 0;
  for (; iteration < max_iterations; ++iteration) {
    if (n_unknown > 0) {
      std::vector<Eigen::Triplet<double>> trips;
      trips.reserve(branches.size() * 4);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_unknown);
      for (const auto& br : branches) {
        const int ua = unknown[br.a], ub = unknown[br.b];
        if (ua >= 0) trips.emplace_back(ua, ua, br.g);
        if (ub >= 0) trips.emplace_back(ub, ub, br.g);
        if (ua >= 0 && ub >= 0) {
          trips.emplace_back(ua, ub, -br.g);
          trips.emplace_back(ub, ua, -br.g);
        } else if (ua >= 0 && fixed[br.b]) {
          rhs[ua] += br.g * *fixed[br.b];
        } else if (ub >= 0 && fixed[br.a]) {
          rhs[ub] += br.g * *fixed[br.a];
        }
      }
      Eigen::SparseMatrix<double> a(n_unknown, n_unknown);
      a.setFromTriplets(trips.begin(), trips.end());
      if (!analyzed) {
        ldlt.analyzePattern(a);
        analyzed = true;
      }
      ldlt.factorize(a);
      if (ldlt.info() != Eigen::Success) throw SolverError("solve_network: singular nodal system");
      const Eigen::VectorXd x = ldlt.solve(rhs);
      if (ldlt.info() != Eigen::Success || !x.allFinite())
        throw SolverError("solve_network: singular nodal system");

      double change = 0.0;
      for (int g = 0; g < n_groups; ++g) {
        if (unknown[g] < 0) continue;
        change = std::max(change, std::abs(x[unknown[g]] - group_v[g]));
        group_v[g] = x[unknown[g]];
      }
      if (nonlinear && iteration > 0 && change < 1e-9) {
        converged = true;
        break;
      }
    } else if (nonlinear) {
      converged = true;
      break;
    }
    if (nonlinear) {
      for (int c = 0; c < kCells; ++c) {
        Branch& br = branches[first_device + c];
        br.g = conductance(devices[c], group_v[br.b] - group_v[br.a]);
      }
    }
  }
  if (!converged) throw SolverError("solve_network: nonlinear fixed point did not converge in 100 iterations");
  out.iterations = std::min(iteration + 1, max_iterations);

  out.node_voltages.resize(kLineNodes);
  for (int n = 0; n < kLineNodes; ++n) out.node_voltages[n] = group_v[group[n]];
  for (int p = 0; p < kPorts; ++p) {
    if (!drive.voltage[p]) continue;
    const int gp = group[kTerminal0 + p];
    double current = 0.0;
    for (const auto& br : branches) {
      if (br.a == gp && br.b != gp) current += br.g * (group_v[gp] - group_v[br.b]);
      if (br.b == gp && br.a != gp) current += br.g * (group_v[gp] - group_v[br.a]);
    }
    out.port_currents[p] = current;
  }
  return out;
}

std::array<double, kCells> device_voltages(const NetworkSolve& solve) {
  std::array<double, kCells> out{};
  for (int i = 0; i < kRows; ++i)
    for (int j = 0; j < kCols; ++j)
      out[cell_index(i, j)] = solve.node_voltages[col_node(i, j)] - solve.node_voltages[row_node(i, j)];
  return out;
}

// ---------------------------------------------------------------------------

PortResponse::PortResponse(const DeviceGrid& devices, const LineGeometry& geometry) {
  geometry.validate();
  const std::vector<Resistor> resistors = line_resistors(geometry);
  UnionFind uf(kAllNodes);
  for (const auto& r : resistors)
    if (r.ohm == 0.0) uf.unite(r.a, r.b);

  // Port groups take the last 30 group ids, in port order.
  std::vector<int> root_to_group(kAllNodes, -1);
  for (int p = 0; p < kPorts; ++p) root_to_group[uf.find(kTerminal0 + p)] = -2 - p;
  group_of_.assign(kAllNodes, -1);
  n_free_ = 0;
  for (int n = 0; n < kAllNodes; ++n) {
    const int root = uf.find(n);
    if (root_to_group[root] == -1) root_to_group[root] = n_free_++;
  }
  for (int n = 0; n < kAllNodes; ++n) {
    const int tag = root_to_group[uf.find(n)];
    group_of_[n] = tag >= 0 ? tag : n_free_ + (-2 - tag);
  }

  for (const auto& r : resistors) {
    const int a = group_of_[r.a], b = group_of_[r.b];
    if (a != b) fixed_edges_.push_back({a, b, to_microsiemens(r.ohm)});
  }
  for (int c = 0; c < kCells; ++c) {
    const int i = c / kCols, j = c % kCols;
    dev_a_[c] = group_of_[row_node(i, j)];
    dev_b_[c] = group_of_[col_node(i, j)];
    g_device_[c] = cbnn::conductance(devices[c], 0.0);
  }
  for (int p = 0; p < kPorts; ++p) {
    const int gp = n_free_ + p;
    for (std::size_t e = 0; e < fixed_edges_.size(); ++e)
      if ((fixed_edges_[e].a == gp) != (fixed_edges_[e].b == gp)) port_edges_[p].push_back(static_cast<int>(e));
    for (int c = 0; c < kCells; ++c)
      if ((dev_a_[c] == gp) != (dev_b_[c] == gp)) port_edges_[p].push_back(~c);
  }

  refresh();
}

void PortResponse::refresh() {
  const int n_groups = n_free_ + kPorts;
  response_ = Eigen::MatrixXd::Zero(n_groups, kPorts);
  for (int p = 0; p < kPorts; ++p) response_(n_free_ + p, p) = 1.0;
  if (n_free_ > 0) {
    assemble_and_factor();
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n_free_, kPorts);
    auto inject = [&](int a, int b, double g) {
      if (a < n_free_ && b >= n_free_) rhs(a, b - n_free_) += g;
      if (b < n_free_ && a >= n_free_) rhs(b, a - n_free_) += g;
    };
    for (const auto& e : fixed_edges_) inject(e.a, e.b, e.g);
    for (int c = 0; c < kCells; ++c) inject(dev_a_[c], dev_b_[c], g_device_[c]);
    for (int p = 0; p < kPorts; ++p) response_.col(p).head(n_free_) = factor_.solve(rhs.col(p));
  }
  applied_.fill(0);
  dv_.resize(kCells, kPorts);
  for (int p = 0; p < kPorts; ++p)
    for (int c = 0; c < kCells; ++c) dv_(c, p) = response_(dev_b_[c], p) - response_(dev_a_[c], p);
}

void PortResponse::assemble_and_factor() {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve((fixed_edges_.size() + kCells) * 4);
  auto stamp = [&](int a, int b, double g) {
    const int fa = free_of(a), fb = free_of(b);
    if (fa >= 0) trips.emplace_back(fa, fa, g);
    if (fb >= 0) trips.emplace_back(fb, fb, g);
    if (fa >= 0 && fb >= 0) {
      trips.emplace_back(fa, fb, -g);
      trips.emplace_back(fb, fa, -g);
    }
  };
  for (const auto& e : fixed_edges_) stamp(e.a, e.b, e.g);
  for (int c = 0; c < kCells; ++c) stamp(dev_a_[c], dev_b_[c], g_device_[c]);
  Eigen::SparseMatrix<double> a(n_free_, n_free_);
  a.setFromTriplets(trips.begin(), trips.end());
  if (etas_.empty() && factor_.rows() == 0) factor_.analyzePattern(a);
  factor_.factorize(a);
  if (factor_.info() != Eigen::Success) throw SolverError("PortResponse: singular nodal system");
  etas_.clear();
}

Eigen::VectorXd PortResponse::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd y = factor_.solve(rhs);
  for (const auto& eta : etas_) {
    const double ya = eta.fa >= 0 ? y[eta.fa] : 0.0;
    const double yb = eta.fb >= 0 ? y[eta.fb] : 0.0;
    y.noalias() -= (eta.scale * (ya - yb)) * eta.w;
  }
  return y;
}

// Columns are brought up to date only when read; a write-verify cycle touches
// two ports, so most updates never reach the other 28 columns.
void PortResponse::sync(int port) const {
  auto x = response_.col(port);
  for (std::size_t m = applied_[port]; m < etas_.size(); ++m) {
    const Eta& eta = etas_[m];
    const double s = (x[eta.a] - x[eta.b]) * eta.scale;
    x.head(n_free_).noalias() -= s * eta.w;
    dv_.col(port).noalias() -= s * eta.wd;
  }
  applied_[port] = etas_.size();
}

double PortResponse::edge_g(int e) const { return e >= 0 ? fixed_edges_[e].g : g_device_[~e]; }

void PortResponse::device_voltages(std::span<const std::pair<int, double>> drive,
                                   std::array<double, kCells>& out) const {
  Eigen::Map<Eigen::Matrix<double, kCells, 1>> v(out.data());
  v.setZero();
  for (const auto& [port, volts] : drive) {
    sync(port);
    v += volts * dv_.col(port);
  }
}

double PortResponse::transfer(int port, int driven_port) const {
  sync(driven_port);
  const int gp = n_free_ + port;
  const double* col = response_.col(driven_port).data();
  double current = 0.0;
  for (int e : port_edges_[port]) {
    const int a = e >= 0 ? fixed_edges_[e].a : dev_a_[~e];
    const int b = e >= 0 ? fixed_edges_[e].b : dev_b_[~e];
    const int other = a == gp ? b : a;
    current += edge_g(e) * (col[gp] - col[other]);
  }
  return current;
}

void PortResponse::set_conductance(int cell, double g) {
  const double delta = g - g_device_[cell];
  if (delta == 0.0) return;
  const int a = dev_a_[cell], b = dev_b_[cell];
  const int fa = free_of(a), fb = free_of(b);
  if (fa < 0 && fb < 0) {
    g_device_[cell] = g;
    return;
  }

  if (!etas_.empty() && etas_.back().cell == cell && etas_.back().g_before == g) {
    // The device returns to the conductance it had before the last update:
    // undo that update instead of stacking its inverse.
    const Eta& eta = etas_.back();
    for (int p = 0; p < kPorts; ++p) {
      if (applied_[p] != etas_.size()) continue;
      auto x = response_.col(p);
      const double s = (x[a] - x[b]) * eta.delta;
      x.head(n_free_).noalias() += s * eta.w;
      dv_.col(p).noalias() += s * eta.wd;
      applied_[p] = etas_.size() - 1;
    }
    etas_.pop_back();
    g_device_[cell] = g;
    return;
  }

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n_free_);
  if (fa >= 0) u[fa] += 1.0;
  if (fb >= 0) u[fb] -= 1.0;
  Eta eta;
  eta.cell = cell;
  eta.a = a;
  eta.b = b;
  eta.fa = fa;
  eta.fb = fb;
  eta.g_before = g_device_[cell];
  eta.delta = delta;
  eta.w = solve(u);
  const double wa = fa >= 0 ? eta.w[fa] : 0.0;
  const double wb = fb >= 0 ? eta.w[fb] : 0.0;
  // x' = x - w * delta * (x'_a - x'_b), with x'_a - x'_b = (x_a - x_b) / (1 + delta (w_a - w_b)).
  eta.scale = delta / (1.0 + delta * (wa - wb));
  eta.wd.resize(kCells);
  for (int c = 0; c < kCells; ++c) {
    const double wcb = dev_b_[c] < n_free_ ? eta.w[dev_b_[c]] : 0.0;
    const double wca = dev_a_[c] < n_free_ ? eta.w[dev_a_[c]] : 0.0;
    eta.wd[c] = wcb - wca;
  }
  g_device_[cell] = g;
  etas_.push_back(std::move(eta));
  // Refactor and rebuild the response from scratch so rounding cannot accumulate.
  if (etas_.size() >= kMaxEtas) refresh();
}

}  // namespace cbnn
