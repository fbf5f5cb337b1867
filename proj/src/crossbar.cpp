#include "cbnn/crossbar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cbnn/errors.hpp"

namespace cbnn {

void VerifyConfig::validate() const {
  if (!(v_start > 0.0)) throw ConfigError("verify.v_start must be > 0");
  if (!(v_step > 0.0)) throw ConfigError("verify.v_step must be > 0");
  if (!(ratio_threshold > 1.0)) throw ConfigError("verify.ratio_threshold must be > 1");
  if (!(v_read > 0.0)) throw ConfigError("verify.v_read must be > 0");
}

void to_json(nlohmann::json& j, const VerifyConfig& c) {
  j = {{"v_start", c.v_start}, {"v_step", c.v_step}, {"ratio_threshold", c.ratio_threshold}, {"v_read", c.v_read}};
}

void from_json(const nlohmann::json& j, VerifyConfig& c) {
  c.v_start = j.value("v_start", c.v_start);
  c.v_step = j.value("v_step", c.v_step);
  c.ratio_threshold = j.value("ratio_threshold", c.ratio_threshold);
  c.v_read = j.value("v_read", c.v_read);
}

const char* to_string(WriteStatus s) {
  switch (s) {
    case WriteStatus::Success: return "success";
    case WriteStatus::Failed: return "failed";
    case WriteStatus::Skipped: return "skipped";
  }
  return "?";
}

void to_json(nlohmann::json& j, const WriteReport& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (int c = 0; c < kCells; ++c) {
    const auto& o = r.outcomes[c];
    if (o.status == WriteStatus::Skipped) continue;
    cells.push_back({{"row", c / kCols + 1},
                     {"col", c % kCols + 1},
                     {"status", to_string(o.status)},
                     {"voltage", o.voltage},
                     {"attempts", o.attempts},
                     {"ratio", o.ratio}});
  }
  j = {{"clear_pass_accuracy", r.clear_pass_accuracy},
       {"clear_accuracy", r.clear_accuracy},
       {"attempted", r.attempted},
       {"successes", r.successes},
       {"write_accuracy", r.write_accuracy},
       {"max_voltage", r.max_voltage},
       {"cells", cells}};
}

Crossbar::Crossbar(const DeviceParams& params, const LineGeometry& geometry, std::uint64_t seed)
    : geometry_(geometry), read_noise_na_(params.read_noise_std), noise_rng_(derive_seed(seed, "read-noise")) {
  params.validate();
  geometry.validate();
  Rng rng(derive_seed(seed, "devices"));
  for (auto& d : devices_) d = sample_device(params, rng);
  update_linear();
}

Crossbar::Crossbar(const Crossbar& other)
    : devices_(other.devices_),
      geometry_(other.geometry_),
      read_noise_na_(other.read_noise_na_),
      noise_rng_(other.noise_rng_),
      linear_(other.linear_) {}

Crossbar& Crossbar::operator=(const Crossbar& other) {
  if (this != &other) {
    devices_ = other.devices_;
    geometry_ = other.geometry_;
    read_noise_na_ = other.read_noise_na_;
    noise_rng_ = other.noise_rng_;
    linear_ = other.linear_;
    response_.reset();
  }
  return *this;
}

Crossbar::Crossbar(Crossbar&&) noexcept = default;
Crossbar& Crossbar::operator=(Crossbar&&) noexcept = default;
Crossbar::~Crossbar() = default;

void Crossbar::set_device(int i, int j, const MtjDevice& dev) {
  devices_[cell_index(i, j)] = dev;
  update_linear();
  if (!linear_) {
    response_.reset();
    return;
  }
  notify(cell_index(i, j));
}

double Crossbar::min_threshold() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& d : devices_) m = std::min({m, d.v_switch_to_on, d.v_switch_to_off});
  return m;
}

TargetStateMap Crossbar::states() const {
  TargetStateMap s;
  for (int c = 0; c < kCells; ++c) s.on[c] = devices_[c].is_on();
  return s;
}

void Crossbar::update_linear() {
  linear_ = std::all_of(devices_.begin(), devices_.end(), [](const MtjDevice& d) { return d.nonlinearity == 0.0; });
}

PortResponse& Crossbar::response() const {
  if (!response_) response_ = std::make_unique<PortResponse>(devices_, geometry_);
  return *response_;
}

void Crossbar::notify(int cell) {
  if (response_) response_->set_conductance(cell, conductance(devices_[cell], 0.0));
}

double Crossbar::noise() {
  if (read_noise_na_ == 0.0) return 0.0;
  std::normal_distribution<double> dist(0.0, read_noise_na_ * 1e-3);
  return dist(noise_rng_);
}

NetworkSolve Crossbar::solve(const PortDrive& drive) const { return solve_network(devices_, geometry_, drive); }

std::array<double, kCols> Crossbar::column_currents(const std::array<double, kRows>& row_volts) {
  std::array<double, kCols> out{};
  if (linear_) {
    const PortResponse& r = response();
    for (int j = 0; j < kCols; ++j)
      for (int i = 0; i < kRows; ++i)
        if (row_volts[i] != 0.0) out[j] -= r.transfer(col_port(j), row_port(i)) * row_volts[i];
  } else {
    PortDrive drive = PortDrive::grounded();
    for (int i = 0; i < kRows; ++i) drive.voltage[row_port(i)] = row_volts[i];
    const NetworkSolve s = solve(drive);
    for (int j = 0; j < kCols; ++j) out[j] = -s.port_currents[col_port(j)];
  }
  for (auto& c : out) c += noise();
  return out;
}

double Crossbar::read_device(int i, int j, double v_read) {
  double current;
  if (linear_) {
    current = -response().transfer(col_port(j), row_port(i)) * v_read;
  } else {
    PortDrive drive = PortDrive::grounded();
    drive.voltage[row_port(i)] = v_read;
    current = -solve(drive).port_currents[col_port(j)];
  }
  return (current + noise()) / v_read;
}

ConductanceMap Crossbar::read_all(double v_read) {
  ConductanceMap g;
  for (int i = 0; i < kRows; ++i)
    for (int j = 0; j < kCols; ++j) g(i, j) = read_device(i, j, v_read);
  return g;
}

std::vector<std::pair<int, int>> Crossbar::write_pulse(int i, int j, double v_apply) {
  std::vector<std::pair<int, int>> switched;
  if (v_apply == 0.0) return switched;
  std::array<double, kCells> v{};
  if (linear_) {
    const std::pair<int, double> drive[] = {{col_port(j), 0.5 * v_apply}, {row_port(i), -0.5 * v_apply}};
    response().device_voltages(drive, v);
  } else {
    PortDrive drive = PortDrive::grounded();
    drive.voltage[col_port(j)] = 0.5 * v_apply;
    drive.voltage[row_port(i)] = -0.5 * v_apply;
    v = device_voltages(solve(drive));
  }
  for (int c = 0; c < kCells; ++c) {
    const MtjDevice& d = devices_[c];
    const bool may_switch = d.is_on() ? v[c] <= -d.v_switch_to_off : v[c] >= d.v_switch_to_on;
    if (may_switch && apply_write_voltage(devices_[c], v[c])) switched.emplace_back(c / kCols, c % kCols);
  }
  for (const auto& [r, k] : switched) notify(cell_index(r, k));
  if (!switched.empty() && !linear_) response_.reset();
  return switched;
}

WriteOutcome Crossbar::write_verify(int i, int j, bool target_on, const VerifyConfig& cfg) {
  const double cap = v_max();
  const double sign = target_on ? 1.0 : -1.0;
  WriteOutcome out;
  for (int k = 0;; ++k) {
    const double v = std::min(cfg.v_start + k * cfg.v_step, cap);
    write_pulse(i, j, -sign * v);
    const double g_a = read_device(i, j, cfg.v_read);
    write_pulse(i, j, sign * v);
    const double g_b = read_device(i, j, cfg.v_read);
    out.attempts = k + 1;
    out.voltage = v;
    out.g_on_read = target_on ? g_b : g_a;
    out.g_off_read = target_on ? g_a : g_b;
    out.ratio = out.g_off_read > 0.0 ? out.g_on_read / out.g_off_read : std::numeric_limits<double>::infinity();
    if (out.ratio >= cfg.ratio_threshold) {
      out.status = WriteStatus::Success;
      return out;
    }
    if (v >= cap) {
      out.status = WriteStatus::Failed;
      return out;
    }
  }
}

WriteReport Crossbar::clear_array(const VerifyConfig& cfg) {
  WriteReport report;
  for (int pass = 0; pass < 2; ++pass) {
    int ok = 0;
    for (int c = 0; c < kCells; ++c) {
      report.outcomes[c] = write_verify(c / kCols, c % kCols, false, cfg);
      ok += report.outcomes[c].status == WriteStatus::Success;
      report.max_voltage = std::max(report.max_voltage, report.outcomes[c].voltage);
    }
    report.clear_pass_accuracy.push_back(static_cast<double>(ok) / kCells);
  }
  report.clear_accuracy = report.clear_pass_accuracy.back();
  return report;
}

WriteReport Crossbar::program(const TargetStateMap& targets, const VerifyConfig& cfg) {
  WriteReport report = clear_array(cfg);
  report.outcomes.fill(WriteOutcome{});
  for (int c = 0; c < kCells; ++c) {
    if (!targets.on[c]) continue;
    report.outcomes[c] = write_verify(c / kCols, c % kCols, true, cfg);
    ++report.attempted;
    report.successes += report.outcomes[c].status == WriteStatus::Success;
    report.max_voltage = std::max(report.max_voltage, report.outcomes[c].voltage);
  }
  report.write_accuracy = report.attempted ? static_cast<double>(report.successes) / report.attempted : 1.0;
  return report;
}

}  // namespace cbnn
