#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cbnn/grid.hpp"
#include "cbnn/mtj_device.hpp"
#include "cbnn/network.hpp"
#include "cbnn/random.hpp"

namespace cbnn {

struct VerifyConfig {
  double v_start = 1.0;          // V
  double v_step = 0.1;           // V
  double ratio_threshold = 1.3;
  double v_read = 0.2;           // V

  void validate() const;
};

void to_json(nlohmann::json& j, const VerifyConfig& c);
void from_json(const nlohmann::json& j, VerifyConfig& c);

enum class WriteStatus { Skipped, Success, Failed };

const char* to_string(WriteStatus s);

struct WriteOutcome {
  WriteStatus status = WriteStatus::Skipped;
  double voltage = 0.0;   // last |V_apply| used
  int attempts = 0;
  double ratio = 0.0;     // last measured on/off ratio
  double g_on_read = 0.0;
  double g_off_read = 0.0;
};

struct WriteReport {
  std::vector<double> clear_pass_accuracy;   // one entry per clear pass
  double clear_accuracy = 1.0;               // final clear pass
  std::array<WriteOutcome, kCells> outcomes; // program phase, or the final clear pass
  int attempted = 0;
  int successes = 0;
  double write_accuracy = 1.0;
  double max_voltage = 0.0;
};

void to_json(nlohmann::json& j, const WriteReport& r);

/// A simulated passive array. Operations mutate device states and consume
/// read noise, so one Crossbar belongs to one thread at a time.
class Crossbar {
 public:
  Crossbar(const DeviceParams& params, const LineGeometry& geometry, std::uint64_t seed);
  Crossbar(const Crossbar& other);
  Crossbar& operator=(const Crossbar& other);
  Crossbar(Crossbar&&) noexcept;
  Crossbar& operator=(Crossbar&&) noexcept;
  ~Crossbar();

  const DeviceGrid& devices() const { return devices_; }
  const MtjDevice& device(int i, int j) const { return devices_[cell_index(i, j)]; }
  void set_device(int i, int j, const MtjDevice& dev);
  const LineGeometry& geometry() const { return geometry_; }
  double read_noise_std() const { return read_noise_na_; }
  void set_read_noise(double std_na) { read_noise_na_ = std_na; }

  /// Smallest intrinsic threshold over every device and both polarities.
  double min_threshold() const;
  double v_max() const { return 2.0 * min_threshold(); }
  TargetStateMap states() const;

  NetworkSolve solve(const PortDrive& drive) const;

  /// Current (uA) leaving the array at each column port with the given rows
  /// driven and every other port grounded, plus measurement noise.
  std::array<double, kCols> column_currents(const std::array<double, kRows>& row_volts);

  double read_device(int i, int j, double v_read = 0.2);
  ConductanceMap read_all(double v_read = 0.2);

  /// V/2 pulse; returns the (row, col) of every device that switched.
  std::vector<std::pair<int, int>> write_pulse(int i, int j, double v_apply);
  WriteOutcome write_verify(int i, int j, bool target_on, const VerifyConfig& cfg);
  WriteReport clear_array(const VerifyConfig& cfg);
  WriteReport program(const TargetStateMap& targets, const VerifyConfig& cfg);

 private:
  void update_linear();
  PortResponse& response() const;
  double noise();
  void notify(int cell);

  DeviceGrid devices_{};
  LineGeometry geometry_;
  double read_noise_na_ = 0.0;
  Rng noise_rng_;
  bool linear_ = true;  // no device has a nonlinear conductance
  mutable std::unique_ptr<PortResponse> response_;
};

}  // namespace cbnn
