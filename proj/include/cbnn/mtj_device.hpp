#pragma once

#include <json.hpp>

#include "cbnn/random.hpp"

namespace cbnn {

// Units throughout the simulator: conductance in microsiemens, voltage in
// volts, current in microamps (so I = G * V needs no scale factor).

struct DeviceParams {
  double g_off_mean = 7.5;   // uS
  double g_off_std = 1.2;    // uS
  double tmr_mean = 0.95;
  double tmr_std = 0.15;
  double vsw_mean = 2.2;     // V, both polarities
  double vsw_std = 0.15;     // V
  double read_noise_std = 10.0;  // nA per current measurement
  double nonlinearity = 0.0;     // 1/V^2

  /// Throws ConfigError when a mean is non-positive or a std negative.
  void validate() const;
  /// Same means, every spread (including read noise) set to zero.
  DeviceParams without_variation() const;
};

void to_json(nlohmann::json& j, const DeviceParams& p);
void from_json(const nlohmann::json& j, DeviceParams& p);

enum class MagState { Parallel, AntiParallel };

inline MagState opposite(MagState s) {
  return s == MagState::Parallel ? MagState::AntiParallel : MagState::Parallel;
}

/// One junction. Parallel is the high-conductance on-state.
struct MtjDevice {
  double g_off = 1.0;
  double g_on = 2.0;
  MagState state = MagState::AntiParallel;
  double v_switch_to_on = 1.0;   // AP -> P when v >= this
  double v_switch_to_off = 1.0;  // P -> AP when v <= -this
  double nonlinearity = 0.0;

  bool is_on() const { return state == MagState::Parallel; }
  double base_conductance() const { return is_on() ? g_on : g_off; }
};

/// Draws g_off and TMR from independent normals (clamped at 0.1 * g_off_mean
/// and 0.05), and both thresholds from the switching-voltage normal (clamped
/// at 0.3 * vsw_mean). New devices start in the off-state.
MtjDevice sample_device(const DeviceParams& params, Rng& rng);

/// base / (1 + nonlinearity * v^2).
double conductance(const MtjDevice& dev, double v_bias);

/// Threshold switching for a quasi-static pulse of `v_device` volts across
/// the junction. Positive voltage drives AP -> P. Returns true on a change.
bool apply_write_voltage(MtjDevice& dev, double v_device);

double tmr(const MtjDevice& dev);

}  // namespace cbnn
