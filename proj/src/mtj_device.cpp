#include "cbnn/mtj_device.hpp"

#include <algorithm>

#include "cbnn/errors.hpp"

namespace cbnn {

void DeviceParams::validate() const {
  if (!(g_off_mean > 0.0)) throw ConfigError("device.g_off_mean must be > 0");
  if (!(tmr_mean > 0.0)) throw ConfigError("device.tmr_mean must be > 0");
  if (!(vsw_mean > 0.0)) throw ConfigError("device.vsw_mean must be > 0");
  if (g_off_std < 0.0 || tmr_std < 0.0 || vsw_std < 0.0 || read_noise_std < 0.0)
    throw ConfigError("device standard deviations must be >= 0");
  if (nonlinearity < 0.0) throw ConfigError("device.nonlinearity must be >= 0");
}

DeviceParams DeviceParams::without_variation() const {
  DeviceParams p = *this;
  p.g_off_std = 0.0;
  p.tmr_std = 0.0;
  p.vsw_std = 0.0;
  p.read_noise_std = 0.0;
  return p;
}

void to_json(nlohmann::json& j, const DeviceParams& p) {
  j = {{"g_off_mean", p.g_off_mean},   {"g_off_std", p.g_off_std},
       {"tmr_mean", p.tmr_mean},       {"tmr_std", p.tmr_std},
       {"vsw_mean", p.vsw_mean},       {"vsw_std", p.vsw_std},
       {"read_noise_std", p.read_noise_std}, {"nonlinearity", p.nonlinearity}};
}

void from_json(const nlohmann::json& j, DeviceParams& p) {
  p.g_off_mean = j.value("g_off_mean", p.g_off_mean);
  p.g_off_std = j.value("g_off_std", p.g_off_std);
  p.tmr_mean = j.value("tmr_mean", p.tmr_mean);
  p.tmr_std = j.value("tmr_std", p.tmr_std);
  p.vsw_mean = j.value("vsw_mean", p.vsw_mean);
  p.vsw_std = j.value("vsw_std", p.vsw_std);
  p.read_noise_std = j.value("read_noise_std", p.read_noise_std);
  p.nonlinearity = j.value("nonlinearity", p.nonlinearity);
}

namespace {

double clamped_normal(Rng& rng, double mean, double std, double floor) {
  if (std == 0.0) return std::max(mean, floor);
  std::normal_distribution<double> dist(mean, std);
  return std::max(dist(rng), floor);
}

}  // namespace

MtjDevice sample_device(const DeviceParams& params, Rng& rng) {
  MtjDevice d;
  d.g_off = clamped_normal(rng, params.g_off_mean, params.g_off_std, 0.1 * params.g_off_mean);
  const double t = clamped_normal(rng, params.tmr_mean, params.tmr_std, 0.05);
  d.g_on = d.g_off * (1.0 + t);
  d.v_switch_to_on = clamped_normal(rng, params.vsw_mean, params.vsw_std, 0.3 * params.vsw_mean);
  d.v_switch_to_off = clamped_normal(rng, params.vsw_mean, params.vsw_std, 0.3 * params.vsw_mean);
  d.state = MagState::AntiParallel;
  d.nonlinearity = params.nonlinearity;
  return d;
}

double conductance(const MtjDevice& dev, double v_bias) {
  const double base = dev.base_conductance();
  if (dev.nonlinearity == 0.0) return base;
  return base / (1.0 + dev.nonlinearity * v_bias * v_bias);
}

bool apply_write_voltage(MtjDevice& dev, double v_device) {
  if (dev.state == MagState::AntiParallel && v_device >= dev.v_switch_to_on) {
    dev.state = MagState::Parallel;
    return true;
  }
  if (dev.state == MagState::Parallel && v_device <= -dev.v_switch_to_off) {
    dev.state = MagState::AntiParallel;
    return true;
  }
  return false;
}

double tmr(const MtjDevice& dev) { return (dev.g_on - dev.g_off) / dev.g_off; }

}  // namespace cbnn
