#include "uavfl/channel.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "uavfl/errors.hpp"

namespace uavfl::channel {

void RadioParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidConfig(std::string("radio: ") + what);
  };
  require(carrier_hz > 0.0, "carrier frequency must be positive");
  require(light_speed > 0.0, "speed of light must be positive");
  require(eta_los_db >= 0.0, "eta_los must be nonnegative");
  require(eta_nlos_db >= eta_los_db, "eta_nlos must be >= eta_los");
  require(xi1 > 0.0, "xi1 must be positive");
  require(xi2 >= 0.0, "xi2 must be nonnegative");
  require(noise_power_w > 0.0, "noise power must be positive");
  require(bw_uplink_hz > 0.0, "uplink bandwidth must be positive");
  require(bw_downlink_hz > 0.0, "downlink bandwidth must be positive");
  require(num_subchannels >= 1, "at least one subchannel is required");
}

LinkAllocation::LinkAllocation(std::size_t num_uavs, std::size_t num_devices,
                               std::size_t num_subchannels)
    : uavs_(num_uavs),
      devices_(num_devices),
      subchannels_(num_subchannels),
      rho_(num_uavs * num_devices, 0),
      chi_(num_uavs * num_devices * num_subchannels, 0),
      p_up_(num_devices * num_subchannels, 0.0),
      p_down_(num_uavs, 0.0) {}

int LinkAllocation::serving_uav(std::size_t k) const {
  for (std::size_t n = 0; n < uavs_; ++n) {
    if (rho(n, k) != 0) return static_cast<int>(n);
  }
  return -1;
}

std::size_t LinkAllocation::subchannel_count(std::size_t n,
                                             std::size_t k) const {
  std::size_t count = 0;
  for (std::size_t m = 0; m < subchannels_; ++m) count += chi(n, k, m) != 0;
  return count;
}

void LinkAllocation::assign(std::size_t n, std::size_t k, std::size_t m) {
  rho(n, k) = 1;
  chi(n, k, m) = 1;
}

void LinkAllocation::split_uplink_power(
    std::span<const double> device_power_w) {
  if (device_power_w.size() != devices_) {
    throw ShapeMismatch("split_uplink_power: one power per device expected");
  }
  for (std::size_t k = 0; k < devices_; ++k) {
    const int n = serving_uav(k);
    const std::size_t held =
        n < 0 ? 0 : subchannel_count(static_cast<std::size_t>(n), k);
    for (std::size_t m = 0; m < subchannels_; ++m) {
      const bool on =
          held > 0 && chi(static_cast<std::size_t>(n), k, m) != 0;
      uplink_power(k, m) =
          on ? device_power_w[k] / static_cast<double>(held) : 0.0;
    }
  }
}

double distance(const Position3D& uav, const Position2D& dev) {
  const double dx = uav.x - dev.x;
  const double dy = uav.y - dev.y;
  return std::sqrt(dx * dx + dy * dy + uav.h * uav.h);
}

double elevation_angle_deg(const Position3D& uav, const Position2D& dev) {
  const double ratio = uav.h / distance(uav, dev);
  return 180.0 / std::numbers::pi * std::asin(std::min(1.0, ratio));
}

double los_probability(double theta_deg, const RadioParams& params) {
  return 1.0 /
         (1.0 + params.xi1 * std::exp(-params.xi2 * (theta_deg - params.xi1)));
}

double free_space_loss_db(double distance_m, const RadioParams& params) {
  return 20.0 * std::log10(4.0 * std::numbers::pi * params.carrier_hz *
                           distance_m / params.light_speed);
}

double mixed_path_loss_db(double fspl_db, double p_los,
                          const RadioParams& params) {
  const double los = fspl_db + params.eta_los_db;
  const double nlos = fspl_db + params.eta_nlos_db;
  return p_los * los + (1.0 - p_los) * nlos;
}

double path_loss_db(const Position3D& uav, const Position2D& dev,
                    const RadioParams& params) {
  const double d = distance(uav, dev);
  const double p_los = los_probability(elevation_angle_deg(uav, dev), params);
  return mixed_path_loss_db(free_space_loss_db(d, params), p_los, params);
}

GainTable::GainTable(const Geometry& geometry, const RadioParams& params)
    : uavs_(geometry.uavs.size()),
      devices_(geometry.devices.size()),
      gain_(uavs_ * devices_),
      loss_(uavs_ * devices_) {
  for (std::size_t n = 0; n < uavs_; ++n) {
    for (std::size_t k = 0; k < devices_; ++k) {
      const double l = path_loss_db(geometry.uavs[n], geometry.devices[k], params);
      loss_[n * devices_ + k] = l;
      gain_[n * devices_ + k] = db_to_linear(-l);
    }
  }
}

namespace {

void check_dims(const GainTable& gains, const LinkAllocation& alloc) {
  if (gains.num_uavs() != alloc.num_uavs() ||
      gains.num_devices() != alloc.num_devices()) {
    throw ShapeMismatch("gain table and allocation disagree on dimensions");
  }
}

}  // namespace

double uplink_sinr(std::size_t k, std::size_t m, const GainTable& gains,
                   const LinkAllocation& alloc, const RadioParams& params) {
  check_dims(gains, alloc);
  const int serving = alloc.serving_uav(k);
  if (serving < 0 || m >= alloc.num_subchannels() ||
      alloc.chi(static_cast<std::size_t>(serving), k, m) == 0) {
    throw NotAllocated("device " + std::to_string(k) +
                       " does not hold subchannel " + std::to_string(m));
  }
  const auto n = static_cast<std::size_t>(serving);
  const double signal = alloc.uplink_power(k, m) * gains.gain(n, k);
  double interference = 0.0;
  for (std::size_t other = 0; other < alloc.num_devices(); ++other) {
    if (other == k) continue;
    for (std::size_t cell = 0; cell < alloc.num_uavs(); ++cell) {
      if (cell == n || alloc.chi(cell, other, m) == 0) continue;
      interference += alloc.uplink_power(other, m) * gains.gain(n, other);
    }
  }
  return signal / (interference + params.noise_power_w);
}

double uplink_sinr(std::size_t k, std::size_t m, const Geometry& geometry,
                   const LinkAllocation& alloc, const RadioParams& params) {
  return uplink_sinr(k, m, GainTable(geometry, params), alloc, params);
}

double uplink_rate(std::size_t k, const GainTable& gains,
                   const LinkAllocation& alloc, const RadioParams& params) {
  const int serving = alloc.serving_uav(k);
  if (serving < 0) return 0.0;
  const auto n = static_cast<std::size_t>(serving);
  double spectral = 0.0;
  for (std::size_t m = 0; m < alloc.num_subchannels(); ++m) {
    if (alloc.chi(n, k, m) == 0) continue;
    spectral += std::log2(1.0 + uplink_sinr(k, m, gains, alloc, params));
  }
  return params.subchannel_bw_hz() * spectral;
}

double uplink_rate(std::size_t k, const Geometry& geometry,
                   const LinkAllocation& alloc, const RadioParams& params) {
  return uplink_rate(k, GainTable(geometry, params), alloc, params);
}

double downlink_sinr(std::size_t k, std::size_t n, const GainTable& gains,
                     const LinkAllocation& alloc, const RadioParams& params) {
  check_dims(gains, alloc);
  const double signal = alloc.downlink_power(n) * gains.gain(n, k);
  double interference = 0.0;
  for (std::size_t other = 0; other < alloc.num_uavs(); ++other) {
    if (other == n) continue;
    interference += alloc.downlink_power(other) * gains.gain(other, k);
  }
  return signal / (interference + params.noise_power_w);
}

double downlink_sinr(std::size_t k, std::size_t n, const Geometry& geometry,
                     const LinkAllocation& alloc, const RadioParams& params) {
  return downlink_sinr(k, n, GainTable(geometry, params), alloc, params);
}

double shannon_rate(double bandwidth_hz, double sinr) {
  return bandwidth_hz * std::log2(1.0 + sinr);
}

double downlink_rate(std::size_t k, std::size_t n, const GainTable& gains,
                     const LinkAllocation& alloc, const RadioParams& params) {
  return shannon_rate(params.bw_downlink_hz,
                      downlink_sinr(k, n, gains, alloc, params));
}

double downlink_rate(std::size_t k, std::size_t n, const Geometry& geometry,
                     const LinkAllocation& alloc, const RadioParams& params) {
  return downlink_rate(k, n, GainTable(geometry, params), alloc, params);
}

}  // namespace uavfl::channel
