#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

// Air-to-ground propagation and link-budget computations. Every function in
// this header is pure and safe to call concurrently.
namespace uavfl::channel {

struct Position3D {
  double x = 0.0;  // m
  double y = 0.0;  // m
  double h = 0.0;  // m above ground
};

struct Position2D {
  double x = 0.0;
  double y = 0.0;
};

inline constexpr double kSpeedOfLight = 2.998e8;

struct RadioParams {
  double carrier_hz = 2.0e9;
  double light_speed = kSpeedOfLight;
  double eta_los_db = 1.0;
  double eta_nlos_db = 20.0;
  double xi1 = 9.61;
  double xi2 = 0.16;  // 1/degree
  double noise_power_w = 1.0e-13;  // -100 dBm
  double bw_uplink_hz = 10.0e6;
  double bw_downlink_hz = 5.0e6;
  std::size_t num_subchannels = 10;

  double subchannel_bw_hz() const {
    return bw_uplink_hz / static_cast<double>(num_subchannels);
  }

  /// Throws InvalidConfig when a field is out of range.
  void validate() const;
};

/// Selection, subchannel and power indicators for N UAVs, K devices and M
/// subchannels, stored densely. Indicator entries are kept as bytes so that
/// a non-binary value can be represented and reported by the constraint
/// checker.
class LinkAllocation {
 public:
  LinkAllocation() = default;
  LinkAllocation(std::size_t num_uavs, std::size_t num_devices,
                 std::size_t num_subchannels);

  std::size_t num_uavs() const { return uavs_; }
  std::size_t num_devices() const { return devices_; }
  std::size_t num_subchannels() const { return subchannels_; }

  std::uint8_t& rho(std::size_t n, std::size_t k) { return rho_[n * devices_ + k]; }
  std::uint8_t rho(std::size_t n, std::size_t k) const {
    return rho_[n * devices_ + k];
  }
  std::uint8_t& chi(std::size_t n, std::size_t k, std::size_t m) {
    return chi_[(n * devices_ + k) * subchannels_ + m];
  }
  std::uint8_t chi(std::size_t n, std::size_t k, std::size_t m) const {
    return chi_[(n * devices_ + k) * subchannels_ + m];
  }
  double& uplink_power(std::size_t k, std::size_t m) {
    return p_up_[k * subchannels_ + m];
  }
  double uplink_power(std::size_t k, std::size_t m) const {
    return p_up_[k * subchannels_ + m];
  }
  double& downlink_power(std::size_t n) { return p_down_[n]; }
  double downlink_power(std::size_t n) const { return p_down_[n]; }

  /// First UAV with a nonzero selection indicator for device k, or -1.
  int serving_uav(std::size_t k) const;

  /// Number of subchannels device k holds at UAV n.
  std::size_t subchannel_count(std::size_t n, std::size_t k) const;

  /// Select device k at UAV n on subchannel m (sets rho and chi).
  void assign(std::size_t n, std::size_t k, std::size_t m);

  /// Spread a device's total transmit power equally across the subchannels
  /// it holds at its serving UAV; devices without subchannels get zero.
  void split_uplink_power(std::span<const double> device_power_w);

 private:
  std::size_t uavs_ = 0;
  std::size_t devices_ = 0;
  std::size_t subchannels_ = 0;
  std::vector<std::uint8_t> rho_;
  std::vector<std::uint8_t> chi_;
  std::vector<double> p_up_;
  std::vector<double> p_down_;
};

struct Geometry {
  std::vector<Position3D> uavs;
  std::vector<Position2D> devices;
};

double distance(const Position3D& uav, const Position2D& dev);

/// Elevation angle in degrees, in (0, 90].
double elevation_angle_deg(const Position3D& uav, const Position2D& dev);

double los_probability(double theta_deg, const RadioParams& params);

/// 20 log10(4 pi fc d / c).
double free_space_loss_db(double distance_m, const RadioParams& params);

/// LoS/NLoS mixture for a given free-space term and LoS probability.
double mixed_path_loss_db(double fspl_db, double p_los,
                          const RadioParams& params);

double path_loss_db(const Position3D& uav, const Position2D& dev,
                    const RadioParams& params);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Linear channel gains 10^(-l/10) for every (UAV, device) pair, row-major
/// by UAV.
class GainTable {
 public:
  GainTable() = default;
  GainTable(const Geometry& geometry, const RadioParams& params);

  std::size_t num_uavs() const { return uavs_; }
  std::size_t num_devices() const { return devices_; }
  double gain(std::size_t n, std::size_t k) const {
    return gain_[n * devices_ + k];
  }
  double loss_db(std::size_t n, std::size_t k) const {
    return loss_[n * devices_ + k];
  }

 private:
  std::size_t uavs_ = 0;
  std::size_t devices_ = 0;
  std::vector<double> gain_;
  std::vector<double> loss_;
};

/// Uplink SINR of device k on subchannel m at its serving UAV. Interference
/// comes from co-channel devices served by other UAVs, each attenuated by its
/// own path loss to the serving UAV. Throws NotAllocated if device k does not
/// hold subchannel m.
double uplink_sinr(std::size_t k, std::size_t m, const GainTable& gains,
                   const LinkAllocation& alloc, const RadioParams& params);
double uplink_sinr(std::size_t k, std::size_t m, const Geometry& geometry,
                   const LinkAllocation& alloc, const RadioParams& params);

/// Sum over held subchannels of (B^U/M) log2(1 + SINR); zero when the device
/// holds no subchannel.
double uplink_rate(std::size_t k, const GainTable& gains,
                   const LinkAllocation& alloc, const RadioParams& params);
double uplink_rate(std::size_t k, const Geometry& geometry,
                   const LinkAllocation& alloc, const RadioParams& params);

/// Downlink SINR at device k from serving UAV n, interfered by every other
/// UAV's broadcast power.
double downlink_sinr(std::size_t k, std::size_t n, const GainTable& gains,
                     const LinkAllocation& alloc, const RadioParams& params);
double downlink_sinr(std::size_t k, std::size_t n, const Geometry& geometry,
                     const LinkAllocation& alloc, const RadioParams& params);

/// B log2(1 + SINR).
double shannon_rate(double bandwidth_hz, double sinr);

double downlink_rate(std::size_t k, std::size_t n, const GainTable& gains,
                     const LinkAllocation& alloc, const RadioParams& params);
double downlink_rate(std::size_t k, std::size_t n, const Geometry& geometry,
                     const LinkAllocation& alloc, const RadioParams& params);

}  // namespace uavfl::channel

