#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "uavfl/a3c_sched.hpp"
#include "uavfl/channel.hpp"
#include "uavfl/fedcore.hpp"

namespace uavfl::harness {

struct DataConfig {
  std::size_t classes = 10;
  std::size_t features = 20;
  double separation = 1.0;  // std of the class-center prior
  double dirichlet_alpha = 0.5;
  double bits_per_sample = 50000.0;
  double low_quality_fraction = 0.2;
  double label_noise = 0.3;
  std::size_t eval_per_class = 100;
  std::uint64_t task_seed = 7;
  std::size_t hidden = 0;  // 0: softmax regression
};

struct SimConfig {
  std::uint64_t seed = 1;
  double area_x = 400.0;
  double area_y = 400.0;
  std::size_t num_uavs = 4;
  double uav_move_radius = 100.0;  // half-width of each UAV's flight box around its grid home
  double uav_height = 150.0;
  std::size_t num_devices = 150;
  double data_bits_min = 5.0e6;
  double data_bits_max = 10.0e6;
  double cpu_min_hz = 1.0e9;
  double cpu_max_hz = 2.0e9;
  /// Per-round available CPU share drawn from U[cpu_load_min, 1].
  double cpu_load_min = 0.1;
  double device_power_w = 0.05;
  double uav_power_min_w = 0.015;
  double uav_power_max_w = 0.15;
  double payload_bits = 2.0e5;
  double lambda = 0.4;
  double device_cycles_per_sample = 1.0e6;
  double uav_cycles_per_sample = 1.0e5;
  double uav_cpu_hz = 3.0e9;
  channel::RadioParams radio;
  DataConfig data;
  fedcore::FLConfig fl;          // max_rounds doubles as the episode length
  a3c::TrainConfig rl;
  std::size_t state_slots = 32;  // device slots per cell in the encoding
  std::size_t select_k = 8;      // devices per cell for the baseline selectors
  bool reset_normalizers_per_episode = false;
  /// Per-cell costs each normalizer is fitted on before its range freezes;
  /// 0 keeps widening it forever.
  std::size_t normalizer_window = 64;
  bool eval_greedy = true;

  /// Throws InvalidConfig; returns warnings.
  std::vector<std::string> validate() const;
};

/// Parse and validate; unknown keys are rejected. Throws InvalidConfig.
SimConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SimConfig& config);
SimConfig load_config(const std::filesystem::path& path);

}  // namespace uavfl::harness
