#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "uavfl/a3c_sched.hpp"
#include "uavfl/channel.hpp"
#include "uavfl/fedcore.hpp"
#include "uavfl/harness/config.hpp"
#include "uavfl/latency_cost.hpp"

namespace uavfl::harness {

enum class FLMode { Async, Sync };

struct Device {
  channel::Position2D pos;
  double cpu_hz = 0.0;
  double data_bits = 0.0;
  bool low_quality = false;
  fedcore::LocalDataset data;
  // Carried between slots for the state encoding.
  bool prev_selected = false;
  int prev_subchannel = -1;
  double remaining_upload = 0.0;
};

/// One time slot (one FL round in every cell).
struct RoundMetrics {
  std::size_t round = 0;
  double c_time = 0.0;  // mean over active cells, seconds
  double c_loss = 0.0;
  double c_time_norm = 0.0;
  double c_loss_norm = 0.0;
  double system_cost = 0.0;  // lambda c_time + (1 - lambda) c_loss
  double reward = 0.0;       // mean over agents
  double accuracy = std::numeric_limits<double>::quiet_NaN();
  double round_latency = 0.0;  // slowest cell
  double cumulative_time = 0.0;
  std::size_t num_selected = 0;
  std::size_t num_responders = 0;
  double mean_t_loc = 0.0;
  double mean_t_up = 0.0;
  double mean_t_down = 0.0;
  double mean_t_glo = 0.0;
  std::size_t violations = 0;
  std::vector<std::size_t> responders;
};

/// Multi-UAV FL environment. Agents are UAVs; a step runs one FL round per
/// cell with the selected devices and returns per-agent rewards.
class FLEnv : public a3c::SchedulingEnv {
 public:
  FLEnv(const SimConfig& config, FLMode mode, std::uint64_t seed);

  void reset(std::uint64_t episode_seed) override;
  bool done() const override { return slot_ >= horizon(); }
  std::size_t num_agents() const override { return config_.num_uavs; }
  const a3c::NetworkSnapshot& observe() const override { return snapshot_; }
  a3c::StepOutcome step(std::span<const a3c::SchedulingAction> actions) override;
  double power_min_w() const override { return config_.uav_power_min_w; }
  double power_max_w() const override { return config_.uav_power_max_w; }

  /// Runs with a slot cap other than the configured episode length.
  void set_horizon(std::size_t slots) { horizon_override_ = slots; }
  std::size_t horizon() const {
    return horizon_override_ ? horizon_override_ : config_.fl.max_rounds;
  }
  void set_track_accuracy(bool on) { track_accuracy_ = on; }

  const SimConfig& config() const { return config_; }
  FLMode mode() const { return mode_; }
  std::size_t slot() const { return slot_; }
  const std::vector<Device>& devices() const { return devices_; }
  const std::vector<channel::Position3D>& uavs() const { return uavs_; }
  const std::vector<std::size_t>& cell_devices(std::size_t n) const { return cells_[n]; }
  int cell_of(std::size_t k) const { return cell_of_[k]; }
  const fedcore::Classifier& model() const { return model_; }
  const fedcore::ServerState& server(std::size_t n) const { return servers_[n]; }
  const fedcore::LocalDataset& eval_set() const { return eval_; }
  const RoundMetrics& last_metrics() const { return last_; }
  std::uint64_t episode_seed() const { return episode_seed_; }

  /// Mean eval accuracy of the UAV models.
  double accuracy() const;

  /// Device CPU available in the current slot.
  double effective_cpu(std::size_t k) const { return devices_[k].cpu_hz * load_[k]; }
  /// What schedulers see: the CPU share measured in the previous slot.
  double observed_cpu(std::size_t k) const { return devices_[k].cpu_hz * observed_load_[k]; }

  channel::Geometry geometry() const;

 private:
  void rebuild_snapshot();
  void draw_loads();

  SimConfig config_;
  FLMode mode_;
  fedcore::BlobTask task_;
  fedcore::Classifier model_;
  fedcore::LocalDataset eval_;
  latency::RunningNormalizer time_norm_;
  latency::RunningNormalizer loss_norm_;

  std::uint64_t episode_seed_ = 0;
  std::size_t slot_ = 0;
  std::size_t horizon_override_ = 0;
  bool track_accuracy_ = false;
  double cumulative_time_ = 0.0;
  std::vector<Device> devices_;
  std::vector<double> load_;
  std::vector<double> observed_load_;
  std::vector<channel::Position3D> uavs_;
  std::vector<channel::Position3D> anchors_;  // grid positions at reset
  std::vector<fedcore::ServerState> servers_;
  std::vector<std::vector<std::size_t>> cells_;
  std::vector<int> cell_of_;
  a3c::NetworkSnapshot snapshot_;
  RoundMetrics last_;
};

std::unique_ptr<FLEnv> build_env(const SimConfig& config, std::uint64_t seed,
                                 FLMode mode = FLMode::Async);

/// Initial UAV positions: centers of a near-square grid over the area.
std::vector<channel::Position3D> grid_positions(const SimConfig& config);

}  // namespace uavfl::harness
