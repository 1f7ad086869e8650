#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uavfl/latency_cost.hpp"
#include "uavfl/policy_net.hpp"

namespace uavfl::a3c {

// ---------------------------------------------------------------------------
// State and action

struct DeviceView {
  std::size_t device_id = 0;
  double x = 0.0;
  double y = 0.0;
  double path_loss_db = 0.0;  // to the cell's UAV, used to rank overflow
  bool prev_selected = false;
  int prev_subchannel = -1;
  double remaining_upload = 0.0;  // fraction of the upload payload left
  double cpu_hz = 0.0;
  double samples = 0.0;
  double loss = 0.0;  // the cell model's loss on the device's data
};

struct CellView {
  double uav_x = 0.0;
  double uav_y = 0.0;
  policy::PositionBox box;  // where this UAV may fly
  double remaining_broadcast = 0.0;  // fraction of the broadcast payload left
  std::vector<DeviceView> devices;
};

/// Environment state at the start of a time slot.
struct NetworkSnapshot {
  double area_x = 1.0;
  double area_y = 1.0;
  double cpu_max_hz = 1.0;
  double samples_max = 1.0;
  double loss_scale = 1.0;  // loss features are loss / (2 loss_scale), capped at 1
  double slot_fraction = 0.0;  // elapsed share of the episode
  std::vector<CellView> cells;
};

/// Fixed encoding geometry: `slots` device slots of `9 + subchannels`
/// features after 4 cell features.
struct EncodingLayout {
  std::size_t slots = 32;
  std::size_t subchannels = 10;

  static constexpr std::size_t kCellFeatures = 4;
  std::size_t slot_features() const { return 9 + subchannels; }
  std::size_t size() const { return kCellFeatures + slots * slot_features(); }
};

struct EncodedState {
  std::vector<double> features;
  std::vector<std::size_t> slot_device;   // device id per occupied slot
  std::vector<std::uint8_t> present;      // per slot
};

/// Deterministic fixed-length encoding of one cell. Devices fill slots in
/// ascending id; when a cell holds more devices than slots the ones with the
/// lowest path loss are kept.
EncodedState encode_state(const NetworkSnapshot& snapshot, std::size_t cell,
                          const EncodingLayout& layout);

/// One UAV's executed decision.
struct SchedulingAction {
  double x = 0.0;
  double y = 0.0;
  double power_w = 0.0;
  std::vector<std::size_t> devices;  // ascending device id
  std::vector<std::size_t> subchannels;  // parallel to `devices`
};

SchedulingAction to_scheduling_action(const policy::SampledAction& sampled,
                                      const EncodedState& state);

/// -(lambda * c_time + (1 - lambda) * c_loss).
double reward(double time_cost, double loss_cost, const latency::CostWeights& w);

// ---------------------------------------------------------------------------
// Environment interface

struct StepOutcome {
  std::vector<double> rewards;  // one per agent
  double system_cost = 0.0;     // raw, averaged over cells
  double normalized_cost = 0.0;  // the same from normalized terms
  double time_cost = 0.0;
  double loss_cost = 0.0;
  std::size_t violations = 0;
};

/// Multi-agent scheduling environment: one agent per UAV.
class SchedulingEnv {
 public:
  virtual ~SchedulingEnv() = default;

  virtual void reset(std::uint64_t episode_seed) = 0;
  virtual bool done() const = 0;
  virtual std::size_t num_agents() const = 0;
  virtual const NetworkSnapshot& observe() const = 0;
  virtual StepOutcome step(std::span<const SchedulingAction> actions) = 0;

  virtual double power_min_w() const { return 0.0; }
  virtual double power_max_w() const = 0;
};

using EnvFactory = std::function<std::unique_ptr<SchedulingEnv>(std::size_t worker)>;

// ---------------------------------------------------------------------------
// Trajectories, returns, losses

struct Step {
  std::vector<double> state;
  std::vector<std::uint8_t> present;
  policy::PositionBox box;
  policy::SampledAction action;
  double reward = 0.0;
  double value = 0.0;
};

struct Trajectory {
  std::vector<Step> steps;
  bool terminal = true;
  double bootstrap = 0.0;  // V(s_{t+1}) when not terminal
};

/// U_t = r_t + gamma U_{t+1}, seeded with the bootstrap value or 0.
std::vector<double> n_step_returns(std::span<const double> rewards, double gamma,
                                   std::optional<double> bootstrap);
std::vector<double> n_step_returns(const Trajectory& traj, double gamma);

/// A_t = U_t - V_t. Throws LengthMismatch.
std::vector<double> advantage(std::span<const double> returns,
                              std::span<const double> values);

/// Static parts of the head context shared by every step.
struct HeadSettings {
  policy::HeadLayout layout;
  double power_min = 0.0;
  double power_max = 1.0;
  std::size_t max_selected = 1;
  std::size_t min_selected = 0;

  policy::HeadContext context(const Step& step) const;
};

/// Accumulates into `grad` the ascent direction
///   sum_t A_t grad log pi(a_t|s_t) + coef * grad G(pi(.|s_t))
/// and returns the objective value. Advantages are constants.
double actor_loss_grad(const policy::DenseNet& actor, const HeadSettings& heads,
                       std::span<const Step* const> steps,
                       std::span<const double> advantages, double entropy_coef,
                       std::span<double> grad);

/// Accumulates d/dtheta sum_t (U_t - V(s_t))^2 into `grad`; returns the loss.
double critic_loss_grad(const policy::DenseNet& critic,
                        std::span<const Step* const> steps,
                        std::span<const double> returns, std::span<double> grad);

// ---------------------------------------------------------------------------
// Global store and workers

struct TrainConfig {
  std::vector<std::size_t> actor_hidden{256, 256, 128};
  std::vector<std::size_t> critic_hidden{256, 256, 128};
  double beta_actor = 1e-4;
  double beta_critic = 1e-3;
  double rms_alpha = 0.99;
  double rms_eps = 1e-8;
  double gamma = 0.98;
  double entropy_coef = 0.01;
  std::size_t t_max = 8;
  std::size_t workers = 4;
  std::size_t episodes = 500;
  /// Global update budget T_max; unset leaves the episode count as the
  /// only limit.
  std::optional<std::uint64_t> max_updates;
  double grad_clip = 5.0;
  bool shared_rms = true;
  /// Locked is forced for a single worker.
  policy::SyncMode sync = policy::SyncMode::Hogwild;
  std::size_t min_selected = 1;
  /// Initial log-std of the position and power heads; the actor's output
  /// layer starts scaled by 0.01.
  double init_log_std = -1.5;
  /// Start the critic at the mean return of one probe episode played by
  /// the initial policy, with its output layer scaled like the actor's.
  bool calibrate_critic = true;
  std::uint64_t seed = 1;

  /// Throws InvalidConfig; returns human-readable warnings.
  std::vector<std::string> validate() const;
};

struct GlobalStore {
  GlobalStore(policy::DenseNet actor_net, policy::DenseNet critic_net,
              const TrainConfig& config);

  std::vector<std::size_t> actor_sizes;
  std::vector<std::size_t> critic_sizes;
  policy::SharedParameters actor;
  policy::SharedParameters critic;
  std::atomic<std::uint64_t> counter{0};
  std::optional<std::uint64_t> max_updates;

  bool budget_spent() const {
    return max_updates && counter.load(std::memory_order_relaxed) >= *max_updates;
  }
};

struct Worker {
  policy::DenseNet actor;
  policy::DenseNet critic;
  std::vector<double> actor_grad;
  std::vector<double> critic_grad;
  std::vector<double> actor_g;  // private accumulators when unshared
  std::vector<double> critic_g;
};

Worker make_worker(const GlobalStore& store);

/// theta_a follows -dtheta_a (ascent), theta_c follows dtheta_c (descent),
/// both through RMSProp; increments the counter.
void apply_async_update(GlobalStore& store, std::span<const double> actor_grad,
                        std::span<const double> critic_grad,
                        Worker* worker = nullptr);

/// Copies the global parameters into the worker and zeroes its gradients.
void sync_worker(const GlobalStore& store, Worker& worker);

struct EpisodeLog {
  std::size_t episode = 0;
  double mean_cost = 0.0;
  double mean_normalized_cost = 0.0;
  double mean_reward = 0.0;
  std::size_t constraint_violations = 0;
  double mean_time_cost = 0.0;
  double mean_loss_cost = 0.0;
  double mean_selected = 0.0;  // devices per agent per slot
};

struct TrainResult {
  std::unique_ptr<GlobalStore> store;
  std::vector<EpisodeLog> episodes;  // ordered by episode index
  std::size_t clipped_updates = 0;
};

struct PolicyDecision {
  EncodedState state;
  policy::SampledAction sampled;
  SchedulingAction action;
};

/// Runs the actor for every cell of `snapshot`.
std::vector<PolicyDecision> act(const policy::DenseNet& actor,
                                const HeadSettings& heads,
                                const EncodingLayout& encoding,
                                const NetworkSnapshot& snapshot, Rng& rng,
                                bool greedy);

HeadSettings head_settings(const EncodingLayout& encoding,
                           const SchedulingEnv& env,
                           const NetworkSnapshot& snapshot,
                           std::size_t min_selected);

/// Multi-worker A3C. Each worker owns an environment from `factory`;
/// episodes are claimed in order from a shared counter.
TrainResult train(const EnvFactory& factory, const EncodingLayout& encoding,
                  const TrainConfig& config);

/// E * T * (sum over hidden layers of the actor of J_{j-1} J_j + J_j J_{j+1},
/// plus the same over the critic).
std::uint64_t flop_estimate(std::span<const std::size_t> actor_sizes,
                            std::span<const std::size_t> critic_sizes,
                            std::uint64_t episodes, std::uint64_t steps);

}  // namespace uavfl::a3c
