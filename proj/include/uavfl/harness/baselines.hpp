#pragma once

#include <cstddef>
#include <vector>

#include "uavfl/a3c_sched.hpp"
#include "uavfl/harness/environment.hpp"

namespace uavfl::harness {

/// Round time of device k at UAV n predicted from the current geometry with
/// one subchannel, full device power, the UAV at maximum power and no
/// interference. The UAV aggregation term is excluded.
double predicted_device_time(const FLEnv& env, std::size_t n, std::size_t k);

/// The k devices of cell n minimizing the predicted mean round time, in
/// ascending score order. All devices when k covers the cell.
std::vector<std::size_t> baseline_select_topk(const FLEnv& env, std::size_t n,
                                              std::size_t k);

/// Uniform k-subset of cell n, ascending device id.
std::vector<std::size_t> baseline_select_random(const FLEnv& env, std::size_t n,
                                                std::size_t k, Rng& rng);

/// Devices paired with subchannels 0, 1, ... in the given order, at the
/// current UAV position and maximum power.
a3c::SchedulingAction make_action(const FLEnv& env, std::size_t n,
                                  const std::vector<std::size_t>& devices);

/// Mean over cells of the selected devices' round times for the given
/// actions, with full inter-cell interference. Cells without devices are
/// skipped.
double predicted_time_cost(const FLEnv& env,
                           const std::vector<a3c::SchedulingAction>& actions);

struct GradientSchedulerConfig {
  std::size_t iterations = 20;
  double initial_step = 0.1;  // in area / power-normalized units
  double step_decay = 0.5;
  double fd_step = 1e-4;
};

/// Top-k selection per cell, then projected finite-difference descent over
/// every UAV's position and power on the predicted one-step cost. A
/// candidate is kept only if it lowers the cost.
std::vector<a3c::SchedulingAction> baseline_gradient_scheduler(
    const FLEnv& env, std::size_t k, const GradientSchedulerConfig& config = {});

}  // namespace uavfl::harness
