#include "uavfl/a3c_sched.hpp"
#include "uavfl/errors.hpp"

namespace uavfl::a3c {

std::vector<double> n_step_returns(std::span<const double> rewards, double gamma,
                                   std::optional<double> bootstrap) {
  std::vector<double> out(rewards.size());
  double next = bootstrap.value_or(0.0);
  for (std::size_t t = rewards.size(); t-- > 0;) {
    next = rewards[t] + gamma * next;
    out[t] = next;
  }
  return out;
}

std::vector<double> n_step_returns(const Trajectory& traj, double gamma) {
  std::vector<double> rewards;
  rewards.reserve(traj.steps.size());
  for (const auto& s : traj.steps) rewards.push_back(s.reward);
  return n_step_returns(rewards, gamma,
                        traj.terminal ? std::nullopt : std::optional(traj.bootstrap));
}

std::vector<double> advantage(std::span<const double> returns,
                              std::span<const double> values) {
  if (returns.size() != values.size()) {
    throw LengthMismatch("advantage: " + std::to_string(returns.size()) +
                         " returns vs " + std::to_string(values.size()) + " values");
  }
  std::vector<double> out(returns.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = returns[t] - values[t];
  return out;
}

std::uint64_t flop_estimate(std::span<const std::size_t> actor_sizes,
                            std::span<const std::size_t> critic_sizes,
                            std::uint64_t episodes, std::uint64_t steps) {
  auto per_net = [](std::span<const std::size_t> j) {
    std::uint64_t total = 0;
    for (std::size_t i = 1; i + 1 < j.size(); ++i) {
      total += static_cast<std::uint64_t>(j[i - 1]) * j[i] +
               static_cast<std::uint64_t>(j[i]) * j[i + 1];
    }
    return total;
  };
  for (auto s : actor_sizes) {
    if (s == 0) throw InvalidConfig("flop_estimate: layer sizes must be >= 1");
  }
  for (auto s : critic_sizes) {
    if (s == 0) throw InvalidConfig("flop_estimate: layer sizes must be >= 1");
  }
  return episodes * steps * (per_net(actor_sizes) + per_net(critic_sizes));
}

}  // namespace uavfl::a3c
