#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uavfl/a3c_sched.hpp"
#include "uavfl/harness/config.hpp"
#include "uavfl/harness/environment.hpp"

namespace uavfl::harness {

enum class Algo { A3cAfl, A3cSfl, GradAfl, AflSelect, AflRandom, SflSelect };

/// Throws InvalidConfig for an unknown id.
Algo parse_algo(const std::string& id);
std::string to_string(Algo algo);
FLMode mode_of(Algo algo);
bool uses_policy(Algo algo);

/// Produces one action per UAV from the environment's current state.
class Scheduler {
 public:
  virtual ~Scheduler() = default;
  virtual std::vector<a3c::SchedulingAction> decide(const FLEnv& env, Rng& rng) = 0;
};

/// Baseline for `algo`; throws InvalidConfig for the policy-driven ids.
std::unique_ptr<Scheduler> make_baseline(Algo algo, const SimConfig& config);

struct TrainedPolicy {
  policy::DenseNet actor;
  policy::DenseNet critic;
  a3c::EncodingLayout encoding;
};

class PolicyScheduler : public Scheduler {
 public:
  PolicyScheduler(const TrainedPolicy& policy, bool greedy, std::size_t min_selected);
  std::vector<a3c::SchedulingAction> decide(const FLEnv& env, Rng& rng) override;

 private:
  const TrainedPolicy& policy_;
  bool greedy_;
  std::size_t min_selected_;
};

a3c::EncodingLayout encoding_for(const SimConfig& config);

/// Environments for A3C workers: async FL, no accuracy tracking.
a3c::EnvFactory env_factory(const SimConfig& config, FLMode mode = FLMode::Async);

struct TrainOutput {
  TrainedPolicy policy;
  std::vector<a3c::EpisodeLog> episodes;
  std::size_t clipped_updates = 0;
  std::uint64_t updates = 0;
};

/// Trains with `config.rl` (its seed and worker count included).
TrainOutput train_policy(const SimConfig& config);

void save_policy(const std::filesystem::path& path, const TrainedPolicy& policy);
TrainedPolicy load_policy(const std::filesystem::path& path);

/// One FL run of `rounds` slots on the environment seeded with `seed`.
std::vector<RoundMetrics> run_fl(const SimConfig& config, std::uint64_t seed,
                                 Scheduler& scheduler, FLMode mode, std::size_t rounds);

struct ExperimentOutput {
  std::vector<std::vector<RoundMetrics>> runs;  // one per seed
  nlohmann::json summary;
};

/// Runs `algo` on every seed. Policy-driven algorithms use `policy` when
/// given, otherwise train one per seed. With `out_dir`, writes
/// <algo>_seed<s>.csv per seed and <algo>_summary.json.
ExperimentOutput run_experiment(const SimConfig& config, Algo algo,
                                std::span<const std::uint64_t> seeds,
                                const std::optional<std::filesystem::path>& out_dir,
                                const TrainedPolicy* policy = nullptr,
                                std::optional<std::size_t> rounds = std::nullopt);

/// First round at which `accuracy >= target`, with the cumulative time then.
struct TargetHit {
  std::size_t rounds = 0;  // 1-based count of rounds run
  double wall_clock = 0.0;
};
std::optional<TargetHit> time_to_accuracy(std::span<const RoundMetrics> run, double target);

}  // namespace uavfl::harness
