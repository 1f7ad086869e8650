#include "uavfl/harness/experiment.hpp"

#include <cmath>
#include <fstream>

#include "uavfl/checkpoint.hpp"
#include "uavfl/errors.hpp"
#include "uavfl/harness/baselines.hpp"
#include "uavfl/harness/metrics_io.hpp"

namespace uavfl::harness {
namespace {

ModelParams size_block(const std::vector<std::size_t>& sizes) {
  return ModelParams(std::vector<double>(sizes.begin(), sizes.end()), {sizes.size()});
}

std::vector<std::size_t> sizes_of(const ModelParams& block) {
  std::vector<std::size_t> out;
  for (double v : block.values) {
    if (!(v >= 1.0) || v != std::floor(v)) throw FormatError("checkpoint: bad layer size");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

class TopKScheduler : public Scheduler {
 public:
  explicit TopKScheduler(std::size_t k) : k_(k) {}
  std::vector<a3c::SchedulingAction> decide(const FLEnv& env, Rng&) override {
    std::vector<a3c::SchedulingAction> out;
    for (std::size_t n = 0; n < env.num_agents(); ++n) {
      out.push_back(make_action(env, n, baseline_select_topk(env, n, k_)));
    }
    return out;
  }

 private:
  std::size_t k_;
};

class RandomScheduler : public Scheduler {
 public:
  explicit RandomScheduler(std::size_t k) : k_(k) {}
  std::vector<a3c::SchedulingAction> decide(const FLEnv& env, Rng& rng) override {
    std::vector<a3c::SchedulingAction> out;
    for (std::size_t n = 0; n < env.num_agents(); ++n) {
      out.push_back(make_action(env, n, baseline_select_random(env, n, k_, rng)));
    }
    return out;
  }

 private:
  std::size_t k_;
};

class GradientScheduler : public Scheduler {
 public:
  explicit GradientScheduler(std::size_t k) : k_(k) {}
  std::vector<a3c::SchedulingAction> decide(const FLEnv& env, Rng&) override {
    return baseline_gradient_scheduler(env, k_);
  }

 private:
  std::size_t k_;
};

}  // namespace

Algo parse_algo(const std::string& id) {
  if (id == "a3c-afl") return Algo::A3cAfl;
  if (id == "a3c-sfl") return Algo::A3cSfl;
  if (id == "grad-afl") return Algo::GradAfl;
  if (id == "afl-select") return Algo::AflSelect;
  if (id == "afl-random") return Algo::AflRandom;
  if (id == "sfl-select") return Algo::SflSelect;
  throw InvalidConfig("unknown algorithm '" + id +
                      "' (expected a3c-afl, a3c-sfl, grad-afl, afl-select, "
                      "afl-random, sfl-select)");
}

std::string to_string(Algo algo) {
  switch (algo) {
    case Algo::A3cAfl: return "a3c-afl";
    case Algo::A3cSfl: return "a3c-sfl";
    case Algo::GradAfl: return "grad-afl";
    case Algo::AflSelect: return "afl-select";
    case Algo::AflRandom: return "afl-random";
    case Algo::SflSelect: return "sfl-select";
  }
  return "unknown";
}

FLMode mode_of(Algo algo) {
  return algo == Algo::A3cSfl || algo == Algo::SflSelect ? FLMode::Sync : FLMode::Async;
}

bool uses_policy(Algo algo) { return algo == Algo::A3cAfl || algo == Algo::A3cSfl; }

std::unique_ptr<Scheduler> make_baseline(Algo algo, const SimConfig& config) {
  switch (algo) {
    case Algo::AflSelect:
    case Algo::SflSelect: return std::make_unique<TopKScheduler>(config.select_k);
    case Algo::AflRandom: return std::make_unique<RandomScheduler>(config.select_k);
    case Algo::GradAfl: return std::make_unique<GradientScheduler>(config.select_k);
    default: break;
  }
  throw InvalidConfig(to_string(algo) + " needs a trained policy");
}

PolicyScheduler::PolicyScheduler(const TrainedPolicy& policy, bool greedy,
                                 std::size_t min_selected)
    : policy_(policy), greedy_(greedy), min_selected_(min_selected) {}

std::vector<a3c::SchedulingAction> PolicyScheduler::decide(const FLEnv& env, Rng& rng) {
  const auto& snap = env.observe();
  const auto heads = a3c::head_settings(policy_.encoding, env, snap, min_selected_);
  auto decisions = a3c::act(policy_.actor, heads, policy_.encoding, snap, rng, greedy_);
  std::vector<a3c::SchedulingAction> out;
  for (auto& d : decisions) out.push_back(std::move(d.action));
  return out;
}

a3c::EncodingLayout encoding_for(const SimConfig& config) {
  return {config.state_slots, config.radio.num_subchannels};
}

a3c::EnvFactory env_factory(const SimConfig& config, FLMode mode) {
  return [config, mode](std::size_t worker) -> std::unique_ptr<a3c::SchedulingEnv> {
    return build_env(config, derive_seed(config.seed, 0x3a7, worker), mode);
  };
}

TrainOutput train_policy(const SimConfig& config) {
  const auto encoding = encoding_for(config);
  auto result = a3c::train(env_factory(config), encoding, config.rl);
  TrainOutput out;
  out.policy.encoding = encoding;
  out.policy.actor = policy::DenseNet(result.store->actor_sizes);
  out.policy.critic = policy::DenseNet(result.store->critic_sizes);
  out.policy.actor.set_params(result.store->actor.snapshot());
  out.policy.critic.set_params(result.store->critic.snapshot());
  out.episodes = std::move(result.episodes);
  out.clipped_updates = result.clipped_updates;
  out.updates = result.store->counter.load();
  return out;
}

void save_policy(const std::filesystem::path& path, const TrainedPolicy& policy) {
  std::vector<CheckpointBlock> blocks;
  blocks.push_back({"encoding",
                    ModelParams({static_cast<double>(policy.encoding.slots),
                                 static_cast<double>(policy.encoding.subchannels)},
                                {2})});
  blocks.push_back({"actor_sizes", size_block(policy.actor.sizes())});
  blocks.push_back({"actor", policy.actor.params()});
  blocks.push_back({"critic_sizes", size_block(policy.critic.sizes())});
  blocks.push_back({"critic", policy.critic.params()});
  save_checkpoint(path, blocks);
}

TrainedPolicy load_policy(const std::filesystem::path& path) {
  const auto blocks = load_checkpoint(path);
  auto find = [&](const std::string& name) -> const ModelParams& {
    for (const auto& b : blocks) {
      if (b.name == name) return b.params;
    }
    throw FormatError("checkpoint " + path.string() + " lacks block '" + name + "'");
  };
  TrainedPolicy p;
  const auto& enc = find("encoding").values;
  if (enc.size() != 2) throw FormatError("checkpoint: bad encoding block");
  p.encoding = {static_cast<std::size_t>(enc[0]), static_cast<std::size_t>(enc[1])};
  p.actor = policy::DenseNet(sizes_of(find("actor_sizes")));
  p.actor.set_params(find("actor"));
  p.critic = policy::DenseNet(sizes_of(find("critic_sizes")));
  p.critic.set_params(find("critic"));
  if (p.actor.input_size() != p.encoding.size()) {
    throw FormatError("checkpoint: actor input does not match its encoding");
  }
  return p;
}

std::vector<RoundMetrics> run_fl(const SimConfig& config, std::uint64_t seed,
                                 Scheduler& scheduler, FLMode mode, std::size_t rounds) {
  std::vector<RoundMetrics> out;
  if (rounds == 0) return out;
  auto env = build_env(config, seed, mode);
  env->set_horizon(rounds);
  env->set_track_accuracy(true);
  Rng rng = make_rng(seed, 0xba5e);
  while (!env->done()) {
    const auto actions = scheduler.decide(*env, rng);
    env->step(actions);
    out.push_back(env->last_metrics());
  }
  return out;
}

ExperimentOutput run_experiment(const SimConfig& config, Algo algo,
                                std::span<const std::uint64_t> seeds,
                                const std::optional<std::filesystem::path>& out_dir,
                                const TrainedPolicy* policy,
                                std::optional<std::size_t> rounds) {
  config.validate();
  const std::size_t r = rounds.value_or(config.fl.max_rounds);
  ExperimentOutput out;
  if (out_dir) std::filesystem::create_directories(*out_dir);
  for (std::uint64_t seed : seeds) {
    std::vector<RoundMetrics> run;
    if (uses_policy(algo)) {
      std::optional<TrainedPolicy> trained;
      if (!policy) {
        SimConfig c = config;
        c.seed = seed;
        c.rl.seed = seed;
        trained = train_policy(c).policy;
      }
      PolicyScheduler sched(policy ? *policy : *trained, config.eval_greedy,
                            config.rl.min_selected);
      run = run_fl(config, seed, sched, mode_of(algo), r);
    } else {
      auto sched = make_baseline(algo, config);
      run = run_fl(config, seed, *sched, mode_of(algo), r);
    }
    if (out_dir) {
      save_round_metrics_csv(*out_dir / (to_string(algo) + "_seed" + std::to_string(seed) + ".csv"),
                             run);
    }
    out.runs.push_back(std::move(run));
  }
  out.summary = summarize_runs(to_string(algo), seeds, out.runs);
  if (out_dir) {
    std::ofstream f(*out_dir / (to_string(algo) + "_summary.json"));
    if (!f) throw FormatError("cannot write summary in " + out_dir->string());
    f << out.summary.dump(2) << '\n';
  }
  return out;
}

std::optional<TargetHit> time_to_accuracy(std::span<const RoundMetrics> run, double target) {
  for (std::size_t i = 0; i < run.size(); ++i) {
    if (run[i].accuracy >= target) return TargetHit{i + 1, run[i].cumulative_time};
  }
  return std::nullopt;
}

}  // namespace uavfl::harness
