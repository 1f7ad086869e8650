#include <algorithm>
#include <sstream>

#include "uavfl/a3c_sched.hpp"
#include "uavfl/errors.hpp"

namespace uavfl::a3c {
namespace {

policy::SyncMode effective_mode(const TrainConfig& c) {
  return c.workers <= 1 ? policy::SyncMode::Locked : c.sync;
}

}  // namespace

std::vector<std::string> TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidConfig("a3c: " + what);
  };
  require(beta_actor > 0.0 && beta_critic > 0.0, "learning rates must be positive");
  require(rms_alpha >= 0.0 && rms_alpha < 1.0, "rms_alpha must be in [0, 1)");
  require(rms_eps > 0.0, "rms_eps must be positive");
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must be in [0, 1]");
  require(entropy_coef >= 0.0, "entropy_coef must be nonnegative");
  require(t_max >= 1, "t_max must be >= 1");
  require(workers >= 1, "workers must be >= 1");
  require(grad_clip > 0.0, "grad_clip must be positive");
  for (auto h : actor_hidden) require(h > 0, "actor hidden sizes must be positive");
  for (auto h : critic_hidden) require(h > 0, "critic hidden sizes must be positive");

  std::vector<std::string> warnings;
  if (beta_actor > beta_critic / 5.0) {
    std::ostringstream msg;
    msg << "actor learning rate " << beta_actor
        << " is not well below the critic's " << beta_critic
        << " (expected beta_actor <= beta_critic / 5)";
    warnings.push_back(msg.str());
  }
  return warnings;
}

GlobalStore::GlobalStore(policy::DenseNet actor_net, policy::DenseNet critic_net,
                         const TrainConfig& config)
    : actor_sizes(actor_net.sizes()),
      critic_sizes(critic_net.sizes()),
      actor(actor_net.params(),
            {config.rms_alpha, config.beta_actor, config.rms_eps},
            effective_mode(config)),
      critic(critic_net.params(),
             {config.rms_alpha, config.beta_critic, config.rms_eps},
             effective_mode(config)),
      max_updates(config.max_updates) {}

Worker make_worker(const GlobalStore& store) {
  Worker w{policy::DenseNet(store.actor_sizes), policy::DenseNet(store.critic_sizes),
           {}, {}, {}, {}};
  sync_worker(store, w);
  return w;
}

void apply_async_update(GlobalStore& store, std::span<const double> actor_grad,
                        std::span<const double> critic_grad, Worker* worker) {
  std::vector<double> descent(actor_grad.size());
  std::transform(actor_grad.begin(), actor_grad.end(), descent.begin(),
                 [](double g) { return -g; });
  store.actor.apply(descent, worker ? &worker->actor_g : nullptr);
  store.critic.apply(critic_grad, worker ? &worker->critic_g : nullptr);
  store.counter.fetch_add(1, std::memory_order_relaxed);
}

void sync_worker(const GlobalStore& store, Worker& worker) {
  worker.actor.set_params(store.actor.snapshot());
  worker.critic.set_params(store.critic.snapshot());
  worker.actor_grad.assign(worker.actor.num_params(), 0.0);
  worker.critic_grad.assign(worker.critic.num_params(), 0.0);
}

}  // namespace uavfl::a3c
