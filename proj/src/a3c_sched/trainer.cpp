#include <exception>
#include <iostream>
#include <mutex>
#include <thread>

#include "uavfl/a3c_sched.hpp"
#include "uavfl/errors.hpp"

namespace uavfl::a3c {
namespace {

constexpr double kOutputScale = 0.01;

policy::Matrix stack(const std::vector<PolicyDecision>& decisions, std::size_t rows) {
  policy::Matrix x(static_cast<Eigen::Index>(rows),
                   static_cast<Eigen::Index>(decisions.size()));
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    x.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(
        decisions[i].state.features.data(), static_cast<Eigen::Index>(rows));
  }
  return x;
}

std::vector<double> critic_values(const policy::DenseNet& critic,
                                  const EncodingLayout& encoding,
                                  const NetworkSnapshot& snapshot) {
  const std::size_t cells = snapshot.cells.size();
  policy::Matrix x(static_cast<Eigen::Index>(encoding.size()),
                   static_cast<Eigen::Index>(cells));
  for (std::size_t n = 0; n < cells; ++n) {
    const auto enc = encode_state(snapshot, n, encoding);
    x.col(static_cast<Eigen::Index>(n)) = Eigen::Map<const Eigen::VectorXd>(
        enc.features.data(), static_cast<Eigen::Index>(enc.features.size()));
  }
  const policy::Matrix v = critic.forward(x);
  return {v.data(), v.data() + v.size()};
}

// Mean discounted return over every step of one episode of `actor`.
double probe_return(const EnvFactory& factory, const policy::DenseNet& actor,
                    const EncodingLayout& encoding, const TrainConfig& config) {
  auto env = factory(0);
  env->reset(derive_seed(config.seed, 0xca1));
  Rng rng = make_rng(config.seed, 0xca1);
  const HeadSettings heads = head_settings(encoding, *env, env->observe(), config.min_selected);
  std::vector<std::vector<double>> rewards(env->num_agents());
  while (!env->done()) {
    std::vector<SchedulingAction> actions;
    for (auto& d : act(actor, heads, encoding, env->observe(), rng, false)) {
      actions.push_back(std::move(d.action));
    }
    const StepOutcome outcome = env->step(actions);
    for (std::size_t n = 0; n < rewards.size(); ++n) rewards[n].push_back(outcome.rewards.at(n));
  }
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& r : rewards) {
    for (double u : n_step_returns(r, config.gamma, std::nullopt)) {
      total += u;
      ++count;
    }
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

}  // namespace

HeadSettings head_settings(const EncodingLayout& encoding,
                           const SchedulingEnv& env,
                           const NetworkSnapshot& /*snapshot*/,
                           std::size_t min_selected) {
  HeadSettings h;
  h.layout = {encoding.slots, encoding.subchannels};
  h.power_min = env.power_min_w();
  h.power_max = env.power_max_w();
  h.max_selected = encoding.subchannels;
  h.min_selected = min_selected;
  return h;
}

std::vector<PolicyDecision> act(const policy::DenseNet& actor,
                                const HeadSettings& heads,
                                const EncodingLayout& encoding,
                                const NetworkSnapshot& snapshot, Rng& rng,
                                bool greedy) {
  std::vector<PolicyDecision> out(snapshot.cells.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n].state = encode_state(snapshot, n, encoding);
  }
  const policy::Matrix logits = actor.forward(stack(out, encoding.size()));
  for (std::size_t n = 0; n < out.size(); ++n) {
    Step probe;
    probe.present = out[n].state.present;
    probe.box = snapshot.cells[n].box;
    const auto col = static_cast<Eigen::Index>(n);
    std::span<const double> o(logits.data() + col * logits.rows(),
                              static_cast<std::size_t>(logits.rows()));
    out[n].sampled = policy::sample_action(heads.layout, o, heads.context(probe),
                                           rng, greedy);
    out[n].action = to_scheduling_action(out[n].sampled, out[n].state);
  }
  return out;
}

TrainResult train(const EnvFactory& factory, const EncodingLayout& encoding,
                  const TrainConfig& config) {
  for (const auto& w : config.validate()) std::clog << "warning: " << w << '\n';

  std::vector<std::size_t> actor_sizes{encoding.size()};
  actor_sizes.insert(actor_sizes.end(), config.actor_hidden.begin(),
                     config.actor_hidden.end());
  actor_sizes.push_back(policy::HeadLayout{encoding.slots, encoding.subchannels}.size());
  std::vector<std::size_t> critic_sizes{encoding.size()};
  critic_sizes.insert(critic_sizes.end(), config.critic_hidden.begin(),
                      config.critic_hidden.end());
  critic_sizes.push_back(1);

  Rng init_rng = make_rng(config.seed, 0xa3c);
  policy::DenseNet actor(actor_sizes);
  policy::DenseNet critic(critic_sizes);
  actor.init(init_rng);
  critic.init(init_rng);
  policy::init_heads({encoding.slots, encoding.subchannels}, actor, kOutputScale,
                     config.init_log_std);
  if (config.calibrate_critic) {
    const std::size_t last = critic.sizes().size() - 2;
    for (auto& w : critic.layer_weights(last)) w *= kOutputScale;
    critic.layer_bias(last)[0] = probe_return(factory, actor, encoding, config);
  }

  TrainResult result;
  result.store = std::make_unique<GlobalStore>(std::move(actor), std::move(critic), config);
  result.episodes.resize(config.episodes);
  GlobalStore& store = *result.store;

  std::atomic<std::size_t> next_episode{0};
  std::atomic<std::size_t> clipped{0};
  std::atomic<bool> abort{false};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::vector<std::uint8_t> completed(config.episodes, 0);

  auto run = [&](std::size_t worker_id) {
    try {
      auto env = factory(worker_id);
      Worker worker = make_worker(store);
      while (!abort.load() && !store.budget_spent()) {
        const std::size_t e = next_episode.fetch_add(1);
        if (e >= config.episodes) break;
        env->reset(derive_seed(config.seed, 0x5eed, e));
        Rng rng = make_rng(config.seed, 0xac7, e);
        const HeadSettings heads =
            head_settings(encoding, *env, env->observe(), config.min_selected);
        const std::size_t agents = env->num_agents();

        EpisodeLog log;
        log.episode = e;
        std::size_t slots = 0;
        while (!env->done() && !store.budget_spent()) {
          sync_worker(store, worker);
          std::vector<Trajectory> trajs(agents);
          for (std::size_t t = 0; t < config.t_max && !env->done(); ++t) {
            const NetworkSnapshot& snap = env->observe();
            auto decisions = act(worker.actor, heads, encoding, snap, rng, false);
            const auto values = critic_values(worker.critic, encoding, snap);
            std::vector<SchedulingAction> actions;
            for (const auto& d : decisions) {
              actions.push_back(d.action);
              log.mean_selected +=
                  static_cast<double>(d.action.devices.size()) / static_cast<double>(agents);
            }
            std::vector<Step> steps(agents);
            for (std::size_t n = 0; n < agents; ++n) {
              steps[n].state = std::move(decisions[n].state.features);
              steps[n].present = std::move(decisions[n].state.present);
              steps[n].box = snap.cells[n].box;
              steps[n].action = std::move(decisions[n].sampled);
              steps[n].value = values[n];
            }
            const StepOutcome outcome = env->step(actions);
            double reward_sum = 0.0;
            for (std::size_t n = 0; n < agents; ++n) {
              steps[n].reward = outcome.rewards.at(n);
              reward_sum += steps[n].reward;
              trajs[n].steps.push_back(std::move(steps[n]));
            }
            log.mean_cost += outcome.system_cost;
            log.mean_normalized_cost += outcome.normalized_cost;
            log.mean_reward += reward_sum / static_cast<double>(agents);
            log.mean_time_cost += outcome.time_cost;
            log.mean_loss_cost += outcome.loss_cost;
            log.constraint_violations += outcome.violations;
            ++slots;
          }

          std::vector<double> bootstrap(agents, 0.0);
          const bool terminal = env->done();
          if (!terminal) bootstrap = critic_values(worker.critic, encoding, env->observe());
          std::vector<const Step*> all;
          std::vector<double> returns;
          std::vector<double> advantages;
          for (std::size_t n = 0; n < agents; ++n) {
            trajs[n].terminal = terminal;
            trajs[n].bootstrap = bootstrap[n];
            const auto u = n_step_returns(trajs[n], config.gamma);
            for (std::size_t t = 0; t < trajs[n].steps.size(); ++t) {
              all.push_back(&trajs[n].steps[t]);
              returns.push_back(u[t]);
              advantages.push_back(u[t] - trajs[n].steps[t].value);
            }
          }
          actor_loss_grad(worker.actor, heads, all, advantages, config.entropy_coef,
                          worker.actor_grad);
          critic_loss_grad(worker.critic, all, returns, worker.critic_grad);
          const bool ca = policy::clip_global_norm(worker.actor_grad, config.grad_clip);
          const bool cc = policy::clip_global_norm(worker.critic_grad, config.grad_clip);
          if (ca || cc) clipped.fetch_add(1);
          apply_async_update(store, worker.actor_grad, worker.critic_grad,
                             config.shared_rms ? nullptr : &worker);
        }
        if (slots > 0) {
          const double s = static_cast<double>(slots);
          log.mean_cost /= s;
          log.mean_normalized_cost /= s;
          log.mean_reward /= s;
          log.mean_time_cost /= s;
          log.mean_loss_cost /= s;
          log.mean_selected /= s;
        }
        result.episodes[e] = log;
        completed[e] = 1;
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      abort.store(true);
    }
  };

  if (config.workers <= 1) {
    run(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < config.workers; ++w) threads.emplace_back(run, w);
    for (auto& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<EpisodeLog> done;
  for (std::size_t e = 0; e < config.episodes; ++e) {
    if (completed[e]) done.push_back(result.episodes[e]);
  }
  result.episodes = std::move(done);
  result.clipped_updates = clipped.load();
  return result;
}

}  // namespace uavfl::a3c
