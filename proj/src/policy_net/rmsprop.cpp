#include <atomic>
#include <cmath>

#include "uavfl/errors.hpp"
#include "uavfl/policy_net.hpp"

namespace uavfl::policy {

void RmsPropConfig::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidConfig("rmsprop: alpha must be in [0, 1)");
  if (!(beta > 0.0)) throw InvalidConfig("rmsprop: beta must be positive");
  if (!(eps > 0.0)) throw InvalidConfig("rmsprop: eps must be positive");
}

void rmsprop_update(RmsPropState& state, std::span<double> params,
                    std::span<const double> delta) {
  if (params.size() != delta.size() || state.g.size() != params.size()) {
    throw ShapeMismatch("rmsprop: parameter, gradient and accumulator sizes differ");
  }
  require_finite(delta, "rmsprop gradient");
  const auto& c = state.config;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double d = delta[i];
    const double g = state.g[i] == 0.0 ? d * d : c.alpha * state.g[i] + (1.0 - c.alpha) * d * d;
    state.g[i] = g;
    params[i] -= c.beta * d / std::sqrt(g + c.eps);
  }
  require_finite(params, "rmsprop parameters");
}

bool clip_global_norm(std::span<double> grad, double max_norm) {
  const double norm = l2_norm(grad);
  if (!(norm > max_norm)) return false;
  const double scale = max_norm / norm;
  for (auto& v : grad) v *= scale;
  return true;
}

SharedParameters::SharedParameters(ModelParams initial, RmsPropConfig config,
                                   SyncMode mode)
    : params_(std::move(initial)), mode_(mode) {
  config.validate();
  state_.config = config;
  state_.g.assign(params_.size(), 0.0);
}

ModelParams SharedParameters::snapshot() const {
  if (mode_ == SyncMode::Locked) {
    std::lock_guard lock(mutex_);
    return params_;
  }
  ModelParams copy(std::vector<double>(params_.size()), params_.shape);
  auto& self = const_cast<ModelParams&>(params_);
  for (std::size_t i = 0; i < copy.size(); ++i) {
    copy.values[i] = std::atomic_ref<double>(self.values[i]).load(std::memory_order_relaxed);
  }
  return copy;
}

void SharedParameters::apply(std::span<const double> delta,
                             std::vector<double>* private_g) {
  if (delta.size() != params_.size()) {
    throw ShapeMismatch("shared parameters: gradient size mismatch");
  }
  require_finite(delta, "shared parameter gradient");
  std::vector<double>& g = private_g ? *private_g : state_.g;
  if (g.size() != params_.size()) g.assign(params_.size(), 0.0);

  if (mode_ == SyncMode::Locked) {
    std::lock_guard lock(mutex_);
    RmsPropState view{std::move(g), state_.config};
    try {
      rmsprop_update(view, params_.values, delta);
    } catch (...) {
      g = std::move(view.g);
      throw;
    }
    g = std::move(view.g);
    return;
  }

  const auto& c = state_.config;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const double d = delta[i];
    std::atomic_ref<double> gi(g[i]);
    double old = gi.load(std::memory_order_relaxed);
    double next = 0.0;
    do {
      next = old == 0.0 ? d * d : c.alpha * old + (1.0 - c.alpha) * d * d;
    } while (!gi.compare_exchange_weak(old, next, std::memory_order_relaxed));
    std::atomic_ref<double>(params_.values[i])
        .fetch_sub(c.beta * d / std::sqrt(next + c.eps), std::memory_order_relaxed);
  }
}

}  // namespace uavfl::policy
