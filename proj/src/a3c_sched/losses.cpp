#include "uavfl/a3c_sched.hpp"
#include "uavfl/errors.hpp"

namespace uavfl::a3c {
namespace {

policy::Matrix stack_states(std::span<const Step* const> steps, std::size_t rows) {
  policy::Matrix x(static_cast<Eigen::Index>(rows),
                   static_cast<Eigen::Index>(steps.size()));
  for (std::size_t t = 0; t < steps.size(); ++t) {
    if (steps[t]->state.size() != rows) {
      throw ShapeMismatch("loss: state length does not match network input");
    }
    x.col(static_cast<Eigen::Index>(t)) =
        Eigen::Map<const Eigen::VectorXd>(steps[t]->state.data(),
                                          static_cast<Eigen::Index>(rows));
  }
  return x;
}

}  // namespace

policy::HeadContext HeadSettings::context(const Step& step) const {
  policy::HeadContext ctx;
  ctx.present = step.present;
  ctx.box = step.box;
  ctx.power_min = power_min;
  ctx.power_max = power_max;
  ctx.max_selected = max_selected;
  ctx.min_selected = min_selected;
  return ctx;
}

double actor_loss_grad(const policy::DenseNet& actor, const HeadSettings& heads,
                       std::span<const Step* const> steps,
                       std::span<const double> advantages, double entropy_coef,
                       std::span<double> grad) {
  if (steps.size() != advantages.size()) {
    throw LengthMismatch("actor loss: steps and advantages differ in length");
  }
  if (steps.empty()) return 0.0;
  policy::DenseNet::Cache cache;
  const policy::Matrix out = actor.forward(stack_states(steps, actor.input_size()), &cache);
  policy::Matrix dout = policy::Matrix::Zero(out.rows(), out.cols());
  double objective = 0.0;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const auto col = static_cast<Eigen::Index>(t);
    std::span<const double> o(out.data() + col * out.rows(),
                              static_cast<std::size_t>(out.rows()));
    std::span<double> d(dout.data() + col * dout.rows(),
                        static_cast<std::size_t>(dout.rows()));
    const policy::HeadContext ctx = heads.context(*steps[t]);
    const double a = advantages[t];
    objective += a * policy::log_prob(heads.layout, o, ctx, steps[t]->action);
    policy::log_prob_grad(heads.layout, o, ctx, steps[t]->action, a, d);
    if (entropy_coef != 0.0) {
      objective += entropy_coef * policy::entropy(heads.layout, o, ctx);
      policy::entropy_grad(heads.layout, o, ctx, entropy_coef, d);
    }
  }
  std::vector<double> local(grad.size(), 0.0);
  actor.backward(cache, dout, local);
  require_finite(local, "actor gradient");
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += local[i];
  return objective;
}

double critic_loss_grad(const policy::DenseNet& critic,
                        std::span<const Step* const> steps,
                        std::span<const double> returns, std::span<double> grad) {
  if (steps.size() != returns.size()) {
    throw LengthMismatch("critic loss: steps and returns differ in length");
  }
  if (critic.output_size() != 1) throw ShapeMismatch("critic must output one value");
  if (steps.empty()) return 0.0;
  policy::DenseNet::Cache cache;
  const policy::Matrix v = critic.forward(stack_states(steps, critic.input_size()), &cache);
  policy::Matrix dv(1, v.cols());
  double loss = 0.0;
  for (Eigen::Index t = 0; t < v.cols(); ++t) {
    const double err = returns[static_cast<std::size_t>(t)] - v(0, t);
    loss += err * err;
    dv(0, t) = -2.0 * err;
  }
  std::vector<double> local(grad.size(), 0.0);
  critic.backward(cache, dv, local);
  require_finite(local, "critic gradient");
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += local[i];
  return loss;
}

}  // namespace uavfl::a3c
