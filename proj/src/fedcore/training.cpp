#include <algorithm>
#include <cmath>
#include <vector>

#include "uavfl/errors.hpp"
#include "uavfl/fedcore.hpp"

namespace uavfl::fedcore {

double local_loss(const Classifier& model, const ModelParams& params,
                  const LocalDataset& data) {
  if (data.empty()) throw EmptyDataset("local_loss: dataset is empty");
  model.check(params);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += model.sample_loss(params, data.sample(i), data.labels[i]);
  }
  return total / static_cast<double>(data.size());
}

double global_loss(const Classifier& model, const ModelParams& params,
                   std::span<const LocalDataset* const> datasets) {
  double weighted = 0.0;
  double samples = 0.0;
  for (const auto* data : datasets) {
    if (data == nullptr || data->empty()) continue;
    const auto n = static_cast<double>(data->size());
    weighted += n * local_loss(model, params, *data);
    samples += n;
  }
  if (samples == 0.0) throw EmptyDataset("global_loss: no samples");
  return weighted / samples;
}

double accuracy(const Classifier& model, const ModelParams& params,
                const LocalDataset& data) {
  if (data.empty()) throw EmptyDataset("accuracy: evaluation set is empty");
  model.check(params);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    correct += model.predict(params, data.sample(i)) == data.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

ModelParams local_sgd_step(const Classifier& model, const ModelParams& params,
                           const LocalDataset& data, double eta, Rng& rng) {
  if (data.empty()) throw EmptyDataset("local_sgd_step: dataset is empty");
  model.check(params);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  const std::size_t i = pick(rng);
  std::vector<double> grad(params.size(), 0.0);
  model.loss_and_grad(params, data.sample(i), data.labels[i], grad);
  require_finite(grad, "local_sgd_step gradient");
  ModelParams next = params;
  for (std::size_t j = 0; j < grad.size(); ++j) next.values[j] -= eta * grad[j];
  require_finite(next.values, "local_sgd_step parameters");
  return next;
}

ModelParams local_train(const Classifier& model, const ModelParams& params,
                        const LocalDataset& data, double eta,
                        std::size_t iterations, Rng& rng) {
  ModelParams w = params;
  for (std::size_t j = 0; j < iterations; ++j) {
    w = local_sgd_step(model, w, data, eta, rng);
  }
  return w;
}

ModelParams aggregate(std::span<const Contribution> locals) {
  if (locals.empty()) throw EmptyContribution("aggregate: no contributors");
  const ModelParams& first = *locals.front().params;
  long double total = 0.0L;
  for (const auto& c : locals) {
    if (c.params == nullptr || !c.params->same_shape(first)) {
      throw ShapeMismatch("aggregate: contributor shapes differ");
    }
    if (!(c.sample_count >= 0.0)) {
      throw EmptyContribution("aggregate: negative sample count");
    }
    total += c.sample_count;
  }
  if (total <= 0.0L) throw EmptyContribution("aggregate: zero total weight");

  // Extended-precision accumulation keeps the result within rounding of the
  // exact weighted mean regardless of contributor order.
  std::vector<long double> acc(first.size(), 0.0L);
  for (const auto& c : locals) {
    const long double w = c.sample_count;
    const auto& v = c.params->values;
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += w * v[j];
  }
  ModelParams out(std::vector<double>(first.size()), first.shape);
  for (std::size_t j = 0; j < acc.size(); ++j) {
    out.values[j] = static_cast<double>(acc[j] / total);
  }
  return out;
}

bool convergence_check(std::span<const double> loss_history, double epsilon,
                       std::optional<double> optimum) {
  if (loss_history.size() < 2) return false;
  const double target = optimum.value_or(
      *std::min_element(loss_history.begin(), loss_history.end()));
  return std::abs(loss_history.back() - target) <= epsilon;
}

}  // namespace uavfl::fedcore
