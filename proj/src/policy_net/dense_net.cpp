#include <cmath>

#include "uavfl/errors.hpp"
#include "uavfl/policy_net.hpp"

namespace uavfl::policy {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeights = Eigen::Map<const RowMajor>;
using Weights = Eigen::Map<RowMajor>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;
using Vec = Eigen::Map<Eigen::VectorXd>;

}  // namespace

DenseNet::DenseNet(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw InvalidConfig("dense net needs >= 2 layer sizes");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] == 0 || sizes_[l + 1] == 0) {
      throw InvalidConfig("dense net layer sizes must be positive");
    }
    offsets_.push_back(total);
    total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
  params_ = ModelParams(std::vector<double>(total, 0.0), {total});
}

void DenseNet::set_params(const ModelParams& p) {
  if (!p.same_shape(params_)) {
    throw ShapeMismatch("dense net: parameter shape mismatch");
  }
  params_.values = p.values;
}

void DenseNet::init(Rng& rng) {
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> u(-limit, limit);
    double* w = params_.values.data() + offsets_[l];
    for (std::size_t i = 0; i < in * out; ++i) w[i] = u(rng);
    for (std::size_t i = 0; i < out; ++i) w[in * out + i] = 0.0;
  }
}

std::span<double> DenseNet::layer_weights(std::size_t l) {
  if (l + 1 >= sizes_.size()) throw ShapeMismatch("dense net: no layer " + std::to_string(l));
  return {params_.values.data() + offsets_[l], sizes_[l] * sizes_[l + 1]};
}

std::span<double> DenseNet::layer_bias(std::size_t l) {
  if (l + 1 >= sizes_.size()) throw ShapeMismatch("dense net: no layer " + std::to_string(l));
  return {params_.values.data() + offsets_[l] + sizes_[l] * sizes_[l + 1], sizes_[l + 1]};
}

Matrix DenseNet::forward(const Matrix& inputs, Cache* cache) const {
  if (static_cast<std::size_t>(inputs.rows()) != input_size()) {
    throw ShapeMismatch("dense net: input has " + std::to_string(inputs.rows()) +
                        " rows, expected " + std::to_string(input_size()));
  }
  const std::size_t layers = sizes_.size() - 1;
  if (cache) {
    cache->activations.resize(layers + 1);
    cache->activations[0] = inputs;
  }
  Matrix a = inputs;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<Eigen::Index>(sizes_[l]);
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]);
    const double* base = params_.values.data() + offsets_[l];
    ConstWeights w(base, out, in);
    ConstVec b(base + out * in, out);
    Matrix z = w * a;
    z.colwise() += b;
    if (l + 1 < layers) z = z.array().tanh().matrix();
    a = std::move(z);
    if (cache) cache->activations[l + 1] = a;
  }
  return a;
}

std::vector<double> DenseNet::forward(std::span<const double> input) const {
  Matrix x = Eigen::Map<const Eigen::VectorXd>(input.data(),
                                               static_cast<Eigen::Index>(input.size()));
  Matrix y = forward(x);
  return {y.data(), y.data() + y.size()};
}

void DenseNet::backward(const Cache& cache, const Matrix& output_grad,
                        std::span<double> grad) const {
  const std::size_t layers = sizes_.size() - 1;
  if (grad.size() != num_params() || cache.activations.size() != layers + 1 ||
      static_cast<std::size_t>(output_grad.rows()) != output_size() ||
      output_grad.cols() != cache.activations[0].cols()) {
    throw ShapeMismatch("dense net: backward shapes do not match forward cache");
  }
  Matrix delta = output_grad;
  for (std::size_t l = layers; l-- > 0;) {
    const auto in = static_cast<Eigen::Index>(sizes_[l]);
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]);
    const Matrix& a_prev = cache.activations[l];
    Weights gw(grad.data() + offsets_[l], out, in);
    Vec gb(grad.data() + offsets_[l] + out * in, out);
    gw.noalias() += delta * a_prev.transpose();
    gb += delta.rowwise().sum();
    if (l == 0) break;
    ConstWeights w(params_.values.data() + offsets_[l], out, in);
    Matrix back = w.transpose() * delta;
    delta = back.array() * (1.0 - a_prev.array().square());
  }
}

std::size_t DenseNet::forward_macs() const {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) total += sizes_[l] * sizes_[l + 1];
  return total;
}

}  // namespace uavfl::policy
