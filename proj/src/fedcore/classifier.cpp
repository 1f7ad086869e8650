#include <algorithm>
#include <cmath>
#include <vector>

#include "uavfl/errors.hpp"
#include "uavfl/fedcore.hpp"

namespace uavfl::fedcore {
namespace {

// Stable log-sum-exp based cross-entropy; writes softmax probabilities into
// `logits` in place and returns -log p[label].
double softmax_xent(std::span<double> logits, int label) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  const double shifted = logits[static_cast<std::size_t>(label)] - peak;
  double total = 0.0;
  for (auto& z : logits) {
    z = std::exp(z - peak);
    total += z;
  }
  const double log_total = std::log(total);
  const double loss = log_total - shifted;
  for (auto& z : logits) z /= total;
  return loss;
}

void affine(const double* w, const double* b, std::size_t rows,
            std::size_t cols, std::span<const double> x, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = w + r * cols;
    double acc = b[r];
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    out[r] = acc;
  }
}

}  // namespace

Classifier::Classifier(std::size_t num_features, std::size_t num_classes,
                       std::size_t hidden)
    : features_(num_features), classes_(num_classes), hidden_(hidden) {
  if (num_features == 0 || num_classes < 2) {
    throw InvalidConfig("classifier needs >= 1 feature and >= 2 classes");
  }
}

std::size_t Classifier::num_params() const {
  if (hidden_ == 0) return classes_ * features_ + classes_;
  return hidden_ * features_ + hidden_ + classes_ * hidden_ + classes_;
}

std::vector<std::size_t> Classifier::shape() const {
  if (hidden_ == 0) return {features_, classes_};
  return {features_, hidden_, classes_};
}

ModelParams Classifier::zeros() const {
  return ModelParams(std::vector<double>(num_params(), 0.0), shape());
}

ModelParams Classifier::init(Rng& rng) const {
  ModelParams p = zeros();
  auto fill = [&](std::size_t offset, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) p.values[offset + i] = u(rng);
  };
  if (hidden_ == 0) {
    fill(0, features_, classes_);
  } else {
    fill(0, features_, hidden_);
    fill(hidden_ * features_ + hidden_, hidden_, classes_);
  }
  return p;
}

void Classifier::check(const ModelParams& params) const {
  if (params.values.size() != num_params() || params.shape != shape()) {
    throw ShapeMismatch("classifier: parameter vector does not match model");
  }
}

void Classifier::logits(const ModelParams& params, std::span<const double> x,
                        std::span<double> out) const {
  if (x.size() != features_ || out.size() != classes_) {
    throw ShapeMismatch("classifier: input or output size mismatch");
  }
  const double* w = params.values.data();
  if (hidden_ == 0) {
    affine(w, w + classes_ * features_, classes_, features_, x, out.data());
    return;
  }
  std::vector<double> h(hidden_);
  affine(w, w + hidden_ * features_, hidden_, features_, x, h.data());
  for (auto& v : h) v = std::tanh(v);
  const double* w2 = w + hidden_ * features_ + hidden_;
  affine(w2, w2 + classes_ * hidden_, classes_, hidden_, h, out.data());
}

int Classifier::predict(const ModelParams& params,
                        std::span<const double> x) const {
  std::vector<double> z(classes_);
  logits(params, x, z);
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

double Classifier::sample_loss(const ModelParams& params,
                               std::span<const double> x, int label) const {
  std::vector<double> z(classes_);
  logits(params, x, z);
  return softmax_xent(z, label);
}

double Classifier::loss_and_grad(const ModelParams& params,
                                 std::span<const double> x, int label,
                                 std::span<double> grad) const {
  if (grad.size() != num_params()) {
    throw ShapeMismatch("classifier: gradient buffer size mismatch");
  }
  const double* w = params.values.data();
  std::vector<double> z(classes_);
  if (hidden_ == 0) {
    affine(w, w + classes_ * features_, classes_, features_, x, z.data());
    const double loss = softmax_xent(z, label);
    z[static_cast<std::size_t>(label)] -= 1.0;  // dL/dlogits
    double* gw = grad.data();
    double* gb = gw + classes_ * features_;
    for (std::size_t c = 0; c < classes_; ++c) {
      for (std::size_t j = 0; j < features_; ++j) gw[c * features_ + j] += z[c] * x[j];
      gb[c] += z[c];
    }
    return loss;
  }

  std::vector<double> h(hidden_);
  affine(w, w + hidden_ * features_, hidden_, features_, x, h.data());
  for (auto& v : h) v = std::tanh(v);
  const double* w2 = w + hidden_ * features_ + hidden_;
  affine(w2, w2 + classes_ * hidden_, classes_, hidden_, h, z.data());
  const double loss = softmax_xent(z, label);
  z[static_cast<std::size_t>(label)] -= 1.0;

  double* g1 = grad.data();
  double* gb1 = g1 + hidden_ * features_;
  double* g2 = gb1 + hidden_;
  double* gb2 = g2 + classes_ * hidden_;
  std::vector<double> dh(hidden_, 0.0);
  for (std::size_t c = 0; c < classes_; ++c) {
    for (std::size_t j = 0; j < hidden_; ++j) {
      g2[c * hidden_ + j] += z[c] * h[j];
      dh[j] += z[c] * w2[c * hidden_ + j];
    }
    gb2[c] += z[c];
  }
  for (std::size_t j = 0; j < hidden_; ++j) {
    const double dpre = dh[j] * (1.0 - h[j] * h[j]);
    for (std::size_t i = 0; i < features_; ++i) g1[j * features_ + i] += dpre * x[i];
    gb1[j] += dpre;
  }
  return loss;
}

}  // namespace uavfl::fedcore
