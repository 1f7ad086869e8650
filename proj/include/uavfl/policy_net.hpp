#pragma once

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <span>
#include <vector>

#include "uavfl/model_params.hpp"
#include "uavfl/rng.hpp"

namespace uavfl::policy {

using Matrix = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Dense network

/// Fully connected net with tanh hidden layers and a linear output layer.
/// Batches are column-major: one sample per column.
///
/// Parameter layout: for each layer l, W_l (out x in, row-major) then b_l.
class DenseNet {
 public:
  DenseNet() = default;
  /// `sizes` = {input, hidden..., output}; at least two entries.
  explicit DenseNet(std::vector<std::size_t> sizes);

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t num_params() const { return params_.size(); }

  ModelParams& params() { return params_; }
  const ModelParams& params() const { return params_; }
  void set_params(const ModelParams& p);

  /// Uniform in +-sqrt(6/(fan_in+fan_out)); biases zero.
  void init(Rng& rng);

  struct Cache {
    std::vector<Matrix> activations;  // input, then each layer's output
  };

  Matrix forward(const Matrix& inputs, Cache* cache = nullptr) const;
  std::vector<double> forward(std::span<const double> input) const;

  /// Accumulates dL/dtheta into `grad` given dL/doutput for the batch cached
  /// by the matching forward call.
  void backward(const Cache& cache, const Matrix& output_grad,
                std::span<double> grad) const;

  /// Multiply-accumulate count of one forward pass.
  std::size_t forward_macs() const;

  /// Views into layer l's weights (row-major) and bias.
  std::span<double> layer_weights(std::size_t l);
  std::span<double> layer_bias(std::size_t l);

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;  // start of W_l in params_
  ModelParams params_;
};

// ---------------------------------------------------------------------------
// Policy heads

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 0.0;

/// Output layout of an actor net for `slots` device slots and `subchannels`
/// choices: [selection logits (S)] [subchannel logits (S x M, slot-major)]
/// [position mean (2)] [position log-std (2)] [power mean] [power log-std].
struct HeadLayout {
  std::size_t slots = 0;
  std::size_t subchannels = 1;

  std::size_t size() const { return slots * (1 + subchannels) + 6; }
  std::size_t selection(std::size_t s) const { return s; }
  std::size_t subchannel(std::size_t s, std::size_t m) const {
    return slots + s * subchannels + m;
  }
  std::size_t pos_mean(std::size_t axis) const {
    return slots * (1 + subchannels) + axis;
  }
  std::size_t pos_log_std(std::size_t axis) const { return pos_mean(2) + axis; }
  std::size_t power_mean() const { return pos_mean(4); }
  std::size_t power_log_std() const { return pos_mean(5); }
};

/// Shrinks the actor's output layer by `output_scale` and sets the log-std
/// biases to `log_std`, so initial actions stay near the current state.
void init_heads(const HeadLayout& layout, DenseNet& actor, double output_scale,
                double log_std);

/// Flight box of one UAV. The position mean is an offset from the anchor,
/// which must lie strictly inside the box.
struct PositionBox {
  double x_lo = 0.0;
  double x_hi = 1.0;
  double y_lo = 0.0;
  double y_hi = 1.0;
  double anchor_x = 0.5;
  double anchor_y = 0.5;
};

struct HeadContext {
  std::span<const std::uint8_t> present;  // one flag per slot
  PositionBox box;
  double power_min = 0.0;
  double power_max = 1.0;
  std::size_t max_selected = 1;
  std::size_t min_selected = 0;
};

struct SampledAction {
  std::vector<std::uint8_t> selected;  // per slot
  std::vector<int> subchannel;         // per slot, -1 when unselected
  std::array<double, 2> pos_u{};       // pre-squash draws
  double power_u = 0.0;
  double x = 0.0;
  double y = 0.0;
  double power = 0.0;
  double log_prob = 0.0;
  double entropy = 0.0;
};

double sigmoid(double z);

/// Draw a feasible action. Selections above `max_selected` are trimmed to the
/// most probable slots, shortfalls below `min_selected` are filled the same
/// way, and subchannels are made distinct greedily in probability order.
/// `log_prob` is evaluated on the executed action. With `greedy`, every
/// component takes its mode.
SampledAction sample_action(const HeadLayout& layout, std::span<const double> out,
                            const HeadContext& ctx, Rng& rng, bool greedy = false);

/// Log density of `action` under the heads, including the squashing
/// correction of the continuous components.
double log_prob(const HeadLayout& layout, std::span<const double> out,
                const HeadContext& ctx, const SampledAction& action);

/// Sum of component entropies; Gaussian components use the pre-squash value.
double entropy(const HeadLayout& layout, std::span<const double> out,
               const HeadContext& ctx);

/// grad += scale * d log_prob / d out.
void log_prob_grad(const HeadLayout& layout, std::span<const double> out,
                   const HeadContext& ctx, const SampledAction& action,
                   double scale, std::span<double> grad);

/// grad += scale * d entropy / d out.
void entropy_grad(const HeadLayout& layout, std::span<const double> out,
                  const HeadContext& ctx, double scale, std::span<double> grad);

/// Density on [0, range] of range * sigmoid(u), u ~ N(mu, exp(log_std)^2).
double squashed_gaussian_density(double y, double range, double mu,
                                 double log_std);

// ---------------------------------------------------------------------------
// RMSProp

struct RmsPropConfig {
  double alpha = 0.99;
  double beta = 1e-3;
  double eps = 1e-8;

  void validate() const;
};

struct RmsPropState {
  std::vector<double> g;
  RmsPropConfig config;
};

/// g <- alpha g + (1 - alpha) d^2;  theta <- theta - beta d / sqrt(g + eps).
/// Throws NonFiniteGradient when `delta` or the result is not finite.
void rmsprop_update(RmsPropState& state, std::span<double> params,
                    std::span<const double> delta);

/// Scales `grad` so its L2 norm is at most `max_norm`. Returns true when it
/// was scaled.
bool clip_global_norm(std::span<double> grad, double max_norm);

enum class SyncMode {
  Locked,   // mutex around snapshot and apply; deterministic with one worker
  Hogwild,  // lock-free elementwise read-modify-write
};

/// Parameters plus the RMSProp accumulator shared by every worker.
class SharedParameters {
 public:
  SharedParameters(ModelParams initial, RmsPropConfig config, SyncMode mode);

  SyncMode mode() const { return mode_; }
  const RmsPropConfig& config() const { return state_.config; }

  /// Copy of the current parameters. Each element is read atomically.
  ModelParams snapshot() const;

  /// RMSProp step with `delta`. When `private_g` is given it replaces the
  /// shared accumulator for this call.
  void apply(std::span<const double> delta,
             std::vector<double>* private_g = nullptr);

  /// Direct access for single-threaded setup and checkpointing.
  ModelParams& params_unsafe() { return params_; }
  const std::vector<double>& accumulator_unsafe() const { return state_.g; }

 private:
  ModelParams params_;
  RmsPropState state_;
  SyncMode mode_;
  mutable std::mutex mutex_;
};

}  // namespace uavfl::policy
