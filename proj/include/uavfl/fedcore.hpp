#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "uavfl/model_params.hpp"
#include "uavfl/rng.hpp"

namespace uavfl::fedcore {

// ---------------------------------------------------------------------------
// Data

/// Labeled samples held by one device. Features are stored row-major.
struct LocalDataset {
  std::size_t owner = 0;
  std::size_t num_features = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::span<const double> sample(std::size_t i) const {
    return {features.data() + i * num_features, num_features};
  }
  void push_back(std::span<const double> x, int label);
};

/// Gaussian-blob classification task: one isotropic unit-variance cluster per
/// class, centers drawn once from N(0, separation^2 I).
class BlobTask {
 public:
  BlobTask(std::size_t num_classes, std::size_t num_features,
           double separation, std::uint64_t seed);

  std::size_t num_classes() const { return centers_.size(); }
  std::size_t num_features() const { return features_; }

  void draw(int label, Rng& rng, std::vector<double>& out) const;

  /// `per_class` samples of every class, in class order.
  LocalDataset balanced(std::size_t per_class, Rng& rng,
                        std::size_t owner = 0) const;

  /// `count` samples with class proportions drawn from a symmetric
  /// Dirichlet(alpha).
  LocalDataset dirichlet(std::size_t count, double alpha, Rng& rng,
                         std::size_t owner) const;

 private:
  std::size_t features_;
  std::vector<std::vector<double>> centers_;
};

/// Pair-flip noise: with probability `rate` a label y becomes (y + 1) mod C.
/// Returns the number of labels changed.
std::size_t corrupt_labels(LocalDataset& data, double rate,
                           std::size_t num_classes, Rng& rng);

/// Dataset file, CSV with a comment header:
///   # uavfl-dataset v1 samples=<n> features=<f> classes=<c>
///   f0,f1,...,f<f-1>,label
///   <values...>,<label>
void write_dataset_csv(std::ostream& out, const LocalDataset& data,
                       std::size_t num_classes);
LocalDataset read_dataset_csv(std::istream& in, std::size_t* num_classes = nullptr);
void save_dataset(const std::filesystem::path& path, const LocalDataset& data,
                  std::size_t num_classes);
LocalDataset load_dataset(const std::filesystem::path& path,
                          std::size_t* num_classes = nullptr);

// ---------------------------------------------------------------------------
// Models

/// Softmax classifier: multinomial logistic regression when `hidden == 0`,
/// otherwise one tanh hidden layer of that width.
///
/// Parameter layout (row-major): [W1 (h x f), b1 (h)] then
/// [W_out (c x h_or_f), b_out (c)].
class Classifier {
 public:
  Classifier(std::size_t num_features, std::size_t num_classes,
             std::size_t hidden = 0);

  std::size_t num_features() const { return features_; }
  std::size_t num_classes() const { return classes_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t num_params() const;
  std::vector<std::size_t> shape() const;

  ModelParams zeros() const;
  /// Uniform in +-sqrt(6/(fan_in+fan_out)); biases zero.
  ModelParams init(Rng& rng) const;

  void logits(const ModelParams& params, std::span<const double> x,
              std::span<double> out) const;
  int predict(const ModelParams& params, std::span<const double> x) const;

  /// Cross-entropy of one sample.
  double sample_loss(const ModelParams& params, std::span<const double> x,
                     int label) const;

  /// Cross-entropy and its gradient, accumulated into `grad`.
  double loss_and_grad(const ModelParams& params, std::span<const double> x,
                       int label, std::span<double> grad) const;

  void check(const ModelParams& params) const;

 private:
  std::size_t features_;
  std::size_t classes_;
  std::size_t hidden_;
};

/// Mean per-sample loss. Throws EmptyDataset.
double local_loss(const Classifier& model, const ModelParams& params,
                  const LocalDataset& data);

/// Sample-count weighted mean of local losses.
double global_loss(const Classifier& model, const ModelParams& params,
                   std::span<const LocalDataset* const> datasets);

/// Fraction of argmax-correct predictions. Throws EmptyDataset.
double accuracy(const Classifier& model, const ModelParams& params,
                const LocalDataset& data);

/// One step w <- w - eta * grad f(w; s_i, z_i) with i drawn uniformly.
/// Throws NonFiniteGradient when the gradient or result is not finite.
ModelParams local_sgd_step(const Classifier& model, const ModelParams& params,
                           const LocalDataset& data, double eta, Rng& rng);

/// `iterations` successive local SGD steps.
ModelParams local_train(const Classifier& model, const ModelParams& params,
                        const LocalDataset& data, double eta,
                        std::size_t iterations, Rng& rng);

struct Contribution {
  const ModelParams* params = nullptr;
  double sample_count = 0.0;
};

/// Sample-weighted average of contributor parameters. Throws
/// EmptyContribution or ShapeMismatch.
ModelParams aggregate(std::span<const Contribution> locals);

/// True when |F(w) - F*| <= epsilon for the last history entry, with F* the
/// supplied proxy optimum or the best loss seen so far.
bool convergence_check(std::span<const double> loss_history, double epsilon,
                       std::optional<double> optimum = std::nullopt);

// ---------------------------------------------------------------------------
// Round engines

struct FLConfig {
  double eta = 0.05;
  std::size_t local_iters = 10;
  std::size_t max_rounds = 40;
  /// Fixed responder count per asynchronous round; when unset the quorum is
  /// ceil(quorum_fraction * K_n).
  std::optional<std::size_t> afl_quorum;
  double quorum_fraction = 0.6;
  double epsilon = 1e-3;
  /// Weight multiplier applied per round of staleness to retained straggler
  /// updates. 1.0 applies them unchanged.
  double staleness_decay = 1.0;

  void validate() const;
  std::size_t quorum_for(std::size_t selected) const;
};

/// One selected device in a round: its data and its simulated round time.
struct DeviceJob {
  std::size_t device_id = 0;
  const LocalDataset* data = nullptr;
  double round_time = 0.0;
};

struct PendingUpdate {
  std::size_t device_id = 0;
  ModelParams params;
  double sample_count = 0.0;
  std::size_t staleness = 0;
};

/// Global model of one UAV server plus straggler updates retained for the
/// next aggregation.
struct ServerState {
  ModelParams global;
  std::vector<PendingUpdate> pending;
  std::size_t round = 0;
  std::uint64_t seed = 0;
};

struct RoundReport {
  std::size_t round = 0;
  double round_latency = 0.0;
  std::vector<std::size_t> responders;
  std::vector<std::size_t> stragglers;
  std::vector<std::size_t> folded_pending;
  std::vector<double> round_times;  // per selected device, in job order
};

/// Barrier round: every selected device trains from the current global
/// model and all updates are aggregated. Latency is the slowest T_k.
RoundReport run_sfl_round(ServerState& server, const Classifier& model,
                          std::span<const DeviceJob> jobs,
                          const FLConfig& config);

/// Quorum round: the fastest quorum responders plus retained stragglers from
/// the previous round are aggregated; this round's stragglers are retained.
/// Latency is the quorum-th smallest T_k.
RoundReport run_afl_round(ServerState& server, const Classifier& model,
                          std::span<const DeviceJob> jobs,
                          const FLConfig& config);

}  // namespace uavfl::fedcore
