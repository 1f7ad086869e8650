#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "uavfl/channel.hpp"
#include "uavfl/fedcore.hpp"

// Per-round latency terms, the time/loss costs and their weighted sum, and the
// feasibility audit of a link allocation.
namespace uavfl::latency {

struct ComputeProfile {
  double cycles_per_sample = 1.0e6;
  double cpu_hz = 1.0e9;

  void validate() const;
};

struct PayloadProfile {
  double upload_bits = 2.0e5;
  double broadcast_bits = 2.0e5;

  void validate() const;
};

struct CostWeights {
  double lambda = 0.4;

  void validate() const;
};

/// |D| * C / f.
double local_compute_latency(double num_samples, const ComputeProfile& profile);
double global_compute_latency(double total_samples,
                              const ComputeProfile& profile);

/// L_n / R_D. Throws ZeroRate when the rate is not positive.
double broadcast_latency(const PayloadProfile& payload, double rate_down);
/// L_k / R_U. Throws ZeroRate when the rate is not positive.
double upload_latency(const PayloadProfile& payload, double rate_up);

struct LatencyBreakdown {
  double t_loc = 0.0;
  double t_glo = 0.0;
  double t_down = 0.0;
  double t_up = 0.0;
};

/// T_loc + T_glo + T_down + T_up.
double round_time(const LatencyBreakdown& parts);

/// Mean of the per-device round times. Throws EmptySelection.
double execution_time_cost(std::span<const double> round_times);

struct DeviceLoss {
  double samples = 0.0;
  double mean_loss = 0.0;
};

/// Sample-weighted mean of per-device mean losses. Throws EmptySelection.
double accuracy_loss_cost(std::span<const DeviceLoss> devices);

/// Loss of `params` over the union of the selected datasets.
double accuracy_loss_cost(const fedcore::Classifier& model,
                          const ModelParams& params,
                          std::span<const fedcore::LocalDataset* const> selected);

/// lambda * c_time + (1 - lambda) * c_loss.
double system_cost(double time_cost, double loss_cost, const CostWeights& w);

/// Tracks the observed range of a cost term and maps values into [0, 1].
class RunningNormalizer {
 public:
  void observe(double x);
  /// (x - min) / (max - min), clamped to [0, 1]; 0 before the range opens.
  double normalize(double x) const;
  void reset();

  double min() const { return min_; }
  double max() const { return max_; }
  std::size_t count() const { return count_; }

 private:
  double min_ = std::numeric_limits<double>::infinity();
  double max_ = -std::numeric_limits<double>::infinity();
  std::size_t count_ = 0;
};

enum class ConstraintFamily {
  BinaryIndicator,    // rho and chi in {0, 1}; chi only where rho is set
  SingleAssociation,  // each device served by at most one UAV
  SubchannelBudget,   // at most M assignments per cell, one device per subchannel
  TransmitPower,      // 0 <= P_D <= P_max, uplink power only on held subchannels
  CpuFrequency,       // 0 <= f_k <= f_max
};

const char* to_string(ConstraintFamily family);

struct Violation {
  ConstraintFamily family;
  std::string detail;
};

struct ConstraintContext {
  double uav_power_max_w = 0.15;
  /// Optional per-device limits; empty spans skip the corresponding check.
  std::span<const double> device_power_max_w;
  std::span<const double> cpu_hz;
  std::span<const double> cpu_max_hz;
};

std::vector<Violation> validate_constraints(const channel::LinkAllocation& alloc,
                                            const ConstraintContext& context);

}  // namespace uavfl::latency
