#include "uavfl/latency_cost.hpp"

#include <algorithm>
#include <cmath>

#include "uavfl/errors.hpp"

namespace uavfl::latency {

void ComputeProfile::validate() const {
  if (!(cycles_per_sample > 0.0) || !(cpu_hz > 0.0)) {
    throw InvalidConfig("compute profile: cycles and frequency must be positive");
  }
}

void PayloadProfile::validate() const {
  if (!(upload_bits > 0.0) || !(broadcast_bits > 0.0)) {
    throw InvalidConfig("payload: sizes must be positive");
  }
}

void CostWeights::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw InvalidConfig("cost weights: lambda must be in [0, 1]");
  }
}

double local_compute_latency(double num_samples, const ComputeProfile& profile) {
  if (!(profile.cpu_hz > 0.0)) throw InvalidConfig("local compute: cpu frequency must be positive");
  return num_samples * profile.cycles_per_sample / profile.cpu_hz;
}

double global_compute_latency(double total_samples,
                              const ComputeProfile& profile) {
  if (!(profile.cpu_hz > 0.0)) throw InvalidConfig("global compute: cpu frequency must be positive");
  return total_samples * profile.cycles_per_sample / profile.cpu_hz;
}

double broadcast_latency(const PayloadProfile& payload, double rate_down) {
  if (!(rate_down > 0.0)) throw ZeroRate("broadcast: downlink rate is zero");
  return payload.broadcast_bits / rate_down;
}

double upload_latency(const PayloadProfile& payload, double rate_up) {
  if (!(rate_up > 0.0)) throw ZeroRate("upload: uplink rate is zero");
  return payload.upload_bits / rate_up;
}

double round_time(const LatencyBreakdown& parts) {
  return parts.t_loc + parts.t_glo + parts.t_down + parts.t_up;
}

double execution_time_cost(std::span<const double> round_times) {
  if (round_times.empty()) throw EmptySelection("time cost: no devices selected");
  double total = 0.0;
  for (double t : round_times) total += t;
  return total / static_cast<double>(round_times.size());
}

double accuracy_loss_cost(std::span<const DeviceLoss> devices) {
  double weighted = 0.0;
  double samples = 0.0;
  for (const auto& d : devices) {
    weighted += d.samples * d.mean_loss;
    samples += d.samples;
  }
  if (devices.empty() || !(samples > 0.0)) {
    throw EmptySelection("loss cost: no selected samples");
  }
  return weighted / samples;
}

double accuracy_loss_cost(const fedcore::Classifier& model,
                          const ModelParams& params,
                          std::span<const fedcore::LocalDataset* const> selected) {
  std::vector<DeviceLoss> parts;
  parts.reserve(selected.size());
  for (const auto* data : selected) {
    if (data == nullptr || data->empty()) continue;
    parts.push_back({static_cast<double>(data->size()),
                     fedcore::local_loss(model, params, *data)});
  }
  return accuracy_loss_cost(parts);
}

double system_cost(double time_cost, double loss_cost, const CostWeights& w) {
  return w.lambda * time_cost + (1.0 - w.lambda) * loss_cost;
}

void RunningNormalizer::observe(double x) {
  min_ = std::min(min_, x);
  max_ = std::max(max_, x);
  ++count_;
}

double RunningNormalizer::normalize(double x) const {
  if (count_ == 0 || !(max_ > min_)) return 0.0;
  return std::clamp((x - min_) / (max_ - min_), 0.0, 1.0);
}

void RunningNormalizer::reset() { *this = RunningNormalizer{}; }

const char* to_string(ConstraintFamily family) {
  switch (family) {
    case ConstraintFamily::BinaryIndicator: return "binary_indicator";
    case ConstraintFamily::SingleAssociation: return "single_association";
    case ConstraintFamily::SubchannelBudget: return "subchannel_budget";
    case ConstraintFamily::TransmitPower: return "transmit_power";
    case ConstraintFamily::CpuFrequency: return "cpu_frequency";
  }
  return "unknown";
}

std::vector<Violation> validate_constraints(const channel::LinkAllocation& alloc,
                                            const ConstraintContext& context) {
  std::vector<Violation> out;
  auto report = [&](ConstraintFamily f, std::string detail) {
    out.push_back({f, std::move(detail)});
  };
  const std::size_t N = alloc.num_uavs();
  const std::size_t K = alloc.num_devices();
  const std::size_t M = alloc.num_subchannels();
  auto where = [](std::size_t n, std::size_t k) {
    return "uav " + std::to_string(n) + " device " + std::to_string(k);
  };

  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t k = 0; k < K; ++k) {
      if (alloc.rho(n, k) > 1) {
        report(ConstraintFamily::BinaryIndicator,
               where(n, k) + ": selection indicator not binary");
      }
      for (std::size_t m = 0; m < M; ++m) {
        const auto c = alloc.chi(n, k, m);
        if (c > 1) {
          report(ConstraintFamily::BinaryIndicator,
                 where(n, k) + ": subchannel indicator not binary");
        } else if (c == 1 && alloc.rho(n, k) == 0) {
          report(ConstraintFamily::BinaryIndicator,
                 where(n, k) + ": subchannel held without selection");
        }
      }
    }
  }

  for (std::size_t k = 0; k < K; ++k) {
    std::size_t serving = 0;
    for (std::size_t n = 0; n < N; ++n) serving += alloc.rho(n, k) != 0;
    if (serving > 1) {
      report(ConstraintFamily::SingleAssociation,
             "device " + std::to_string(k) + " selected by " +
                 std::to_string(serving) + " UAVs");
    }
  }

  for (std::size_t n = 0; n < N; ++n) {
    std::size_t used = 0;
    for (std::size_t m = 0; m < M; ++m) {
      std::size_t holders = 0;
      for (std::size_t k = 0; k < K; ++k) holders += alloc.chi(n, k, m) != 0;
      used += holders;
      if (holders > 1) {
        report(ConstraintFamily::SubchannelBudget,
               "uav " + std::to_string(n) + " subchannel " + std::to_string(m) +
                   " shared by " + std::to_string(holders) + " devices");
      }
    }
    if (used > M) {
      report(ConstraintFamily::SubchannelBudget,
             "uav " + std::to_string(n) + " uses " + std::to_string(used) +
                 " subchannel slots, limit " + std::to_string(M));
    }
  }

  for (std::size_t n = 0; n < N; ++n) {
    const double p = alloc.downlink_power(n);
    if (!(p >= 0.0 && p <= context.uav_power_max_w)) {
      report(ConstraintFamily::TransmitPower,
             "uav " + std::to_string(n) + " downlink power " + std::to_string(p) +
                 " outside [0, " + std::to_string(context.uav_power_max_w) + "]");
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    const int n = alloc.serving_uav(k);
    double total = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      const double p = alloc.uplink_power(k, m);
      const bool held = n >= 0 && alloc.chi(static_cast<std::size_t>(n), k, m) != 0;
      if (p < 0.0 || !std::isfinite(p) || (!held && p != 0.0)) {
        report(ConstraintFamily::TransmitPower,
               "device " + std::to_string(k) + " uplink power on subchannel " +
                   std::to_string(m) + " invalid");
      }
      total += p;
    }
    if (k < context.device_power_max_w.size() &&
        total > context.device_power_max_w[k] * (1.0 + 1e-12)) {
      report(ConstraintFamily::TransmitPower,
             "device " + std::to_string(k) + " uplink power exceeds its budget");
    }
  }

  const std::size_t cpus = std::min(context.cpu_hz.size(), context.cpu_max_hz.size());
  for (std::size_t k = 0; k < cpus; ++k) {
    const double f = context.cpu_hz[k];
    if (!(f >= 0.0 && f <= context.cpu_max_hz[k])) {
      report(ConstraintFamily::CpuFrequency,
             "device " + std::to_string(k) + " cpu frequency out of range");
    }
  }
  return out;
}

}  // namespace uavfl::latency
