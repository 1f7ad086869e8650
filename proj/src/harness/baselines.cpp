#include "uavfl/harness/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uavfl/errors.hpp"

namespace uavfl::harness {
namespace {

double interference_free_rate(double bandwidth, double power, double gain,
                              double noise) {
  return channel::shannon_rate(bandwidth, power * gain / noise);
}

// Power floor for the descent box, as a share of the maximum.
constexpr double kMinPowerShare = 1e-3;

}  // namespace

double predicted_device_time(const FLEnv& env, std::size_t n, std::size_t k) {
  const SimConfig& c = env.config();
  const auto& dev = env.devices()[k];
  const double gain =
      channel::db_to_linear(-channel::path_loss_db(env.uavs()[n], dev.pos, c.radio));
  const latency::PayloadProfile payload{c.payload_bits, c.payload_bits};
  const double rate_down = interference_free_rate(c.radio.bw_downlink_hz, c.uav_power_max_w,
                                                  gain, c.radio.noise_power_w);
  const double rate_up = interference_free_rate(c.radio.subchannel_bw_hz(), c.device_power_w,
                                                gain, c.radio.noise_power_w);
  return latency::local_compute_latency(static_cast<double>(dev.data.size()),
                                        {c.device_cycles_per_sample, env.observed_cpu(k)}) +
         latency::broadcast_latency(payload, rate_down) +
         latency::upload_latency(payload, rate_up);
}

std::vector<std::size_t> baseline_select_topk(const FLEnv& env, std::size_t n,
                                              std::size_t k) {
  const auto& cell = env.cell_devices(n);
  const std::size_t take = std::min(k, cell.size());
  if (take == 0) return {};
  const SimConfig& c = env.config();
  const double per_sample = c.uav_cycles_per_sample / c.uav_cpu_hz;
  // Mean round time over a set S of size `take` is
  //   sum_S (a_j / take + per_sample * |D_j|),
  // so ranking individual scores gives the exact minimizer.
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t dev : cell) {
    const double a = predicted_device_time(env, n, dev);
    const double samples = static_cast<double>(env.devices()[dev].data.size());
    scored.push_back({a / static_cast<double>(take) + per_sample * samples, dev});
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < take; ++i) out.push_back(scored[i].second);
  return out;
}

std::vector<std::size_t> baseline_select_random(const FLEnv& env, std::size_t n,
                                                std::size_t k, Rng& rng) {
  const auto& cell = env.cell_devices(n);
  std::vector<std::size_t> out;
  std::sample(cell.begin(), cell.end(), std::back_inserter(out), k, rng);
  std::sort(out.begin(), out.end());
  return out;
}

a3c::SchedulingAction make_action(const FLEnv& env, std::size_t n,
                                  const std::vector<std::size_t>& devices) {
  if (devices.size() > env.config().radio.num_subchannels) {
    throw InvalidConfig("make_action: more devices than subchannels");
  }
  a3c::SchedulingAction a;
  a.x = env.uavs()[n].x;
  a.y = env.uavs()[n].y;
  a.power_w = env.config().uav_power_max_w;
  a.devices = devices;
  a.subchannels.resize(devices.size());
  std::iota(a.subchannels.begin(), a.subchannels.end(), 0);
  return a;
}

double predicted_time_cost(const FLEnv& env,
                           const std::vector<a3c::SchedulingAction>& actions) {
  const SimConfig& c = env.config();
  const std::size_t N = env.uavs().size();
  const std::size_t K = env.devices().size();
  channel::Geometry geo = env.geometry();
  channel::LinkAllocation alloc(N, K, c.radio.num_subchannels);
  for (std::size_t n = 0; n < N; ++n) {
    geo.uavs[n].x = actions[n].x;
    geo.uavs[n].y = actions[n].y;
    alloc.downlink_power(n) = actions[n].power_w;
    for (std::size_t i = 0; i < actions[n].devices.size(); ++i) {
      alloc.assign(n, actions[n].devices[i], actions[n].subchannels[i]);
    }
  }
  alloc.split_uplink_power(std::vector<double>(K, c.device_power_w));
  const channel::GainTable gains(geo, c.radio);
  const latency::PayloadProfile payload{c.payload_bits, c.payload_bits};
  const latency::ComputeProfile server{c.uav_cycles_per_sample, c.uav_cpu_hz};

  double total = 0.0;
  std::size_t cells = 0;
  for (std::size_t n = 0; n < N; ++n) {
    const auto& a = actions[n];
    if (a.devices.empty()) continue;
    double samples = 0.0;
    for (std::size_t k : a.devices) samples += static_cast<double>(env.devices()[k].data.size());
    std::vector<double> times;
    for (std::size_t k : a.devices) {
      latency::LatencyBreakdown parts;
      parts.t_loc = latency::local_compute_latency(
          static_cast<double>(env.devices()[k].data.size()),
          {c.device_cycles_per_sample, env.observed_cpu(k)});
      parts.t_glo = latency::global_compute_latency(samples, server);
      parts.t_down = latency::broadcast_latency(
          payload, channel::downlink_rate(k, n, gains, alloc, c.radio));
      parts.t_up =
          latency::upload_latency(payload, channel::uplink_rate(k, gains, alloc, c.radio));
      times.push_back(latency::round_time(parts));
    }
    total += latency::execution_time_cost(times);
    ++cells;
  }
  return cells == 0 ? 0.0 : total / static_cast<double>(cells);
}

std::vector<a3c::SchedulingAction> baseline_gradient_scheduler(
    const FLEnv& env, std::size_t k, const GradientSchedulerConfig& config) {
  const SimConfig& c = env.config();
  const std::size_t N = env.uavs().size();
  std::vector<a3c::SchedulingAction> actions;
  for (std::size_t n = 0; n < N; ++n) {
    actions.push_back(make_action(env, n, baseline_select_topk(env, n, k)));
  }

  const std::array<double, 3> scale{c.area_x, c.area_y, c.uav_power_max_w};
  std::vector<double> lower(3 * N);
  std::vector<double> upper(3 * N);
  for (std::size_t n = 0; n < N; ++n) {
    const auto& box = env.observe().cells[n].box;
    lower[3 * n] = box.x_lo / scale[0];
    upper[3 * n] = box.x_hi / scale[0];
    lower[3 * n + 1] = box.y_lo / scale[1];
    upper[3 * n + 1] = box.y_hi / scale[1];
    lower[3 * n + 2] = std::max(kMinPowerShare, c.uav_power_min_w / c.uav_power_max_w);
    upper[3 * n + 2] = 1.0;
  }
  auto decode = [&](const std::vector<double>& z) {
    auto out = actions;
    for (std::size_t n = 0; n < N; ++n) {
      out[n].x = z[3 * n] * scale[0];
      out[n].y = z[3 * n + 1] * scale[1];
      out[n].power_w = z[3 * n + 2] * scale[2];
    }
    return out;
  };
  auto cost = [&](const std::vector<double>& z) { return predicted_time_cost(env, decode(z)); };
  auto project = [&](std::vector<double>& z) {
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::clamp(z[i], lower[i], upper[i]);
  };

  std::vector<double> z(3 * N);
  for (std::size_t n = 0; n < N; ++n) {
    z[3 * n] = actions[n].x / scale[0];
    z[3 * n + 1] = actions[n].y / scale[1];
    z[3 * n + 2] = actions[n].power_w / scale[2];
  }
  project(z);
  double best = cost(z);
  double step = config.initial_step;
  std::vector<double> grad(z.size());
  for (std::size_t it = 0; it < config.iterations; ++it) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      std::vector<double> hi = z;
      std::vector<double> lo = z;
      hi[i] = std::min(upper[i], z[i] + config.fd_step);
      lo[i] = std::max(lower[i], z[i] - config.fd_step);
      grad[i] = hi[i] > lo[i] ? (cost(hi) - cost(lo)) / (hi[i] - lo[i]) : 0.0;
    }
    const double norm = l2_norm(grad);
    if (!(norm > 0.0)) break;
    std::vector<double> candidate = z;
    for (std::size_t i = 0; i < z.size(); ++i) candidate[i] -= step * grad[i] / norm;
    project(candidate);
    const double value = cost(candidate);
    if (value < best) {
      best = value;
      z = std::move(candidate);
    } else {
      step *= config.step_decay;
    }
  }
  return decode(z);
}

}  // namespace uavfl::harness
