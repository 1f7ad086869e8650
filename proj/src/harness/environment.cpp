#include "uavfl/harness/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uavfl/errors.hpp"

namespace uavfl::harness {
namespace {

// Floor keeping a squashed power draw from producing a zero downlink rate.
constexpr double kMinDownlinkPowerW = 1e-9;

std::size_t samples_for(double bits, const DataConfig& d) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(bits / d.bits_per_sample)));
}

}  // namespace

std::vector<channel::Position3D> grid_positions(const SimConfig& c) {
  const auto n = c.num_uavs;
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  const std::size_t rows = (n + cols - 1) / cols;
  std::vector<channel::Position3D> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = i / cols;
    const std::size_t col = i % cols;
    const std::size_t in_row = r + 1 < rows ? cols : n - r * cols;
    out.push_back({c.area_x * (static_cast<double>(col) + 0.5) / static_cast<double>(in_row),
                   c.area_y * (static_cast<double>(r) + 0.5) / static_cast<double>(rows),
                   c.uav_height});
  }
  return out;
}

FLEnv::FLEnv(const SimConfig& config, FLMode mode, std::uint64_t seed)
    : config_(config),
      mode_(mode),
      task_(config.data.classes, config.data.features, config.data.separation,
            config.data.task_seed),
      model_(config.data.features, config.data.classes, config.data.hidden) {
  config_.validate();
  Rng eval_rng = make_rng(config.data.task_seed, 0xe7a1);
  eval_ = task_.balanced(config.data.eval_per_class, eval_rng);
  reset(seed);
}

channel::Geometry FLEnv::geometry() const {
  channel::Geometry g;
  g.uavs = uavs_;
  g.devices.reserve(devices_.size());
  for (const auto& d : devices_) g.devices.push_back(d.pos);
  return g;
}

void FLEnv::reset(std::uint64_t episode_seed) {
  episode_seed_ = episode_seed;
  slot_ = 0;
  cumulative_time_ = 0.0;
  last_ = RoundMetrics{};
  if (config_.reset_normalizers_per_episode) {
    time_norm_.reset();
    loss_norm_.reset();
  }

  const std::size_t K = config_.num_devices;
  Rng place = make_rng(episode_seed, 1);
  std::uniform_real_distribution<double> ux(0.0, config_.area_x);
  std::uniform_real_distribution<double> uy(0.0, config_.area_y);
  devices_.assign(K, Device{});
  for (auto& d : devices_) d.pos = {ux(place), uy(place)};

  Rng profile = make_rng(episode_seed, 2);
  const auto low_count = static_cast<std::size_t>(
      std::llround(config_.data.low_quality_fraction * static_cast<double>(K)));
  std::vector<std::size_t> ids(K);
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), profile);
  for (std::size_t i = 0; i < low_count; ++i) devices_[ids[i]].low_quality = true;

  const double decile = config_.cpu_min_hz + 0.1 * (config_.cpu_max_hz - config_.cpu_min_hz);
  std::uniform_real_distribution<double> cpu(config_.cpu_min_hz, config_.cpu_max_hz);
  std::uniform_real_distribution<double> slow(config_.cpu_min_hz, decile);
  std::uniform_real_distribution<double> bits(config_.data_bits_min, config_.data_bits_max);
  for (std::size_t k = 0; k < K; ++k) {
    Device& d = devices_[k];
    d.cpu_hz = d.low_quality ? slow(profile) : cpu(profile);
    d.data_bits = bits(profile);
    Rng data_rng = make_rng(episode_seed, 3, k);
    d.data = task_.dirichlet(samples_for(d.data_bits, config_.data),
                             config_.data.dirichlet_alpha, data_rng, k);
    if (d.low_quality) {
      fedcore::corrupt_labels(d.data, config_.data.label_noise, config_.data.classes,
                              data_rng);
    }
  }

  uavs_ = grid_positions(config_);
  anchors_ = uavs_;
  Rng init = make_rng(episode_seed, 4);
  const ModelParams w0 = model_.init(init);
  servers_.assign(config_.num_uavs, fedcore::ServerState{});
  for (std::size_t n = 0; n < servers_.size(); ++n) {
    servers_[n].global = w0;
    servers_[n].seed = derive_seed(episode_seed, 6, n);
  }
  draw_loads();
  rebuild_snapshot();
}

void FLEnv::draw_loads() {
  observed_load_ = load_.size() == devices_.size() && slot_ > 0
                       ? load_
                       : std::vector<double>(devices_.size(), 1.0);
  load_.assign(devices_.size(), 1.0);
  if (config_.cpu_load_min >= 1.0) return;
  Rng rng = make_rng(episode_seed_, 5, slot_);
  std::uniform_real_distribution<double> u(config_.cpu_load_min, 1.0);
  for (auto& l : load_) l = u(rng);
}

void FLEnv::rebuild_snapshot() {
  const channel::GainTable gains(geometry(), config_.radio);
  const std::size_t N = uavs_.size();
  cells_.assign(N, {});
  cell_of_.assign(devices_.size(), -1);
  for (std::size_t k = 0; k < devices_.size(); ++k) {
    std::size_t best = 0;
    for (std::size_t n = 1; n < N; ++n) {
      if (gains.loss_db(n, k) < gains.loss_db(best, k)) best = n;
    }
    cells_[best].push_back(k);
    cell_of_[k] = static_cast<int>(best);
  }

  double samples_max = 1.0;
  for (const auto& d : devices_) samples_max = std::max(samples_max, static_cast<double>(d.data.size()));
  const double max_samples_cfg = static_cast<double>(samples_for(config_.data_bits_max, config_.data));

  snapshot_.area_x = config_.area_x;
  snapshot_.area_y = config_.area_y;
  snapshot_.cpu_max_hz = config_.cpu_max_hz;
  snapshot_.samples_max = std::max(samples_max, max_samples_cfg);
  snapshot_.loss_scale = std::log(static_cast<double>(config_.data.classes));
  snapshot_.slot_fraction =
      std::min(1.0, static_cast<double>(slot_) / static_cast<double>(horizon()));
  snapshot_.cells.assign(N, {});
  for (std::size_t n = 0; n < N; ++n) {
    auto& cell = snapshot_.cells[n];
    cell.uav_x = uavs_[n].x;
    cell.uav_y = uavs_[n].y;
    const double r = config_.uav_move_radius;
    cell.box = {std::max(0.0, anchors_[n].x - r), std::min(config_.area_x, anchors_[n].x + r),
                std::max(0.0, anchors_[n].y - r), std::min(config_.area_y, anchors_[n].y + r),
                anchors_[n].x, anchors_[n].y};
    double pending = 0.0;
    for (std::size_t k : cells_[n]) {
      const Device& d = devices_[k];
      pending += d.remaining_upload > 0.0 ? 1.0 : 0.0;
      cell.devices.push_back({k, d.pos.x, d.pos.y, gains.loss_db(n, k), d.prev_selected,
                              d.prev_subchannel, d.remaining_upload, observed_cpu(k),
                              static_cast<double>(d.data.size()),
                              fedcore::local_loss(model_, servers_[n].global, d.data)});
    }
    cell.remaining_broadcast =
        cells_[n].empty() ? 0.0 : pending / static_cast<double>(cells_[n].size());
  }
}

double FLEnv::accuracy() const {
  double total = 0.0;
  for (const auto& s : servers_) total += fedcore::accuracy(model_, s.global, eval_);
  return total / static_cast<double>(servers_.size());
}

a3c::StepOutcome FLEnv::step(std::span<const a3c::SchedulingAction> actions) {
  const std::size_t N = uavs_.size();
  const std::size_t K = devices_.size();
  const std::size_t M = config_.radio.num_subchannels;
  if (actions.size() != N) {
    throw ShapeMismatch("step: expected one action per UAV");
  }
  if (done()) throw InvalidConfig("step: episode already finished");

  channel::LinkAllocation alloc(N, K, M);
  for (std::size_t n = 0; n < N; ++n) {
    const auto& a = actions[n];
    if (a.devices.size() != a.subchannels.size()) {
      throw LengthMismatch("step: devices and subchannels differ in length");
    }
    const auto& box = snapshot_.cells[n].box;
    uavs_[n].x = std::clamp(a.x, box.x_lo, box.x_hi);
    uavs_[n].y = std::clamp(a.y, box.y_lo, box.y_hi);
    alloc.downlink_power(n) = std::clamp(a.power_w, std::max(kMinDownlinkPowerW, config_.uav_power_min_w),
                                         config_.uav_power_max_w);
    for (std::size_t i = 0; i < a.devices.size(); ++i) {
      if (a.devices[i] >= K || a.subchannels[i] >= M) {
        throw ShapeMismatch("step: device or subchannel index out of range");
      }
      alloc.assign(n, a.devices[i], a.subchannels[i]);
    }
  }
  std::vector<double> device_power(K, config_.device_power_w);
  alloc.split_uplink_power(device_power);

  std::vector<double> cpu_now(K);
  std::vector<double> cpu_cap(K, config_.cpu_max_hz);
  for (std::size_t k = 0; k < K; ++k) cpu_now[k] = effective_cpu(k);
  latency::ConstraintContext ctx;
  ctx.uav_power_max_w = config_.uav_power_max_w;
  ctx.device_power_max_w = device_power;
  ctx.cpu_hz = cpu_now;
  ctx.cpu_max_hz = cpu_cap;
  const std::size_t violations = latency::validate_constraints(alloc, ctx).size();

  const channel::GainTable gains(geometry(), config_.radio);
  const latency::PayloadProfile payload{config_.payload_bits, config_.payload_bits};
  const latency::ComputeProfile server_cpu{config_.uav_cycles_per_sample, config_.uav_cpu_hz};
  const latency::CostWeights weights{config_.lambda};

  RoundMetrics m;
  m.round = slot_;
  m.violations = violations;
  a3c::StepOutcome outcome;
  outcome.rewards.assign(N, 0.0);
  outcome.violations = violations;

  std::vector<double> cell_time(N, 0.0);
  std::vector<double> cell_loss(N, 0.0);
  std::vector<bool> active(N, false);
  for (auto& d : devices_) {
    d.prev_selected = false;
    d.prev_subchannel = -1;
    d.remaining_upload = 0.0;
  }

  for (std::size_t n = 0; n < N; ++n) {
    const auto& a = actions[n];
    if (a.devices.empty()) continue;
    double total_samples = 0.0;
    for (std::size_t k : a.devices) total_samples += static_cast<double>(devices_[k].data.size());
    const double t_glo = latency::global_compute_latency(total_samples, server_cpu);

    std::vector<fedcore::DeviceJob> jobs;
    std::vector<double> times;
    std::vector<double> uploads;
    std::vector<const fedcore::LocalDataset*> selected;
    for (std::size_t i = 0; i < a.devices.size(); ++i) {
      const std::size_t k = a.devices[i];
      const Device& d = devices_[k];
      latency::LatencyBreakdown parts;
      parts.t_loc = latency::local_compute_latency(
          static_cast<double>(d.data.size()),
          {config_.device_cycles_per_sample, cpu_now[k]});
      parts.t_glo = t_glo;
      parts.t_down = latency::broadcast_latency(
          payload, channel::downlink_rate(k, n, gains, alloc, config_.radio));
      parts.t_up = latency::upload_latency(
          payload, channel::uplink_rate(k, gains, alloc, config_.radio));
      const double t = latency::round_time(parts);
      m.mean_t_loc += parts.t_loc;
      m.mean_t_glo += parts.t_glo;
      m.mean_t_down += parts.t_down;
      m.mean_t_up += parts.t_up;
      jobs.push_back({k, &d.data, t});
      times.push_back(t);
      uploads.push_back(parts.t_up);
      selected.push_back(&d.data);
    }
    const fedcore::RoundReport report =
        mode_ == FLMode::Async
            ? fedcore::run_afl_round(servers_[n], model_, jobs, config_.fl)
            : fedcore::run_sfl_round(servers_[n], model_, jobs, config_.fl);

    for (std::size_t i = 0; i < a.devices.size(); ++i) {
      Device& d = devices_[a.devices[i]];
      d.prev_selected = true;
      d.prev_subchannel = static_cast<int>(a.subchannels[i]);
      const double late = times[i] - report.round_latency;
      d.remaining_upload = late > 0.0 ? std::min(1.0, late / uploads[i]) : 0.0;
    }
    active[n] = true;
    cell_time[n] = latency::execution_time_cost(times);
    cell_loss[n] = latency::accuracy_loss_cost(model_, servers_[n].global, selected);
    if (config_.normalizer_window == 0 || time_norm_.count() < config_.normalizer_window) {
      time_norm_.observe(cell_time[n]);
      loss_norm_.observe(cell_loss[n]);
    }
    m.round_latency = std::max(m.round_latency, report.round_latency);
    m.num_selected += a.devices.size();
    m.num_responders += report.responders.size();
    m.responders.insert(m.responders.end(), report.responders.begin(),
                        report.responders.end());
  }

  std::size_t active_cells = 0;
  for (std::size_t n = 0; n < N; ++n) {
    if (!active[n]) {
      // An agent that serves nobody earns the worst normalized cost.
      outcome.rewards[n] = -1.0;
      continue;
    }
    ++active_cells;
    const double tn = time_norm_.normalize(cell_time[n]);
    const double ln = loss_norm_.normalize(cell_loss[n]);
    outcome.rewards[n] = a3c::reward(tn, ln, weights);
    m.c_time += cell_time[n];
    m.c_loss += cell_loss[n];
    m.c_time_norm += tn;
    m.c_loss_norm += ln;
  }
  if (active_cells > 0) {
    const double c = static_cast<double>(active_cells);
    m.c_time /= c;
    m.c_loss /= c;
    m.c_time_norm /= c;
    m.c_loss_norm /= c;
  }
  if (m.num_selected > 0) {
    const double s = static_cast<double>(m.num_selected);
    m.mean_t_loc /= s;
    m.mean_t_glo /= s;
    m.mean_t_down /= s;
    m.mean_t_up /= s;
  }
  m.system_cost = latency::system_cost(m.c_time, m.c_loss, weights);
  m.reward = std::accumulate(outcome.rewards.begin(), outcome.rewards.end(), 0.0) /
             static_cast<double>(N);
  cumulative_time_ += m.round_latency;
  m.cumulative_time = cumulative_time_;
  std::sort(m.responders.begin(), m.responders.end());
  if (track_accuracy_) m.accuracy = accuracy();

  outcome.system_cost = m.system_cost;
  outcome.normalized_cost = latency::system_cost(m.c_time_norm, m.c_loss_norm, weights);
  outcome.time_cost = m.c_time;
  outcome.loss_cost = m.c_loss;
  last_ = std::move(m);

  ++slot_;
  draw_loads();
  rebuild_snapshot();
  return outcome;
}

std::unique_ptr<FLEnv> build_env(const SimConfig& config, std::uint64_t seed,
                                 FLMode mode) {
  return std::make_unique<FLEnv>(config, mode, seed);
}

}  // namespace uavfl::harness
