#include <algorithm>
#include <cmath>
#include <numeric>

#include "uavfl/errors.hpp"
#include "uavfl/fedcore.hpp"

namespace uavfl::fedcore {

void FLConfig::validate() const {
  if (!(eta > 0.0)) throw InvalidConfig("fl: eta must be positive");
  if (local_iters == 0) throw InvalidConfig("fl: local_iters must be >= 1");
  if (max_rounds == 0) throw InvalidConfig("fl: max_rounds must be >= 1");
  if (afl_quorum && *afl_quorum == 0) {
    throw InvalidConfig("fl: afl_quorum must be >= 1");
  }
  if (!(quorum_fraction > 0.0 && quorum_fraction <= 1.0)) {
    throw InvalidConfig("fl: quorum_fraction must be in (0, 1]");
  }
  if (!(epsilon > 0.0)) throw InvalidConfig("fl: epsilon must be positive");
  if (!(staleness_decay > 0.0 && staleness_decay <= 1.0)) {
    throw InvalidConfig("fl: staleness_decay must be in (0, 1]");
  }
}

std::size_t FLConfig::quorum_for(std::size_t selected) const {
  if (selected == 0) return 0;
  std::size_t q = afl_quorum.value_or(static_cast<std::size_t>(
      std::ceil(quorum_fraction * static_cast<double>(selected) - 1e-9)));
  return std::clamp<std::size_t>(q, 1, selected);
}

namespace {

struct Trained {
  std::size_t device_id;
  double round_time;
  double samples;
  ModelParams params;
};

// Trains every job from the current global model, in ascending device id.
std::vector<Trained> train_all(const ServerState& server,
                               const Classifier& model,
                               std::span<const DeviceJob> jobs,
                               const FLConfig& config,
                               std::vector<double>& round_times) {
  if (jobs.empty()) throw EmptySelection("round: no devices selected");
  std::vector<std::size_t> order(jobs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return jobs[a].device_id < jobs[b].device_id;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (jobs[order[i]].device_id == jobs[order[i - 1]].device_id) {
      throw InvalidConfig("round: device selected twice");
    }
  }
  round_times.clear();
  for (const auto& job : jobs) round_times.push_back(job.round_time);

  std::vector<Trained> out;
  out.reserve(jobs.size());
  for (std::size_t idx : order) {
    const DeviceJob& job = jobs[idx];
    if (job.data == nullptr || job.data->empty()) {
      throw EmptyDataset("round: device " + std::to_string(job.device_id) +
                         " has no data");
    }
    Rng rng = make_rng(server.seed, server.round, job.device_id);
    out.push_back({job.device_id, job.round_time,
                   static_cast<double>(job.data->size()),
                   local_train(model, server.global, *job.data, config.eta,
                               config.local_iters, rng)});
  }
  return out;
}

}  // namespace

RoundReport run_sfl_round(ServerState& server, const Classifier& model,
                          std::span<const DeviceJob> jobs,
                          const FLConfig& config) {
  RoundReport report;
  report.round = server.round;
  auto trained = train_all(server, model, jobs, config, report.round_times);

  std::vector<Contribution> contrib;
  for (const auto& t : trained) {
    contrib.push_back({&t.params, t.samples});
    report.responders.push_back(t.device_id);
    report.round_latency = std::max(report.round_latency, t.round_time);
  }
  server.global = aggregate(contrib);
  server.pending.clear();
  ++server.round;
  return report;
}

RoundReport run_afl_round(ServerState& server, const Classifier& model,
                          std::span<const DeviceJob> jobs,
                          const FLConfig& config) {
  RoundReport report;
  report.round = server.round;
  auto trained = train_all(server, model, jobs, config, report.round_times);

  std::vector<std::size_t> by_time(trained.size());
  std::iota(by_time.begin(), by_time.end(), 0);
  std::sort(by_time.begin(), by_time.end(), [&](std::size_t a, std::size_t b) {
    if (trained[a].round_time != trained[b].round_time) {
      return trained[a].round_time < trained[b].round_time;
    }
    return trained[a].device_id < trained[b].device_id;
  });
  const std::size_t quorum = config.quorum_for(trained.size());
  report.round_latency = trained[by_time[quorum - 1]].round_time;

  std::vector<bool> responded(trained.size(), false);
  for (std::size_t i = 0; i < quorum; ++i) responded[by_time[i]] = true;

  struct Entry {
    std::size_t device_id;
    const ModelParams* params;
    double weight;
  };
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < trained.size(); ++i) {
    if (!responded[i]) continue;
    entries.push_back({trained[i].device_id, &trained[i].params,
                       trained[i].samples});
    report.responders.push_back(trained[i].device_id);
  }
  for (const auto& p : server.pending) {
    const double decay =
        std::pow(config.staleness_decay, static_cast<double>(p.staleness));
    entries.push_back({p.device_id, &p.params, p.sample_count * decay});
    report.folded_pending.push_back(p.device_id);
  }
  // Stable: a reselected straggler's fresh update precedes its stale one.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.device_id < b.device_id; });

  std::vector<Contribution> contrib;
  contrib.reserve(entries.size());
  for (const auto& e : entries) contrib.push_back({e.params, e.weight});
  ModelParams next = aggregate(contrib);

  std::vector<PendingUpdate> pending;
  for (std::size_t i = 0; i < trained.size(); ++i) {
    if (responded[i]) continue;
    report.stragglers.push_back(trained[i].device_id);
    pending.push_back({trained[i].device_id, std::move(trained[i].params),
                       trained[i].samples, 1});
  }
  server.global = std::move(next);
  server.pending = std::move(pending);
  ++server.round;
  return report;
}

}  // namespace uavfl::fedcore
