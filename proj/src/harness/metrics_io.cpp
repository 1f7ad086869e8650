#include "uavfl/harness/metrics_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "uavfl/errors.hpp"

namespace uavfl::harness {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::vector<std::string>& round_metric_columns() {
  static const std::vector<std::string> cols{
      "round",        "c_time",        "c_loss",          "c_time_norm",
      "c_loss_norm",  "system_cost",   "reward",          "accuracy",
      "round_latency", "cumulative_time", "num_selected", "num_responders",
      "mean_t_loc",   "mean_t_up",     "mean_t_down",     "mean_t_glo",
      "violations"};
  return cols;
}

std::vector<double> round_metric_values(const RoundMetrics& m) {
  return {static_cast<double>(m.round),
          m.c_time,
          m.c_loss,
          m.c_time_norm,
          m.c_loss_norm,
          m.system_cost,
          m.reward,
          m.accuracy,
          m.round_latency,
          m.cumulative_time,
          static_cast<double>(m.num_selected),
          static_cast<double>(m.num_responders),
          m.mean_t_loc,
          m.mean_t_up,
          m.mean_t_down,
          m.mean_t_glo,
          static_cast<double>(m.violations)};
}

void write_round_metrics_csv(std::ostream& out, std::span<const RoundMetrics> rows) {
  for (const auto& c : round_metric_columns()) out << c << ',';
  out << "responders\n";
  for (const auto& m : rows) {
    for (double v : round_metric_values(m)) out << format_double(v) << ',';
    for (std::size_t i = 0; i < m.responders.size(); ++i) {
      if (i) out << ';';
      out << m.responders[i];
    }
    out << '\n';
  }
}

void save_round_metrics_csv(const std::filesystem::path& path,
                            std::span<const RoundMetrics> rows) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  write_round_metrics_csv(out, rows);
}

void write_episode_log_csv(std::ostream& out, std::span<const a3c::EpisodeLog> rows) {
  out << "episode,mean_cost,mean_normalized_cost,mean_reward,constraint_violations,mean_time_cost,"
         "mean_loss_cost,mean_selected\n";
  for (const auto& e : rows) {
    out << e.episode << ',' << format_double(e.mean_cost) << ','
        << format_double(e.mean_normalized_cost) << ','
        << format_double(e.mean_reward) << ',' << e.constraint_violations << ','
        << format_double(e.mean_time_cost) << ',' << format_double(e.mean_loss_cost)
        << ',' << format_double(e.mean_selected) << '\n';
  }
}

void save_episode_log_csv(const std::filesystem::path& path,
                          std::span<const a3c::EpisodeLog> rows) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  write_episode_log_csv(out, rows);
}

nlohmann::json summarize_runs(const std::string& algo,
                              std::span<const std::uint64_t> seeds,
                              std::span<const std::vector<RoundMetrics>> runs) {
  std::size_t rounds = runs.empty() ? 0 : runs.front().size();
  for (const auto& r : runs) rounds = std::min(rounds, r.size());
  const auto& cols = round_metric_columns();

  nlohmann::json columns = nlohmann::json::object();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    std::vector<double> mean(rounds, 0.0);
    std::vector<double> sd(rounds, 0.0);
    for (std::size_t t = 0; t < rounds; ++t) {
      double sum = 0.0;
      for (const auto& r : runs) sum += round_metric_values(r[t])[c];
      const double mu = sum / static_cast<double>(runs.size());
      double sq = 0.0;
      for (const auto& r : runs) {
        const double d = round_metric_values(r[t])[c] - mu;
        sq += d * d;
      }
      mean[t] = mu;
      sd[t] = runs.size() > 1 ? std::sqrt(sq / static_cast<double>(runs.size() - 1)) : 0.0;
    }
    columns[cols[c]] = {{"mean", mean}, {"std", sd}};
  }
  return {{"algo", algo},
          {"seeds", std::vector<std::uint64_t>(seeds.begin(), seeds.end())},
          {"rounds", rounds},
          {"columns", columns}};
}

}  // namespace uavfl::harness
