#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "uavfl/a3c_sched.hpp"
#include "uavfl/harness/environment.hpp"

namespace uavfl::harness {

/// Numeric columns of the round metrics CSV, in file order. A final
/// `responders` column holds the ';'-joined responder ids.
const std::vector<std::string>& round_metric_columns();

std::vector<double> round_metric_values(const RoundMetrics& m);

void write_round_metrics_csv(std::ostream& out, std::span<const RoundMetrics> rows);
void save_round_metrics_csv(const std::filesystem::path& path,
                            std::span<const RoundMetrics> rows);

/// Columns: episode, mean_cost, mean_normalized_cost, mean_reward, constraint_violations,
/// mean_time_cost, mean_loss_cost, mean_selected.
void write_episode_log_csv(std::ostream& out, std::span<const a3c::EpisodeLog> rows);
void save_episode_log_csv(const std::filesystem::path& path,
                          std::span<const a3c::EpisodeLog> rows);

/// Per-column mean and sample standard deviation across runs, truncated to
/// the shortest run: {"algo", "seeds", "rounds", "columns": {name: {"mean":
/// [...], "std": [...]}}}.
nlohmann::json summarize_runs(const std::string& algo,
                              std::span<const std::uint64_t> seeds,
                              std::span<const std::vector<RoundMetrics>> runs);

/// Formats with 17 significant digits so values round-trip.
std::string format_double(double v);

}  // namespace uavfl::harness
