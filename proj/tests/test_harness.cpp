#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "uavfl/errors.hpp"
#include "uavfl/harness/baselines.hpp"
#include "uavfl/harness/config.hpp"
#include "uavfl/harness/environment.hpp"
#include "uavfl/harness/experiment.hpp"
#include "uavfl/harness/metrics_io.hpp"

using namespace uavfl;
using namespace uavfl::harness;
namespace fs = std::filesystem;

namespace {

SimConfig small_config(std::size_t devices = 40) {
  SimConfig c;
  c.num_devices = devices;
  c.fl.max_rounds = 5;
  c.data.eval_per_class = 20;
  return c;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("uavfl_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<a3c::SchedulingAction> topk_actions(const FLEnv& env, std::size_t k) {
  std::vector<a3c::SchedulingAction> out;
  for (std::size_t n = 0; n < env.num_agents(); ++n) {
    auto sel = baseline_select_topk(env, n, k);
    std::sort(sel.begin(), sel.end());
    out.push_back(make_action(env, n, sel));
  }
  return out;
}

bool write_golden() { return std::getenv("UAVFL_WRITE_GOLDEN") != nullptr; }

// Straight-line air-to-ground gain in linear scale.
double ref_gain(const channel::Position3D& u, const channel::Position2D& d,
                const channel::RadioParams& r) {
  const double dx = u.x - d.x;
  const double dy = u.y - d.y;
  const double dist = std::sqrt(dx * dx + dy * dy + u.h * u.h);
  const double theta = std::asin(u.h / dist) * 180.0 / M_PI;
  const double plos = 1.0 / (1.0 + r.xi1 * std::exp(-r.xi2 * (theta - r.xi1)));
  const double fspl = 20.0 * std::log10(4.0 * M_PI * r.carrier_hz * dist / r.light_speed);
  const double loss = fspl + plos * r.eta_los_db + (1.0 - plos) * r.eta_nlos_db;
  return std::pow(10.0, -loss / 10.0);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(UAVFL_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("placement is seeded") {
  const SimConfig c = small_config();
  const auto a = build_env(c, 5);
  const auto b = build_env(c, 5);
  const auto d = build_env(c, 6);
  bool differs = false;
  for (std::size_t k = 0; k < c.num_devices; ++k) {
    CHECK(a->devices()[k].pos.x == b->devices()[k].pos.x);
    CHECK(a->devices()[k].pos.y == b->devices()[k].pos.y);
    CHECK(a->devices()[k].data.labels == b->devices()[k].data.labels);
    differs |= a->devices()[k].pos.x != d->devices()[k].pos.x;
    CHECK(a->devices()[k].pos.x >= 0.0);
    CHECK(a->devices()[k].pos.x <= c.area_x);
  }
  CHECK(differs);
}

TEST_CASE("grid positions") {
  const auto g = grid_positions(SimConfig{});
  REQUIRE(g.size() == 4);
  const std::vector<std::pair<double, double>> expect{{100, 100}, {300, 100}, {100, 300}, {300, 300}};
  for (std::size_t n = 0; n < 4; ++n) {
    bool found = false;
    for (const auto& [x, y] : expect) found |= g[n].x == x && g[n].y == y;
    CHECK(found);
    CHECK(g[n].h == 150.0);
  }
}

TEST_CASE("golden placement and encoding for seed 42") {
  const SimConfig c = small_config(30);
  const auto env = build_env(c, 42);
  nlohmann::json j;
  for (const auto& d : env->devices()) {
    j["devices"].push_back({format_double(d.pos.x), format_double(d.pos.y),
                            format_double(d.cpu_hz), format_double(d.data_bits),
                            d.low_quality, d.data.size()});
  }
  for (const auto& u : env->uavs()) {
    j["uavs"].push_back({format_double(u.x), format_double(u.y), format_double(u.h)});
  }
  const auto enc = a3c::encode_state(env->observe(), 0, encoding_for(c));
  for (double v : enc.features) j["encoding_cell0"].push_back(format_double(v));

  const fs::path golden = fs::path(UAVFL_TEST_DATA) / "golden_seed42.json";
  if (write_golden()) {
    std::ofstream(golden) << j.dump(1) << '\n';
  }
  std::ifstream in(golden);
  REQUIRE_MESSAGE(in.good(), "missing golden file; rerun with UAVFL_WRITE_GOLDEN=1");
  const auto frozen = nlohmann::json::parse(in);
  CHECK(frozen["devices"] == j["devices"]);
  CHECK(frozen["uavs"] == j["uavs"]);
  CHECK(frozen["encoding_cell0"] == j["encoding_cell0"]);
}

TEST_CASE("every device belongs to its minimum path loss cell") {
  const SimConfig c = small_config();
  const auto env = build_env(c, 3);
  for (std::size_t k = 0; k < c.num_devices; ++k) {
    const int cell = env->cell_of(k);
    REQUIRE(cell >= 0);
    const double own = channel::path_loss_db(env->uavs()[cell], env->devices()[k].pos, c.radio);
    for (std::size_t n = 0; n < c.num_uavs; ++n) {
      CHECK(own <= channel::path_loss_db(env->uavs()[n], env->devices()[k].pos, c.radio));
    }
  }
}

TEST_CASE("environment steps are reproducible") {
  const SimConfig c = small_config();
  auto a = build_env(c, 8);
  auto b = build_env(c, 8);
  for (int t = 0; t < 3; ++t) {
    const auto oa = a->step(topk_actions(*a, 4));
    const auto ob = b->step(topk_actions(*b, 4));
    CHECK(oa.rewards == ob.rewards);
    CHECK(oa.system_cost == ob.system_cost);
    std::stringstream sa, sb;
    write_round_metrics_csv(sa, std::vector<RoundMetrics>{a->last_metrics()});
    write_round_metrics_csv(sb, std::vector<RoundMetrics>{b->last_metrics()});
    CHECK(sa.str() == sb.str());
  }
}

TEST_CASE("one step matches a straight-line recomputation") {
  const SimConfig c = small_config();
  auto env = build_env(c, 9);
  const auto actions = topk_actions(*env, 3);
  std::vector<double> cpu(c.num_devices);
  for (std::size_t k = 0; k < c.num_devices; ++k) cpu[k] = env->effective_cpu(k);
  env->step(actions);
  const auto& m = env->last_metrics();

  const std::size_t N = c.num_uavs;
  const std::size_t M = c.radio.num_subchannels;
  // serving UAV and held subchannels per device
  std::map<std::size_t, std::pair<std::size_t, std::vector<std::size_t>>> held;
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t i = 0; i < actions[n].devices.size(); ++i) {
      auto& h = held[actions[n].devices[i]];
      h.first = n;
      h.second.push_back(actions[n].subchannels[i]);
    }
  }
  const auto& uavs = env->uavs();
  double c_time = 0.0;
  double c_loss = 0.0;
  std::size_t active = 0;
  for (std::size_t n = 0; n < N; ++n) {
    const auto& a = actions[n];
    if (a.devices.empty()) continue;
    ++active;
    double samples = 0.0;
    for (std::size_t k : a.devices) samples += static_cast<double>(env->devices()[k].data.size());
    const double t_glo = samples * c.uav_cycles_per_sample / c.uav_cpu_hz;
    double sum = 0.0;
    for (std::size_t k : a.devices) {
      const auto& dev = env->devices()[k];
      const double p_sub = c.device_power_w / static_cast<double>(held[k].second.size());
      double r_up = 0.0;
      for (std::size_t m_sub : held[k].second) {
        double interf = 0.0;
        for (const auto& [k2, h2] : held) {
          if (k2 == k || h2.first == n) continue;
          if (std::find(h2.second.begin(), h2.second.end(), m_sub) == h2.second.end()) continue;
          const double p2 = c.device_power_w / static_cast<double>(h2.second.size());
          interf += p2 * ref_gain(uavs[n], env->devices()[k2].pos, c.radio);
        }
        const double sinr = p_sub * ref_gain(uavs[n], dev.pos, c.radio) / (interf + c.radio.noise_power_w);
        r_up += c.radio.bw_uplink_hz / static_cast<double>(M) * std::log2(1.0 + sinr);
      }
      double down_interf = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        if (j != n) down_interf += actions[j].power_w * ref_gain(uavs[j], dev.pos, c.radio);
      }
      const double s_down =
          a.power_w * ref_gain(uavs[n], dev.pos, c.radio) / (down_interf + c.radio.noise_power_w);
      const double r_down = c.radio.bw_downlink_hz * std::log2(1.0 + s_down);
      const double t_loc = static_cast<double>(dev.data.size()) * c.device_cycles_per_sample / cpu[k];
      sum += t_loc + t_glo + c.payload_bits / r_down + c.payload_bits / r_up;
    }
    c_time += sum / static_cast<double>(a.devices.size());

    double loss = 0.0;
    for (std::size_t k : a.devices) {
      const auto& data = env->devices()[k].data;
      for (std::size_t i = 0; i < data.size(); ++i) {
        loss += env->model().sample_loss(env->server(n).global, data.sample(i), data.labels[i]);
      }
    }
    c_loss += loss / samples;
  }
  CHECK(m.c_time == doctest::Approx(c_time / active).epsilon(1e-9));
  CHECK(m.c_loss == doctest::Approx(c_loss / active).epsilon(1e-9));
  CHECK(m.violations == 0);
}

TEST_CASE("logged system cost matches its own columns") {
  SimConfig c = small_config();
  c.fl.max_rounds = 8;
  auto sched = make_baseline(Algo::AflRandom, c);
  const auto run = run_fl(c, 4, *sched, FLMode::Async, 8);
  REQUIRE(run.size() == 8);
  double prev = 0.0;
  for (const auto& m : run) {
    CHECK(std::abs(m.system_cost - (c.lambda * m.c_time + (1.0 - c.lambda) * m.c_loss)) <= 1e-9);
    CHECK(m.cumulative_time >= prev);
    prev = m.cumulative_time;
    CHECK(std::isfinite(m.system_cost));
    CHECK(m.accuracy >= 0.0);
    CHECK(m.accuracy <= 1.0);
    CHECK(m.violations == 0);
  }
}

TEST_CASE("with lambda 1 the reward ignores the labels") {
  SimConfig c = small_config();
  c.lambda = 1.0;
  SimConfig noisy = c;
  noisy.data.label_noise = 0.9;
  auto a = build_env(c, 10);
  auto b = build_env(noisy, 10);
  for (int t = 0; t < 3; ++t) {
    const auto oa = a->step(topk_actions(*a, 4));
    const auto ob = b->step(topk_actions(*b, 4));
    CHECK(oa.rewards == ob.rewards);
    CHECK(a->last_metrics().c_loss != b->last_metrics().c_loss);
  }
}

TEST_CASE("top-k selection matches exhaustive enumeration") {
  SimConfig c = small_config(14);
  c.num_uavs = 2;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto env = build_env(c, seed);
    for (std::size_t n = 0; n < c.num_uavs; ++n) {
      const auto& cell = env->cell_devices(n);
      if (cell.empty() || cell.size() > 8) continue;
      CHECK(baseline_select_topk(*env, n, cell.size()).size() == cell.size());
      for (std::size_t k = 1; k <= cell.size(); ++k) {
        auto objective = [&](const std::vector<std::size_t>& s) {
          double total = 0.0;
          double samples = 0.0;
          for (std::size_t dev : s) {
            total += predicted_device_time(*env, n, dev);
            samples += static_cast<double>(env->devices()[dev].data.size());
          }
          return total / static_cast<double>(s.size()) +
                 samples * c.uav_cycles_per_sample / c.uav_cpu_hz;
        };
        double best = INFINITY;
        for (std::uint32_t mask = 0; mask < (1u << cell.size()); ++mask) {
          if (static_cast<std::size_t>(std::popcount(mask)) != k) continue;
          std::vector<std::size_t> s;
          for (std::size_t i = 0; i < cell.size(); ++i) {
            if (mask >> i & 1u) s.push_back(cell[i]);
          }
          best = std::min(best, objective(s));
        }
        const auto pick = baseline_select_topk(*env, n, k);
        CHECK(pick.size() == k);
        CHECK(objective(pick) == doctest::Approx(best).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("top-k prefers the faster cpu") {
  SimConfig c = small_config(2);
  c.num_uavs = 1;
  c.cpu_load_min = 1.0;
  c.data_bits_min = c.data_bits_max = 5e6;
  c.data.low_quality_fraction = 0.0;
  auto env = build_env(c, 11);
  const std::size_t faster = env->devices()[0].cpu_hz > env->devices()[1].cpu_hz ? 0 : 1;
  // Same data size; the predicted gap is dominated by the cpu term.
  const double t0 = predicted_device_time(*env, 0, faster);
  const double t1 = predicted_device_time(*env, 0, 1 - faster);
  const double loc_gap =
      static_cast<double>(env->devices()[0].data.size()) * c.device_cycles_per_sample *
      std::abs(1.0 / env->devices()[0].cpu_hz - 1.0 / env->devices()[1].cpu_hz);
  if (loc_gap > std::abs(t0 - t1) - loc_gap) {
    CHECK(baseline_select_topk(*env, 0, 1) == std::vector<std::size_t>{faster});
  }
}

TEST_CASE("random selection is uniform and seeded") {
  const SimConfig c = small_config();
  const auto env = build_env(c, 12);
  std::size_t n = 0;
  while (env->cell_devices(n).size() < 4) ++n;
  const auto& cell = env->cell_devices(n);
  const std::size_t k = 3;
  CHECK(baseline_select_random(*env, n, cell.size(), *std::make_unique<Rng>(1)).size() ==
        cell.size());
  Rng rng = make_rng(66, 0);
  std::map<std::size_t, std::size_t> hits;
  const std::size_t draws = 10000;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto s = baseline_select_random(*env, n, k, rng);
    CHECK(s.size() == k);
    CHECK(std::is_sorted(s.begin(), s.end()));
    for (auto d : s) ++hits[d];
  }
  const double p = static_cast<double>(k) / static_cast<double>(cell.size());
  const double sigma = std::sqrt(draws * p * (1.0 - p));
  for (std::size_t d : cell) {
    CHECK(std::abs(static_cast<double>(hits[d]) - draws * p) <= 3.0 * sigma);
  }
  Rng r1 = make_rng(3, 0);
  Rng r2 = make_rng(3, 0);
  CHECK(baseline_select_random(*env, n, k, r1) == baseline_select_random(*env, n, k, r2));
}

TEST_CASE("gradient scheduler never increases the predicted cost") {
  const SimConfig c = small_config();
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto env = build_env(c, seed);
    for (int t = 0; t < 2; ++t) {
      std::vector<a3c::SchedulingAction> start;
      for (std::size_t n = 0; n < env->num_agents(); ++n) {
        start.push_back(make_action(*env, n, baseline_select_topk(*env, n, c.select_k)));
      }
      const auto tuned = baseline_gradient_scheduler(*env, c.select_k);
      CHECK(predicted_time_cost(*env, tuned) <= predicted_time_cost(*env, start) + 1e-12);
      env->step(tuned);
    }
  }
}

TEST_CASE("gradient scheduler finds the best position for a single device") {
  SimConfig c = small_config(1);
  c.num_uavs = 1;
  c.uav_move_radius = 200.0;
  auto env = build_env(c, 13);
  const auto tuned = baseline_gradient_scheduler(*env, 1);
  REQUIRE(tuned.size() == 1);
  // Grid-search oracle over the x line through the device.
  auto cost_at = [&](double x, double y) {
    auto a = tuned;
    a[0].x = x;
    a[0].y = y;
    return predicted_time_cost(*env, a);
  };
  const double y = tuned[0].y;
  double best_x = 0.0;
  double best = INFINITY;
  for (double x = 0.0; x <= c.area_x; x += 0.05) {
    const double v = cost_at(x, y);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  CHECK(std::abs(tuned[0].x - best_x) <= 0.5);
  CHECK(std::abs(tuned[0].y - env->devices()[0].pos.y) <= 0.5);
}

TEST_CASE("time to accuracy") {
  std::vector<RoundMetrics> run(4);
  const double acc[] = {0.5, 0.8, 0.92, 0.95};
  for (std::size_t i = 0; i < 4; ++i) {
    run[i].accuracy = acc[i];
    run[i].cumulative_time = 10.0 * (i + 1);
  }
  const auto hit = time_to_accuracy(run, 0.9);
  REQUIRE(hit);
  CHECK(hit->rounds == 3);
  CHECK(hit->wall_clock == 30.0);
  CHECK_FALSE(time_to_accuracy(run, 0.99));
}

TEST_CASE("experiment outputs and summary") {
  const SimConfig c = small_config();
  const fs::path dir = scratch_dir("experiment");
  const std::vector<std::uint64_t> seeds{1, 2};
  const auto out = run_experiment(c, Algo::AflRandom, seeds, dir, nullptr, 3);
  REQUIRE(out.runs.size() == 2);
  CHECK(fs::exists(dir / "afl-random_seed1.csv"));
  CHECK(fs::exists(dir / "afl-random_seed2.csv"));
  CHECK(fs::exists(dir / "afl-random_summary.json"));

  // Spreadsheet-style recomputation from the CSV text.
  const auto a = read_csv(dir / "afl-random_seed1.csv");
  const auto b = read_csv(dir / "afl-random_seed2.csv");
  REQUIRE(a.size() == 4);
  const auto summary = nlohmann::json::parse(std::ifstream(dir / "afl-random_summary.json"));
  CHECK(summary["rounds"] == 3);
  for (std::size_t col = 0; col + 1 < a[0].size(); ++col) {
    const std::string name = a[0][col];
    for (std::size_t r = 1; r <= 3; ++r) {
      const double x = std::stod(a[r][col]);
      const double y = std::stod(b[r][col]);
      const double mean = (x + y) / 2.0;
      const double sd = std::abs(x - y) / std::sqrt(2.0);
      const double got_mean = summary["columns"][name]["mean"][r - 1];
      const double got_sd = summary["columns"][name]["std"][r - 1];
      CHECK(got_mean == doctest::Approx(mean).epsilon(1e-12));
      CHECK(got_sd == doctest::Approx(sd).epsilon(1e-9).scale(1e-12));
    }
  }

  const fs::path empty = scratch_dir("experiment0");
  run_experiment(c, Algo::AflSelect, std::vector<std::uint64_t>{3}, empty, nullptr, 0);
  const auto rows = read_csv(empty / "afl-select_seed3.csv");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].front() == "round");
  CHECK(rows[0].back() == "responders");
}

TEST_CASE("experiment csv is byte-identical across runs") {
  const SimConfig c = small_config();
  const fs::path d1 = scratch_dir("det1");
  const fs::path d2 = scratch_dir("det2");
  const std::vector<std::uint64_t> seeds{4};
  run_experiment(c, Algo::GradAfl, seeds, d1, nullptr, 3);
  run_experiment(c, Algo::GradAfl, seeds, d2, nullptr, 3);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(d1 / "grad-afl_seed4.csv") == slurp(d2 / "grad-afl_seed4.csv"));
}

TEST_CASE("algorithm ids") {
  for (const char* id : {"a3c-afl", "a3c-sfl", "grad-afl", "afl-select", "afl-random", "sfl-select"}) {
    CHECK(to_string(parse_algo(id)) == id);
  }
  CHECK_THROWS_AS(parse_algo("ppo"), InvalidConfig);
  CHECK(mode_of(Algo::SflSelect) == FLMode::Sync);
  CHECK(mode_of(Algo::A3cAfl) == FLMode::Async);
  CHECK(uses_policy(Algo::A3cSfl));
  CHECK_FALSE(uses_policy(Algo::AflRandom));
  CHECK_THROWS_AS(make_baseline(Algo::A3cAfl, SimConfig{}), InvalidConfig);
}

TEST_CASE("config round trip and validation") {
  SimConfig c;
  c.num_devices = 77;
  c.rl.beta_actor = 3e-4;
  c.fl.afl_quorum = 3;
  c.radio.xi2 = 0.2;
  const auto j = config_to_json(c);
  const auto back = config_from_json(j);
  CHECK(config_to_json(back) == j);
  CHECK(back.num_devices == 77);
  CHECK(back.fl.afl_quorum == 3);

  auto bad = j;
  bad["not_a_field"] = 1;
  CHECK_THROWS_AS(config_from_json(bad), InvalidConfig);
  bad = j;
  bad["num_uavs"] = 0;
  CHECK_THROWS_AS(config_from_json(bad), InvalidConfig);
  bad = j;
  bad["uav_power_min_w"] = 1.0;
  CHECK_THROWS_AS(config_from_json(bad), InvalidConfig);
  bad = j;
  bad["area"]["x"] = "wide";
  CHECK_THROWS_AS(config_from_json(bad), InvalidConfig);

  SimConfig warn;
  warn.rl.beta_actor = warn.rl.beta_critic;
  CHECK_FALSE(warn.validate().empty());
}

TEST_CASE("metrics csv formats") {
  RoundMetrics m;
  m.round = 2;
  m.c_time = 0.1;
  m.responders = {3, 7};
  std::stringstream ss;
  write_round_metrics_csv(ss, std::vector<RoundMetrics>{m});
  std::string header;
  std::string row;
  std::getline(ss, header);
  std::getline(ss, row);
  CHECK(header.rfind("round,c_time,c_loss,", 0) == 0);
  CHECK(row.rfind("2,0.10000000000000001,", 0) == 0);
  CHECK(row.substr(row.rfind(',') + 1) == "3;7");
  CHECK(std::stod(format_double(0.1)) == 0.1);

  a3c::EpisodeLog e;
  e.episode = 4;
  std::stringstream es;
  write_episode_log_csv(es, std::vector<a3c::EpisodeLog>{e});
  std::getline(es, header);
  CHECK(header ==
        "episode,mean_cost,mean_normalized_cost,mean_reward,constraint_violations,"
        "mean_time_cost,mean_loss_cost,mean_selected");
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch_dir("cli");
  {
    std::ofstream(dir / "bad.json") << R"({"num_uavs": 0})";
    std::ofstream(dir / "junk.json") << "{ not json";
    std::ofstream(dir / "ok.json") << R"({"num_devices": 20, "fl": {"rounds": 2}})";
  }
  CHECK(run_cli("print-config") == 0);
  CHECK(run_cli("print-config --config " + (dir / "ok.json").string()) == 0);
  CHECK(run_cli("print-config --config " + (dir / "bad.json").string()) == 2);
  CHECK(run_cli("print-config --config " + (dir / "junk.json").string()) == 2);
  CHECK(run_cli("evaluate --algo nope --rounds 1") == 2);
  CHECK(run_cli("evaluate --algo a3c-afl --rounds 1 --checkpoint " + (dir / "missing.ckpt").string()) == 3);
  CHECK(run_cli("evaluate --algo afl-random --rounds 2 --config " + (dir / "ok.json").string() +
                " --out " + (dir / "eval").string()) == 0);
  CHECK(fs::exists(dir / "eval"));
  CHECK(run_cli("gen-data --seed 1 --eval --out " + (dir / "eval.csv").string()) == 0);
  CHECK(fedcore::load_dataset(dir / "eval.csv").size() == 1000);
}
