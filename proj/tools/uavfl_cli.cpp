#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "uavfl/checkpoint.hpp"
#include "uavfl/errors.hpp"
#include "uavfl/harness/config.hpp"
#include "uavfl/harness/environment.hpp"
#include "uavfl/harness/experiment.hpp"
#include "uavfl/harness/metrics_io.hpp"

namespace fs = std::filesystem;
using namespace uavfl;
using namespace uavfl::harness;

namespace {

SimConfig read_config(const std::string& path) {
  SimConfig c = path.empty() ? config_from_json(nlohmann::json::object()) : load_config(path);
  for (const auto& w : c.validate()) std::clog << "warning: " << w << '\n';
  return c;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& t : split(s, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(t, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != t.size()) throw InvalidConfig("bad seed '" + t + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidConfig("no seeds given");
  return out;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-UAV federated learning simulator with an A3C scheduler"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out = ".";
  std::uint64_t seed = 1;
  std::size_t workers = 0;

  auto* train = app.add_subcommand("train", "Train the A3C scheduler");
  train->add_option("--config", config_path, "JSON config file");
  train->add_option("--seed", seed, "Master seed")->required();
  train->add_option("--workers", workers, "A3C worker threads (0 keeps the config value)");
  train->add_option("--out", out, "Output directory")->required();

  std::string checkpoint;
  std::string algo = "a3c-afl";
  std::optional<std::size_t> rounds;
  auto* eval = app.add_subcommand("evaluate", "Run FL rounds with a scheduler");
  eval->add_option("--checkpoint", checkpoint, "Policy checkpoint (a3c-* algorithms)");
  eval->add_option("--algo", algo, "a3c-afl, a3c-sfl, grad-afl, afl-select, afl-random, sfl-select");
  eval->add_option("--rounds", rounds, "Number of FL rounds");
  eval->add_option("--config", config_path, "JSON config file");
  eval->add_option("--seed", seed, "Environment seed");
  eval->add_option("--out", out, "Output directory");

  std::string algos;
  std::string seeds;
  auto* sweep = app.add_subcommand("sweep", "Run several algorithms over several seeds");
  sweep->add_option("--algos", algos, "Comma-separated algorithm ids")->required();
  sweep->add_option("--seeds", seeds, "Comma-separated seeds")->required();
  sweep->add_option("--config", config_path, "JSON config file");
  sweep->add_option("--checkpoint", checkpoint, "Shared policy for a3c-* algorithms");
  sweep->add_option("--rounds", rounds, "Number of FL rounds");
  sweep->add_option("--out", out, "Output directory");

  std::string data_out;
  std::optional<std::size_t> device;
  bool eval_only = false;
  auto* gen = app.add_subcommand("gen-data", "Write the generated dataset as CSV");
  gen->add_option("--seed", seed, "Environment seed")->required();
  gen->add_option("--out", data_out, "Output file")->required();
  gen->add_option("--config", config_path, "JSON config file");
  auto* dev_opt = gen->add_option("--device", device, "Only this device's local data");
  gen->add_flag("--eval", eval_only, "The balanced evaluation set instead")->excludes(dev_opt);

  auto* dump = app.add_subcommand("dump-checkpoint", "Print a checkpoint as text");
  dump->add_option("checkpoint", checkpoint, "Checkpoint file")->required();

  auto* print = app.add_subcommand("print-config", "Print the effective config");
  print->add_option("--config", config_path, "JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*train) {
      SimConfig c = read_config(config_path);
      c.seed = seed;
      c.rl.seed = seed;
      if (workers) c.rl.workers = workers;
      for (const auto& w : c.rl.validate()) std::clog << "warning: " << w << '\n';
      fs::create_directories(out);
      const auto result = train_policy(c);
      save_episode_log_csv(fs::path(out) / "episodes.csv", result.episodes);
      save_policy(fs::path(out) / "checkpoint.bin", result.policy);
      write_json(fs::path(out) / "config.json", config_to_json(c));
      std::cout << "episodes " << result.episodes.size() << ", updates " << result.updates
                << ", clipped " << result.clipped_updates << '\n';
    } else if (*eval) {
      SimConfig c = read_config(config_path);
      const Algo a = parse_algo(algo);
      std::optional<TrainedPolicy> policy;
      if (uses_policy(a)) {
        if (checkpoint.empty()) throw InvalidConfig(algo + " requires --checkpoint");
        policy = load_policy(checkpoint);
      }
      const std::vector<std::uint64_t> s{seed};
      const auto res = run_experiment(c, a, s, fs::path(out), policy ? &*policy : nullptr, rounds);
      const auto& run = res.runs.front();
      if (!run.empty()) {
        const auto& last = run.back();
        std::cout << algo << " seed " << seed << ": rounds " << run.size() << ", accuracy "
                  << last.accuracy << ", time " << last.cumulative_time << " s\n";
      }
    } else if (*sweep) {
      SimConfig c = read_config(config_path);
      const auto s = parse_seeds(seeds);
      std::optional<TrainedPolicy> policy;
      if (!checkpoint.empty()) policy = load_policy(checkpoint);
      std::vector<Algo> list;
      for (const auto& id : split(algos, ',')) list.push_back(parse_algo(id));
      if (list.empty()) throw InvalidConfig("no algorithms given");
      for (Algo a : list) {
        const auto res =
            run_experiment(c, a, s, fs::path(out), policy ? &*policy : nullptr, rounds);
        std::cout << to_string(a) << ": " << res.runs.size() << " runs\n";
      }
    } else if (*gen) {
      SimConfig c = read_config(config_path);
      const auto env = build_env(c, seed);
      if (eval_only) {
        save_dataset(data_out, env->eval_set(), c.data.classes);
      } else if (device) {
        if (*device >= env->devices().size()) throw InvalidConfig("--device out of range");
        save_dataset(data_out, env->devices()[*device].data, c.data.classes);
      } else {
        fedcore::LocalDataset all;
        for (const auto& d : env->devices()) {
          all.features.insert(all.features.end(), d.data.features.begin(), d.data.features.end());
          all.labels.insert(all.labels.end(), d.data.labels.begin(), d.data.labels.end());
        }
        all.num_features = c.data.features;
        save_dataset(data_out, all, c.data.classes);
      }
    } else if (*dump) {
      dump_checkpoint_text(std::cout, load_checkpoint(checkpoint));
    } else if (*print) {
      std::cout << config_to_json(read_config(config_path)).dump(2) << '\n';
    }
  } catch (const InvalidConfig& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
