#include "uavfl/harness/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "uavfl/errors.hpp"

namespace uavfl::harness {
namespace {

using nlohmann::json;

// Reads fields from one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InvalidConfig(path_ + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw InvalidConfig(path_ + "." + key + ": wrong type");
    }
  }

  template <typename T>
  void read_optional(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (it->is_null()) {
      out.reset();
      return;
    }
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw InvalidConfig(path_ + "." + key + ": wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) {
        throw InvalidConfig(path_ + ": unknown key '" + it.key() + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_radio(const json& j, channel::RadioParams& r) {
  ObjectReader o(j, "radio");
  o.read("carrier_hz", r.carrier_hz);
  o.read("eta_los_db", r.eta_los_db);
  o.read("eta_nlos_db", r.eta_nlos_db);
  o.read("xi1", r.xi1);
  o.read("xi2", r.xi2);
  o.read("noise_power_w", r.noise_power_w);
  o.read("bw_uplink_hz", r.bw_uplink_hz);
  o.read("bw_downlink_hz", r.bw_downlink_hz);
  o.read("num_subchannels", r.num_subchannels);
  o.finish();
}

void read_data(const json& j, DataConfig& d) {
  ObjectReader o(j, "data");
  o.read("classes", d.classes);
  o.read("features", d.features);
  o.read("separation", d.separation);
  o.read("dirichlet_alpha", d.dirichlet_alpha);
  o.read("bits_per_sample", d.bits_per_sample);
  o.read("low_quality_fraction", d.low_quality_fraction);
  o.read("label_noise", d.label_noise);
  o.read("eval_per_class", d.eval_per_class);
  o.read("task_seed", d.task_seed);
  o.read("hidden", d.hidden);
  o.finish();
}

void read_fl(const json& j, fedcore::FLConfig& f) {
  ObjectReader o(j, "fl");
  o.read("eta", f.eta);
  o.read("local_iters", f.local_iters);
  o.read("rounds", f.max_rounds);
  o.read_optional("afl_quorum", f.afl_quorum);
  o.read("quorum_fraction", f.quorum_fraction);
  o.read("epsilon", f.epsilon);
  o.read("staleness_decay", f.staleness_decay);
  o.finish();
}

void read_rl(const json& j, a3c::TrainConfig& r) {
  ObjectReader o(j, "rl");
  o.read("actor_hidden", r.actor_hidden);
  o.read("critic_hidden", r.critic_hidden);
  o.read("beta_actor", r.beta_actor);
  o.read("beta_critic", r.beta_critic);
  o.read("rms_alpha", r.rms_alpha);
  o.read("rms_eps", r.rms_eps);
  o.read("gamma", r.gamma);
  o.read("entropy_coef", r.entropy_coef);
  o.read("t_max", r.t_max);
  o.read("workers", r.workers);
  o.read("episodes", r.episodes);
  o.read_optional("max_updates", r.max_updates);
  o.read("grad_clip", r.grad_clip);
  o.read("shared_rms", r.shared_rms);
  std::string sync = r.sync == policy::SyncMode::Locked ? "locked" : "hogwild";
  o.read("sync", sync);
  if (sync == "locked") {
    r.sync = policy::SyncMode::Locked;
  } else if (sync == "hogwild") {
    r.sync = policy::SyncMode::Hogwild;
  } else {
    throw InvalidConfig("rl.sync: expected 'locked' or 'hogwild'");
  }
  o.read("min_selected", r.min_selected);
  o.read("init_log_std", r.init_log_std);
  o.read("calibrate_critic", r.calibrate_critic);
  o.finish();
}

}  // namespace

std::vector<std::string> SimConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidConfig("config: " + what);
  };
  require(area_x > 0.0 && area_y > 0.0, "area must be positive");
  require(num_uavs >= 1, "num_uavs must be >= 1");
  require(uav_move_radius > 0.0, "uav_move_radius must be > 0");
  require(uav_height > 0.0, "uav_height must be positive");
  require(num_devices >= 1, "num_devices must be >= 1");
  require(data_bits_min > 0.0 && data_bits_max >= data_bits_min,
          "data volume range must be positive and ordered");
  require(cpu_min_hz > 0.0 && cpu_max_hz >= cpu_min_hz,
          "cpu range must be positive and ordered");
  require(cpu_load_min > 0.0 && cpu_load_min <= 1.0, "cpu_load_min must be in (0, 1]");
  require(device_power_w > 0.0, "device_power_w must be positive");
  require(uav_power_max_w > 0.0, "uav_power_max_w must be positive");
  require(uav_power_min_w >= 0.0 && uav_power_min_w < uav_power_max_w,
          "uav_power_min_w must lie in [0, uav_power_max_w)");
  require(payload_bits > 0.0, "payload_bits must be positive");
  require(lambda >= 0.0 && lambda <= 1.0, "lambda must be in [0, 1]");
  require(device_cycles_per_sample > 0.0 && uav_cycles_per_sample > 0.0 &&
              uav_cpu_hz > 0.0,
          "compute profile must be positive");
  radio.validate();
  require(data.classes >= 2, "data.classes must be >= 2");
  require(data.features >= 1, "data.features must be >= 1");
  require(data.separation > 0.0, "data.separation must be positive");
  require(data.dirichlet_alpha > 0.0, "data.dirichlet_alpha must be positive");
  require(data.bits_per_sample > 0.0 && data.bits_per_sample <= data_bits_min,
          "data.bits_per_sample must be in (0, data_bits_min]");
  require(data.low_quality_fraction >= 0.0 && data.low_quality_fraction <= 1.0,
          "data.low_quality_fraction must be in [0, 1]");
  require(data.label_noise >= 0.0 && data.label_noise <= 1.0,
          "data.label_noise must be in [0, 1]");
  require(data.eval_per_class >= 1, "data.eval_per_class must be >= 1");
  fl.validate();
  require(state_slots >= 1, "state_slots must be >= 1");
  require(select_k >= 1 && select_k <= radio.num_subchannels,
          "select_k must be in [1, num_subchannels]");
  require(rl.min_selected <= radio.num_subchannels,
          "rl.min_selected cannot exceed num_subchannels");
  return rl.validate();
}

SimConfig config_from_json(const json& j) {
  SimConfig c;
  ObjectReader o(j, "config");
  o.read("seed", c.seed);
  if (const json* area = o.child("area")) {
    ObjectReader a(*area, "area");
    a.read("x", c.area_x);
    a.read("y", c.area_y);
    a.finish();
  }
  o.read("num_uavs", c.num_uavs);
  o.read("uav_move_radius", c.uav_move_radius);
  o.read("uav_height", c.uav_height);
  o.read("num_devices", c.num_devices);
  o.read("data_bits_min", c.data_bits_min);
  o.read("data_bits_max", c.data_bits_max);
  o.read("cpu_min_hz", c.cpu_min_hz);
  o.read("cpu_max_hz", c.cpu_max_hz);
  o.read("cpu_load_min", c.cpu_load_min);
  o.read("device_power_w", c.device_power_w);
  o.read("uav_power_min_w", c.uav_power_min_w);
  o.read("uav_power_max_w", c.uav_power_max_w);
  o.read("payload_bits", c.payload_bits);
  o.read("lambda", c.lambda);
  o.read("device_cycles_per_sample", c.device_cycles_per_sample);
  o.read("uav_cycles_per_sample", c.uav_cycles_per_sample);
  o.read("uav_cpu_hz", c.uav_cpu_hz);
  if (const json* r = o.child("radio")) read_radio(*r, c.radio);
  if (const json* d = o.child("data")) read_data(*d, c.data);
  if (const json* f = o.child("fl")) read_fl(*f, c.fl);
  if (const json* r = o.child("rl")) read_rl(*r, c.rl);
  o.read("state_slots", c.state_slots);
  o.read("select_k", c.select_k);
  o.read("reset_normalizers_per_episode", c.reset_normalizers_per_episode);
  o.read("normalizer_window", c.normalizer_window);
  o.read("eval_greedy", c.eval_greedy);
  o.finish();
  c.rl.seed = c.seed;
  c.validate();
  return c;
}

json config_to_json(const SimConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["area"] = {{"x", c.area_x}, {"y", c.area_y}};
  j["num_uavs"] = c.num_uavs;
  j["uav_move_radius"] = c.uav_move_radius;
  j["uav_height"] = c.uav_height;
  j["num_devices"] = c.num_devices;
  j["data_bits_min"] = c.data_bits_min;
  j["data_bits_max"] = c.data_bits_max;
  j["cpu_min_hz"] = c.cpu_min_hz;
  j["cpu_max_hz"] = c.cpu_max_hz;
  j["cpu_load_min"] = c.cpu_load_min;
  j["device_power_w"] = c.device_power_w;
  j["uav_power_min_w"] = c.uav_power_min_w;
  j["uav_power_max_w"] = c.uav_power_max_w;
  j["payload_bits"] = c.payload_bits;
  j["lambda"] = c.lambda;
  j["device_cycles_per_sample"] = c.device_cycles_per_sample;
  j["uav_cycles_per_sample"] = c.uav_cycles_per_sample;
  j["uav_cpu_hz"] = c.uav_cpu_hz;
  j["radio"] = {{"carrier_hz", c.radio.carrier_hz},
                {"eta_los_db", c.radio.eta_los_db},
                {"eta_nlos_db", c.radio.eta_nlos_db},
                {"xi1", c.radio.xi1},
                {"xi2", c.radio.xi2},
                {"noise_power_w", c.radio.noise_power_w},
                {"bw_uplink_hz", c.radio.bw_uplink_hz},
                {"bw_downlink_hz", c.radio.bw_downlink_hz},
                {"num_subchannels", c.radio.num_subchannels}};
  j["data"] = {{"classes", c.data.classes},
               {"features", c.data.features},
               {"separation", c.data.separation},
               {"dirichlet_alpha", c.data.dirichlet_alpha},
               {"bits_per_sample", c.data.bits_per_sample},
               {"low_quality_fraction", c.data.low_quality_fraction},
               {"label_noise", c.data.label_noise},
               {"eval_per_class", c.data.eval_per_class},
               {"task_seed", c.data.task_seed},
               {"hidden", c.data.hidden}};
  j["fl"] = {{"eta", c.fl.eta},
             {"local_iters", c.fl.local_iters},
             {"rounds", c.fl.max_rounds},
             {"afl_quorum", c.fl.afl_quorum ? json(*c.fl.afl_quorum) : json(nullptr)},
             {"quorum_fraction", c.fl.quorum_fraction},
             {"epsilon", c.fl.epsilon},
             {"staleness_decay", c.fl.staleness_decay}};
  j["rl"] = {{"actor_hidden", c.rl.actor_hidden},
             {"critic_hidden", c.rl.critic_hidden},
             {"beta_actor", c.rl.beta_actor},
             {"beta_critic", c.rl.beta_critic},
             {"rms_alpha", c.rl.rms_alpha},
             {"rms_eps", c.rl.rms_eps},
             {"gamma", c.rl.gamma},
             {"entropy_coef", c.rl.entropy_coef},
             {"t_max", c.rl.t_max},
             {"workers", c.rl.workers},
             {"episodes", c.rl.episodes},
             {"max_updates", c.rl.max_updates ? json(*c.rl.max_updates) : json(nullptr)},
             {"grad_clip", c.rl.grad_clip},
             {"shared_rms", c.rl.shared_rms},
             {"sync", c.rl.sync == policy::SyncMode::Locked ? "locked" : "hogwild"},
             {"min_selected", c.rl.min_selected},
             {"init_log_std", c.rl.init_log_std},
             {"calibrate_critic", c.rl.calibrate_critic}};
  j["state_slots"] = c.state_slots;
  j["select_k"] = c.select_k;
  j["reset_normalizers_per_episode"] = c.reset_normalizers_per_episode;
  j["normalizer_window"] = c.normalizer_window;
  j["eval_greedy"] = c.eval_greedy;
  return j;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidConfig("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace uavfl::harness
