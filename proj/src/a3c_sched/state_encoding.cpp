#include <algorithm>
#include <cmath>
#include <numeric>

#include "uavfl/a3c_sched.hpp"
#include "uavfl/errors.hpp"

namespace uavfl::a3c {

EncodedState encode_state(const NetworkSnapshot& snapshot, std::size_t cell,
                          const EncodingLayout& layout) {
  const CellView& view = snapshot.cells.at(cell);
  EncodedState enc;
  enc.features.assign(layout.size(), 0.0);
  enc.present.assign(layout.slots, 0);

  std::vector<std::size_t> order(view.devices.size());
  std::iota(order.begin(), order.end(), 0);
  if (order.size() > layout.slots) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return view.devices[a].path_loss_db < view.devices[b].path_loss_db;
    });
    order.resize(layout.slots);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return view.devices[a].device_id < view.devices[b].device_id;
  });

  const double diag = std::hypot(snapshot.area_x, snapshot.area_y);
  auto& f = enc.features;
  f[0] = view.uav_x / snapshot.area_x;
  f[1] = view.uav_y / snapshot.area_y;
  f[2] = view.remaining_broadcast;
  f[3] = snapshot.slot_fraction;

  for (std::size_t s = 0; s < order.size(); ++s) {
    const DeviceView& d = view.devices[order[s]];
    enc.slot_device.push_back(d.device_id);
    enc.present[s] = 1;
    double* row = f.data() + EncodingLayout::kCellFeatures + s * layout.slot_features();
    row[0] = 1.0;
    row[1] = d.x / snapshot.area_x;
    row[2] = d.y / snapshot.area_y;
    row[3] = std::hypot(d.x - view.uav_x, d.y - view.uav_y) / diag;
    row[4] = d.prev_selected ? 1.0 : 0.0;
    if (d.prev_subchannel >= 0 &&
        static_cast<std::size_t>(d.prev_subchannel) < layout.subchannels) {
      row[5 + static_cast<std::size_t>(d.prev_subchannel)] = 1.0;
    }
    const std::size_t tail = 5 + layout.subchannels;
    row[tail] = d.remaining_upload;
    row[tail + 1] = d.cpu_hz / snapshot.cpu_max_hz;
    row[tail + 2] = d.samples / snapshot.samples_max;
    row[tail + 3] = std::min(1.0, d.loss / (2.0 * snapshot.loss_scale));
  }
  return enc;
}

SchedulingAction to_scheduling_action(const policy::SampledAction& sampled,
                                      const EncodedState& state) {
  SchedulingAction a;
  a.x = sampled.x;
  a.y = sampled.y;
  a.power_w = sampled.power;
  for (std::size_t s = 0; s < state.slot_device.size(); ++s) {
    if (!sampled.selected[s]) continue;
    a.devices.push_back(state.slot_device[s]);
    a.subchannels.push_back(static_cast<std::size_t>(sampled.subchannel[s]));
  }
  return a;
}

double reward(double time_cost, double loss_cost, const latency::CostWeights& w) {
  return -latency::system_cost(time_cost, loss_cost, w);
}

}  // namespace uavfl::a3c
