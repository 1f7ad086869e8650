#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "uavfl/errors.hpp"
#include "uavfl/policy_net.hpp"

namespace uavfl::policy {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 ln(2 pi)
constexpr double kGaussEntropyOffset = kHalfLog2Pi + 0.5;  // 0.5 ln(2 pi e)

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double log_sigmoid(double z) { return -softplus(-z); }

struct LogStd {
  double value;
  double slope;  // d value / d raw: 0 when clamped
};

LogStd clamp_log_std(double raw) {
  if (raw < kLogStdMin) return {kLogStdMin, 0.0};
  if (raw > kLogStdMax) return {kLogStdMax, 0.0};
  return {raw, 1.0};
}

double prior_logit(double value, double lo, double hi) {
  const double r = std::clamp((value - lo) / (hi - lo), 1e-3, 1.0 - 1e-3);
  return std::log(r / (1.0 - r));
}

// Means and log-stds of the three continuous components (x, y, power).
struct Continuous {
  std::array<double, 3> mu;
  std::array<LogStd, 3> log_std;
  std::array<double, 3> range;
  std::array<std::size_t, 3> mean_index;
  std::array<std::size_t, 3> std_index;
};

Continuous continuous(const HeadLayout& layout, std::span<const double> out,
                      const HeadContext& ctx) {
  Continuous c;
  c.mean_index = {layout.pos_mean(0), layout.pos_mean(1), layout.power_mean()};
  c.std_index = {layout.pos_log_std(0), layout.pos_log_std(1),
                 layout.power_log_std()};
  const PositionBox& b = ctx.box;
  if (!(b.x_hi > b.x_lo && b.y_hi > b.y_lo && ctx.power_max > ctx.power_min && ctx.power_min >= 0.0)) {
    throw InvalidConfig("policy heads: empty position box or power range");
  }
  c.range = {b.x_hi - b.x_lo, b.y_hi - b.y_lo, ctx.power_max - ctx.power_min};
  c.mu = {prior_logit(b.anchor_x, b.x_lo, b.x_hi) + out[c.mean_index[0]],
          prior_logit(b.anchor_y, b.y_lo, b.y_hi) + out[c.mean_index[1]],
          out[c.mean_index[2]]};
  for (std::size_t i = 0; i < 3; ++i) c.log_std[i] = clamp_log_std(out[c.std_index[i]]);
  return c;
}

// Log-softmax of one slot's subchannel logits.
void log_softmax(std::span<const double> z, std::vector<double>& out) {
  out.resize(z.size());
  const double peak = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double v : z) total += std::exp(v - peak);
  const double log_total = peak + std::log(total);
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] - log_total;
}

std::span<const double> channel_logits(const HeadLayout& layout,
                                       std::span<const double> out,
                                       std::size_t slot) {
  return out.subspan(layout.subchannel(slot, 0), layout.subchannels);
}

void check(const HeadLayout& layout, std::span<const double> out,
           const HeadContext& ctx) {
  if (out.size() != layout.size() || ctx.present.size() != layout.slots) {
    throw ShapeMismatch("policy heads: output or mask size mismatch");
  }
}

double gaussian_log_density(double u, double mu, double log_std) {
  const double z = (u - mu) * std::exp(-log_std);
  return -0.5 * z * z - log_std - kHalfLog2Pi;
}

// log |d/du range * sigmoid(u)|
double squash_log_jacobian(double u, double range) {
  return std::log(range) + log_sigmoid(u) + log_sigmoid(-u);
}

}  // namespace

void init_heads(const HeadLayout& layout, DenseNet& actor, double output_scale,
                double log_std) {
  if (actor.output_size() != layout.size()) {
    throw ShapeMismatch("init_heads: actor output does not match the head layout");
  }
  const std::size_t last = actor.sizes().size() - 2;
  for (double& w : actor.layer_weights(last)) w *= output_scale;
  auto bias = actor.layer_bias(last);
  bias[layout.pos_log_std(0)] = log_std;
  bias[layout.pos_log_std(1)] = log_std;
  bias[layout.power_log_std()] = log_std;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

SampledAction sample_action(const HeadLayout& layout, std::span<const double> out,
                            const HeadContext& ctx, Rng& rng, bool greedy) {
  check(layout, out, ctx);
  const std::size_t S = layout.slots;
  const std::size_t M = layout.subchannels;
  SampledAction act;
  act.selected.assign(S, 0);
  act.subchannel.assign(S, -1);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> prob(S, 0.0);
  std::vector<std::size_t> present;
  for (std::size_t s = 0; s < S; ++s) {
    if (!ctx.present[s]) continue;
    present.push_back(s);
    prob[s] = sigmoid(out[layout.selection(s)]);
    const bool on = greedy ? prob[s] >= 0.5 : unit(rng) < prob[s];
    act.selected[s] = on ? 1 : 0;
  }

  // Most probable first, ties by slot index.
  std::vector<std::size_t> ranked = present;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](std::size_t a, std::size_t b) { return prob[a] > prob[b]; });
  const std::size_t cap = std::min(ctx.max_selected, M);
  std::size_t count = 0;
  for (std::size_t s : ranked) {
    if (!act.selected[s]) continue;
    if (count < cap) {
      ++count;
    } else {
      act.selected[s] = 0;
    }
  }
  const std::size_t floor = std::min({ctx.min_selected, cap, present.size()});
  for (std::size_t s : ranked) {
    if (count >= floor) break;
    if (act.selected[s]) continue;
    act.selected[s] = 1;
    ++count;
  }

  std::vector<std::uint8_t> taken(M, 0);
  std::vector<double> logq;
  for (std::size_t s : ranked) {
    if (!act.selected[s]) continue;
    log_softmax(channel_logits(layout, out, s), logq);
    std::size_t pick = 0;
    if (greedy) {
      pick = static_cast<std::size_t>(std::max_element(logq.begin(), logq.end()) -
                                      logq.begin());
    } else {
      double r = unit(rng);
      pick = M - 1;
      for (std::size_t m = 0; m < M; ++m) {
        r -= std::exp(logq[m]);
        if (r < 0.0) {
          pick = m;
          break;
        }
      }
    }
    if (taken[pick]) {
      std::size_t best = M;
      for (std::size_t m = 0; m < M; ++m) {
        if (!taken[m] && (best == M || logq[m] > logq[best])) best = m;
      }
      pick = best;
    }
    taken[pick] = 1;
    act.subchannel[s] = static_cast<int>(pick);
  }

  const Continuous c = continuous(layout, out, ctx);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::array<double, 3> u{};
  for (std::size_t i = 0; i < 3; ++i) {
    u[i] = c.mu[i];
    if (!greedy) u[i] += std::exp(c.log_std[i].value) * normal(rng);
  }
  act.pos_u = {u[0], u[1]};
  act.power_u = u[2];
  act.x = ctx.box.x_lo + (ctx.box.x_hi - ctx.box.x_lo) * sigmoid(u[0]);
  act.y = ctx.box.y_lo + (ctx.box.y_hi - ctx.box.y_lo) * sigmoid(u[1]);
  act.power = ctx.power_min + (ctx.power_max - ctx.power_min) * sigmoid(u[2]);
  act.log_prob = log_prob(layout, out, ctx, act);
  act.entropy = entropy(layout, out, ctx);
  return act;
}

double log_prob(const HeadLayout& layout, std::span<const double> out,
                const HeadContext& ctx, const SampledAction& action) {
  check(layout, out, ctx);
  double total = 0.0;
  std::vector<double> logq;
  for (std::size_t s = 0; s < layout.slots; ++s) {
    if (!ctx.present[s]) continue;
    const double l = out[layout.selection(s)];
    if (action.selected[s]) {
      total += log_sigmoid(l);
      log_softmax(channel_logits(layout, out, s), logq);
      total += logq[static_cast<std::size_t>(action.subchannel[s])];
    } else {
      total += log_sigmoid(-l);
    }
  }
  const Continuous c = continuous(layout, out, ctx);
  const std::array<double, 3> u{action.pos_u[0], action.pos_u[1], action.power_u};
  for (std::size_t i = 0; i < 3; ++i) {
    total += gaussian_log_density(u[i], c.mu[i], c.log_std[i].value) -
             squash_log_jacobian(u[i], c.range[i]);
  }
  return total;
}

double entropy(const HeadLayout& layout, std::span<const double> out,
               const HeadContext& ctx) {
  check(layout, out, ctx);
  double total = 0.0;
  std::vector<double> logq;
  for (std::size_t s = 0; s < layout.slots; ++s) {
    if (!ctx.present[s]) continue;
    const double l = out[layout.selection(s)];
    const double p = sigmoid(l);
    total += p * softplus(-l) + (1.0 - p) * softplus(l);
    log_softmax(channel_logits(layout, out, s), logq);
    for (double lq : logq) total -= std::exp(lq) * lq;
  }
  const Continuous c = continuous(layout, out, ctx);
  for (const auto& ls : c.log_std) total += ls.value + kGaussEntropyOffset;
  return total;
}

void log_prob_grad(const HeadLayout& layout, std::span<const double> out,
                   const HeadContext& ctx, const SampledAction& action,
                   double scale, std::span<double> grad) {
  check(layout, out, ctx);
  if (grad.size() != out.size()) throw ShapeMismatch("policy heads: grad size");
  std::vector<double> logq;
  for (std::size_t s = 0; s < layout.slots; ++s) {
    if (!ctx.present[s]) continue;
    const double p = sigmoid(out[layout.selection(s)]);
    const double b = action.selected[s] ? 1.0 : 0.0;
    grad[layout.selection(s)] += scale * (b - p);
    if (!action.selected[s]) continue;
    log_softmax(channel_logits(layout, out, s), logq);
    const auto chosen = static_cast<std::size_t>(action.subchannel[s]);
    for (std::size_t m = 0; m < layout.subchannels; ++m) {
      const double target = m == chosen ? 1.0 : 0.0;
      grad[layout.subchannel(s, m)] += scale * (target - std::exp(logq[m]));
    }
  }
  const Continuous c = continuous(layout, out, ctx);
  const std::array<double, 3> u{action.pos_u[0], action.pos_u[1], action.power_u};
  for (std::size_t i = 0; i < 3; ++i) {
    const double inv_var = std::exp(-2.0 * c.log_std[i].value);
    const double diff = u[i] - c.mu[i];
    grad[c.mean_index[i]] += scale * diff * inv_var;
    grad[c.std_index[i]] +=
        scale * c.log_std[i].slope * (diff * diff * inv_var - 1.0);
  }
}

void entropy_grad(const HeadLayout& layout, std::span<const double> out,
                  const HeadContext& ctx, double scale, std::span<double> grad) {
  check(layout, out, ctx);
  if (grad.size() != out.size()) throw ShapeMismatch("policy heads: grad size");
  std::vector<double> logq;
  for (std::size_t s = 0; s < layout.slots; ++s) {
    if (!ctx.present[s]) continue;
    const double l = out[layout.selection(s)];
    const double p = sigmoid(l);
    grad[layout.selection(s)] += scale * (-l * p * (1.0 - p));
    log_softmax(channel_logits(layout, out, s), logq);
    double h = 0.0;
    for (double lq : logq) h -= std::exp(lq) * lq;
    for (std::size_t m = 0; m < layout.subchannels; ++m) {
      const double q = std::exp(logq[m]);
      grad[layout.subchannel(s, m)] += scale * (-q * (logq[m] + h));
    }
  }
  const Continuous c = continuous(layout, out, ctx);
  for (std::size_t i = 0; i < 3; ++i) grad[c.std_index[i]] += scale * c.log_std[i].slope;
}

double squashed_gaussian_density(double y, double range, double mu,
                                 double log_std) {
  if (!(y > 0.0 && y < range)) return 0.0;
  const double r = y / range;
  const double u = std::log(r / (1.0 - r));
  const double ls = clamp_log_std(log_std).value;
  return std::exp(gaussian_log_density(u, mu, ls) - squash_log_jacobian(u, range));
}

}  // namespace uavfl::policy
