#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "test_util.hpp"
#include "uavfl/errors.hpp"
#include "uavfl/fedcore.hpp"

using namespace uavfl;
using namespace uavfl::fedcore;

namespace {

LocalDataset blob_data(std::size_t per_class, std::uint64_t seed, std::size_t owner = 0) {
  const BlobTask task(3, 4, 3.0, 7);
  Rng rng = make_rng(seed, owner);
  return task.balanced(per_class, rng, owner);
}

// Straight-line softmax cross-entropy for logistic regression.
double reference_loss(const ModelParams& w, std::size_t f, std::size_t c,
                      std::span<const double> x, int label) {
  std::vector<double> z(c);
  for (std::size_t j = 0; j < c; ++j) {
    double s = w.values[c * f + j];
    for (std::size_t i = 0; i < f; ++i) s += w.values[j * f + i] * x[i];
    z[j] = s;
  }
  double denom = 0.0;
  for (double v : z) denom += std::exp(v);
  return std::log(denom) - z[static_cast<std::size_t>(label)];
}

}  // namespace

TEST_CASE("aggregate examples") {
  const ModelParams a({1.0, 2.0, 3.0}, {3});
  CHECK(aggregate(std::vector<Contribution>{{&a, 5.0}}) == a);

  const ModelParams zero(std::vector<double>(4, 0.0), {4});
  const ModelParams ones(std::vector<double>(4, 1.0), {4});
  const auto half = aggregate(std::vector<Contribution>{{&zero, 2.0}, {&ones, 2.0}});
  CHECK(half.values == std::vector<double>(4, 0.5));

  const ModelParams p0({0.0}, {1});
  const ModelParams p4({4.0}, {1});
  CHECK(aggregate(std::vector<Contribution>{{&p0, 1.0}, {&p4, 3.0}}).values[0] == 3.0);

  CHECK_THROWS_AS(aggregate(std::vector<Contribution>{}), EmptyContribution);
  CHECK_THROWS_AS(aggregate(std::vector<Contribution>{{&a, 1.0}, {&p0, 1.0}}), ShapeMismatch);
}

TEST_CASE("aggregate equals brute-force weighted mean") {
  Rng rng = make_rng(41, 0);
  std::uniform_int_distribution<int> count(1, 10);
  std::uniform_int_distribution<int> dim(1, 100);
  std::uniform_int_distribution<int> weight(1, 100);
  std::normal_distribution<double> g(0.0, 3.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(count(rng));
    const auto d = static_cast<std::size_t>(dim(rng));
    std::vector<ModelParams> params(n);
    std::vector<Contribution> contrib(n);
    for (std::size_t i = 0; i < n; ++i) {
      params[i] = ModelParams(std::vector<double>(d), {d});
      for (auto& v : params[i].values) v = g(rng);
      contrib[i] = {&params[i], static_cast<double>(weight(rng))};
    }
    const auto got = aggregate(contrib);
    double total = 0.0;
    for (const auto& c : contrib) total += c.sample_count;
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (const auto& c : contrib) s += c.sample_count * c.params->values[j];
      worst = std::max(worst, std::abs(got.values[j] - s / total));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("aggregate is permutation invariant and homogeneous") {
  Rng rng = make_rng(42, 0);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ModelParams> params(5, ModelParams(std::vector<double>(7), {7}));
    std::vector<ModelParams> scaled = params;
    std::vector<Contribution> contrib;
    std::vector<Contribution> scaled_contrib;
    const double c = 0.5 + std::abs(g(rng));
    for (std::size_t i = 0; i < params.size(); ++i) {
      for (std::size_t j = 0; j < 7; ++j) {
        params[i].values[j] = g(rng);
        scaled[i].values[j] = c * params[i].values[j];
      }
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double w = 1.0 + static_cast<double>(rng() % 50);
      contrib.push_back({&params[i], w});
      scaled_contrib.push_back({&scaled[i], w});
    }
    const auto base = aggregate(contrib);
    auto shuffled = contrib;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto perm = aggregate(shuffled);
    const auto scaled_out = aggregate(scaled_contrib);
    for (std::size_t j = 0; j < 7; ++j) {
      CHECK(perm.values[j] == doctest::Approx(base.values[j]).epsilon(1e-14));
      CHECK(scaled_out.values[j] == doctest::Approx(c * base.values[j]).epsilon(1e-13));
    }

    // Equal counts give the arithmetic mean within one ulp.
    for (auto& e : contrib) e.sample_count = 3.0;
    const auto mean = aggregate(contrib);
    for (std::size_t j = 0; j < 7; ++j) {
      long double s = 0.0L;
      for (const auto& p : params) s += p.values[j];
      const double exact = static_cast<double>(s / 5.0L);
      CHECK(std::abs(mean.values[j] - exact) <=
            std::abs(std::nextafter(exact, INFINITY) - exact));
    }
  }
}

TEST_CASE("local loss") {
  const Classifier model(2, 2);
  // Logits (100, -100) for class 0.
  const ModelParams w({50.0, 50.0, -50.0, -50.0, 0.0, 0.0}, model.shape());
  LocalDataset d;
  d.num_features = 2;
  d.push_back(std::vector<double>{1.0, 1.0}, 0);
  CHECK(local_loss(model, w, d) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(local_loss(model, w, LocalDataset{}), EmptyDataset);

  Rng rng = make_rng(43, 0);
  const Classifier lr(4, 3);
  const ModelParams theta = lr.init(rng);
  const LocalDataset three = [] {
    LocalDataset out;
    out.num_features = 4;
    out.push_back(std::vector<double>{0.5, -1.0, 2.0, 0.0}, 0);
    out.push_back(std::vector<double>{-0.3, 0.8, 0.1, 1.5}, 2);
    out.push_back(std::vector<double>{1.2, 0.4, -0.7, -0.2}, 1);
    return out;
  }();
  double expect = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    expect += reference_loss(theta, 4, 3, three.sample(i), three.labels[i]);
  }
  CHECK(local_loss(lr, theta, three) == doctest::Approx(expect / 3.0).epsilon(1e-12));
}

TEST_CASE("global loss is the sample weighted mean") {
  const Classifier model(4, 3, 5);
  Rng rng = make_rng(44, 0);
  const ModelParams w = model.init(rng);
  const auto a = blob_data(2, 1, 0);
  const auto b = blob_data(7, 1, 1);
  const std::vector<const LocalDataset*> both{&a, &b};
  const double la = local_loss(model, w, a);
  const double lb = local_loss(model, w, b);
  CHECK(global_loss(model, w, both) ==
        doctest::Approx((6.0 * la + 21.0 * lb) / 27.0).epsilon(1e-12));
}

TEST_CASE("local sgd step") {
  const Classifier model(4, 3);
  Rng rng = make_rng(45, 0);
  const ModelParams w = model.init(rng);
  const auto data = blob_data(3, 2);
  Rng r0 = make_rng(1, 0);
  CHECK(local_sgd_step(model, w, data, 0.0, r0) == w);

  // A single-sample dataset fixes the drawn index; compare against the
  // closed-form softmax gradient.
  LocalDataset one;
  one.num_features = 4;
  one.push_back(data.sample(4), data.labels[4]);
  Rng r1 = make_rng(2, 0);
  const auto next = local_sgd_step(model, w, one, 0.1, r1);
  std::vector<double> z(3);
  model.logits(w, one.sample(0), z);
  double denom = 0.0;
  for (double v : z) denom += std::exp(v);
  for (std::size_t j = 0; j < 3; ++j) {
    const double err = std::exp(z[j]) / denom - (static_cast<int>(j) == one.labels[0] ? 1.0 : 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(next.values[j * 4 + i] ==
            doctest::Approx(w.values[j * 4 + i] - 0.1 * err * one.sample(0)[i]).epsilon(1e-12));
    }
    CHECK(next.values[12 + j] == doctest::Approx(w.values[12 + j] - 0.1 * err).epsilon(1e-12));
  }
}

TEST_CASE("sgd step diverges loudly") {
  const Classifier model(2, 2);
  ModelParams w = model.zeros();
  w.values[0] = std::nan("");
  LocalDataset d;
  d.num_features = 2;
  d.push_back(std::vector<double>{1.0, 1.0}, 0);
  Rng rng = make_rng(3, 0);
  CHECK_THROWS_AS(local_sgd_step(model, w, d, 0.1, rng), NonFiniteGradient);
}

TEST_CASE("classifier gradient matches central differences") {
  Rng rng = make_rng(46, 0);
  std::size_t probes = 0;
  double worst = 0.0;
  for (std::size_t hidden : {0u, 5u}) {
    const Classifier model(4, 3, hidden);
    REQUIRE(model.num_params() <= 50);
    const auto data = blob_data(2, 3);
    for (int trial = 0; trial < 10; ++trial) {
      const ModelParams w = model.init(rng);
      const std::size_t i = rng() % data.size();
      std::vector<double> grad(model.num_params(), 0.0);
      model.loss_and_grad(w, data.sample(i), data.labels[i], grad);
      const auto s = testutil::probe_gradient(
          [&](std::span<const double> theta) {
            ModelParams p({theta.begin(), theta.end()}, w.shape);
            return model.sample_loss(p, data.sample(i), data.labels[i]);
          },
          w.values, grad, 8, rng, false, 1e-5);
      probes += s.probes;
      worst = std::max(worst, s.max_rel_err);
    }
  }
  CHECK(probes >= 100);
  CHECK(worst <= 1e-4);
}

TEST_CASE("accuracy") {
  const Classifier model(2, 2);
  LocalDataset d;
  d.num_features = 2;
  d.push_back(std::vector<double>{1.0, 0.0}, 0);
  d.push_back(std::vector<double>{0.0, 1.0}, 1);
  const ModelParams perfect({1.0, 0.0, 0.0, 1.0, 0.0, 0.0}, model.shape());
  CHECK(accuracy(model, perfect, d) == 1.0);
  const ModelParams constant({0.0, 0.0, 0.0, 0.0, 1.0, 0.0}, model.shape());
  CHECK(accuracy(model, constant, d) == 0.5);
  CHECK_THROWS_AS(accuracy(model, perfect, LocalDataset{}), EmptyDataset);

  Rng rng = make_rng(47, 0);
  const Classifier lr(4, 3);
  const ModelParams w = lr.init(rng);
  const auto data = blob_data(10, 4);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<double> z(3);
    lr.logits(w, data.sample(i), z);
    const auto best = std::max_element(z.begin(), z.end()) - z.begin();
    hits += best == data.labels[i];
  }
  CHECK(accuracy(lr, w, data) == static_cast<double>(hits) / data.size());
}

TEST_CASE("convergence check") {
  const std::vector<double> flat{1.0, 0.5};
  CHECK(convergence_check(flat, 1e-9, 0.5));
  const std::vector<double> h{1.0, 0.6};
  CHECK_FALSE(convergence_check(h, 0.05, 0.5));
  CHECK(convergence_check(h, 0.11, 0.5));
  const std::vector<double> best{0.9, 0.4, 0.45};
  CHECK(convergence_check(best, 0.06));
  CHECK_FALSE(convergence_check(best, 0.04));
}

TEST_CASE("convergence check fires on a convex instance") {
  const Classifier model(4, 3);
  const BlobTask task(3, 4, 3.0, 8);
  Rng rng = make_rng(48, 0);
  std::vector<LocalDataset> data;
  for (std::size_t k = 0; k < 4; ++k) data.push_back(task.balanced(10, rng, k));
  std::vector<const LocalDataset*> ptrs;
  for (const auto& d : data) ptrs.push_back(&d);

  // Long-run full-batch gradient descent gives the proxy optimum.
  ModelParams w = model.zeros();
  for (int it = 0; it < 4000; ++it) {
    std::vector<double> g(model.num_params(), 0.0);
    double n = 0.0;
    for (const auto& d : data) {
      for (std::size_t i = 0; i < d.size(); ++i) {
        model.loss_and_grad(w, d.sample(i), d.labels[i], g);
        n += 1.0;
      }
    }
    for (std::size_t j = 0; j < g.size(); ++j) w.values[j] -= 0.5 * g[j] / n;
  }
  const double optimum = global_loss(model, w, ptrs);

  FLConfig cfg;
  cfg.eta = 0.05;
  ServerState server{model.zeros(), {}, 0, 5};
  std::vector<DeviceJob> jobs;
  for (std::size_t k = 0; k < data.size(); ++k) jobs.push_back({k, &data[k], 1.0 + k});
  std::vector<double> history{global_loss(model, server.global, ptrs)};
  bool fired = false;
  for (std::size_t r = 0; r < cfg.max_rounds && !fired; ++r) {
    run_sfl_round(server, model, jobs, cfg);
    history.push_back(global_loss(model, server.global, ptrs));
    fired = convergence_check(history, 0.05, optimum);
  }
  CHECK(fired);
}

TEST_CASE("sfl round") {
  const Classifier model(4, 3);
  FLConfig cfg;
  const auto a = blob_data(3, 5, 0);
  const auto b = blob_data(5, 5, 1);
  const auto c = blob_data(4, 5, 2);
  ServerState server{model.zeros(), {}, 0, 11};
  const std::vector<DeviceJob> jobs{{0, &a, 1.0}, {1, &b, 5.0}, {2, &c, 2.0}};
  const ModelParams start = server.global;
  const auto rep = run_sfl_round(server, model, jobs, cfg);
  CHECK(rep.round_latency == 5.0);
  CHECK(server.round == 1);

  // Recompute each device's local model with the engine's seed derivation.
  std::vector<ModelParams> locals;
  for (const auto& j : jobs) {
    Rng rng = make_rng(11, 0, j.device_id);
    locals.push_back(local_train(model, start, *j.data, cfg.eta, cfg.local_iters, rng));
  }
  for (std::size_t p = 0; p < start.size(); ++p) {
    const double expect =
        (9.0 * locals[0].values[p] + 15.0 * locals[1].values[p] + 12.0 * locals[2].values[p]) /
        36.0;
    CHECK(server.global.values[p] == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK_THROWS_AS(run_sfl_round(server, model, std::span<const DeviceJob>{}, cfg),
                  EmptySelection);
}

TEST_CASE("sfl and afl agree for one device") {
  const Classifier model(4, 3);
  FLConfig cfg;
  cfg.afl_quorum = 1;
  const auto a = blob_data(4, 6);
  const std::vector<DeviceJob> jobs{{3, &a, 2.5}};
  ServerState s1{model.zeros(), {}, 0, 12};
  ServerState s2 = s1;
  const auto r1 = run_sfl_round(s1, model, jobs, cfg);
  const auto r2 = run_afl_round(s2, model, jobs, cfg);
  CHECK(s1.global == s2.global);
  CHECK(r1.round_latency == r2.round_latency);
}

TEST_CASE("afl round uses the fastest quorum and folds stragglers next round") {
  const Classifier model(4, 3);
  FLConfig cfg;
  cfg.afl_quorum = 2;
  const auto a = blob_data(3, 7, 0);
  const auto b = blob_data(5, 7, 1);
  const auto c = blob_data(4, 7, 2);
  ServerState server{model.zeros(), {}, 0, 13};
  const std::vector<DeviceJob> jobs{{0, &a, 3.0}, {1, &b, 1.0}, {2, &c, 2.0}};
  const ModelParams start = server.global;
  const auto rep = run_afl_round(server, model, jobs, cfg);
  CHECK(rep.round_latency == 2.0);
  CHECK(rep.responders == std::vector<std::size_t>{1, 2});
  CHECK(rep.stragglers == std::vector<std::size_t>{0});
  REQUIRE(server.pending.size() == 1);
  CHECK(server.pending[0].device_id == 0);
  CHECK(server.pending[0].sample_count == 9.0);

  std::vector<ModelParams> locals;
  for (const auto& j : jobs) {
    Rng rng = make_rng(13, 0, j.device_id);
    locals.push_back(local_train(model, start, *j.data, cfg.eta, cfg.local_iters, rng));
  }
  for (std::size_t p = 0; p < start.size(); ++p) {
    const double expect = (15.0 * locals[1].values[p] + 12.0 * locals[2].values[p]) / 27.0;
    CHECK(server.global.values[p] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(server.pending[0].params.values[p] == doctest::Approx(locals[0].values[p]).epsilon(1e-15));
  }

  // Next round: device 0 is not reselected, its stale update still joins.
  const ModelParams mid = server.global;
  const std::vector<DeviceJob> next{{1, &b, 1.0}, {2, &c, 1.5}};
  const auto rep2 = run_afl_round(server, model, next, cfg);
  CHECK(rep2.folded_pending == std::vector<std::size_t>{0});
  CHECK(server.pending.empty());
  std::vector<ModelParams> fresh;
  for (const auto& j : next) {
    Rng rng = make_rng(13, 1, j.device_id);
    fresh.push_back(local_train(model, mid, *j.data, cfg.eta, cfg.local_iters, rng));
  }
  for (std::size_t p = 0; p < start.size(); ++p) {
    const double expect =
        (9.0 * locals[0].values[p] + 15.0 * fresh[0].values[p] + 12.0 * fresh[1].values[p]) / 36.0;
    CHECK(server.global.values[p] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("quorum latency is the quorum-th smallest time") {
  const Classifier model(4, 3);
  FLConfig cfg;
  cfg.afl_quorum = 1;
  const auto a = blob_data(2, 8, 0);
  const auto b = blob_data(2, 8, 1);
  ServerState server{model.zeros(), {}, 0, 14};
  const std::vector<DeviceJob> jobs{{0, &a, 5.0}, {1, &b, 1.0}};
  CHECK(run_afl_round(server, model, jobs, cfg).round_latency == 1.0);

  FLConfig frac;
  CHECK(frac.quorum_for(10) == 6);
  CHECK(frac.quorum_for(5) == 3);
  CHECK(frac.quorum_for(1) == 1);
  frac.afl_quorum = 9;
  CHECK(frac.quorum_for(4) == 4);
}

TEST_CASE("afl with full quorum is bit-identical to sfl over 20 rounds") {
  const Classifier model(4, 3, 6);
  const BlobTask task(3, 4, 3.0, 9);
  Rng data_rng = make_rng(49, 0);
  std::vector<LocalDataset> data;
  for (std::size_t k = 0; k < 6; ++k) data.push_back(task.dirichlet(20, 0.5, data_rng, k));
  Rng init = make_rng(49, 1);
  ServerState sfl{model.init(init), {}, 0, 15};
  ServerState afl = sfl;
  FLConfig cfg;
  cfg.afl_quorum = 100;
  Rng pick = make_rng(49, 2);
  for (int r = 0; r < 20; ++r) {
    std::vector<DeviceJob> jobs;
    for (std::size_t k = 0; k < data.size(); ++k) {
      if (pick() % 3 != 0) jobs.push_back({k, &data[k], static_cast<double>(pick() % 10)});
    }
    if (jobs.empty()) jobs.push_back({0, &data[0], 1.0});
    const auto rs = run_sfl_round(sfl, model, jobs, cfg);
    const auto ra = run_afl_round(afl, model, jobs, cfg);
    CHECK(sfl.global.values == afl.global.values);
    CHECK(rs.round_latency == ra.round_latency);
    CHECK(afl.pending.empty());
  }
}

TEST_CASE("sfl global loss is non-increasing for a small step size") {
  const Classifier model(4, 3);
  const BlobTask task(3, 4, 3.0, 10);
  Rng rng = make_rng(50, 0);
  std::vector<LocalDataset> data;
  for (std::size_t k = 0; k < 5; ++k) data.push_back(task.balanced(8, rng, k));
  std::vector<const LocalDataset*> ptrs;
  std::vector<DeviceJob> jobs;
  for (std::size_t k = 0; k < data.size(); ++k) {
    ptrs.push_back(&data[k]);
    jobs.push_back({k, &data[k], 1.0});
  }
  FLConfig cfg;
  cfg.eta = 0.002;
  ServerState server{model.zeros(), {}, 0, 16};
  double prev = global_loss(model, server.global, ptrs);
  for (int r = 0; r < 20; ++r) {
    run_sfl_round(server, model, jobs, cfg);
    const double now = global_loss(model, server.global, ptrs);
    CHECK(now <= prev + 1e-12);
    prev = now;
  }
}

TEST_CASE("fl config validation") {
  FLConfig c;
  CHECK_NOTHROW(c.validate());
  c.eta = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = {};
  c.afl_quorum = 0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = {};
  c.epsilon = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
}

TEST_CASE("blob task and label noise") {
  const BlobTask task(10, 20, 3.0, 1);
  Rng rng = make_rng(51, 0);
  const auto d = task.balanced(5, rng, 3);
  CHECK(d.size() == 50);
  CHECK(d.owner == 3);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d.labels[i] == static_cast<int>(i / 5));

  auto noisy = task.balanced(200, rng);
  const auto clean = noisy;
  const std::size_t flipped = corrupt_labels(noisy, 0.3, 10, rng);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    if (noisy.labels[i] != clean.labels[i]) {
      ++changed;
      CHECK(noisy.labels[i] == (clean.labels[i] + 1) % 10);
    }
  }
  CHECK(changed == flipped);
  CHECK(static_cast<double>(flipped) / noisy.size() == doctest::Approx(0.3).epsilon(0.1));

  const auto skew = task.dirichlet(100, 0.5, rng, 1);
  CHECK(skew.size() == 100);
  for (int y : skew.labels) CHECK((y >= 0 && y < 10));
}

TEST_CASE("dataset csv round trip") {
  const BlobTask task(3, 4, 2.0, 2);
  Rng rng = make_rng(52, 0);
  const auto d = task.balanced(4, rng);
  std::stringstream ss;
  write_dataset_csv(ss, d, 3);
  std::size_t classes = 0;
  const auto back = read_dataset_csv(ss, &classes);
  CHECK(classes == 3);
  CHECK(back.labels == d.labels);
  CHECK(back.features == d.features);

  std::stringstream bad("# uavfl-dataset v1 samples=1 features=2 classes=2\nf0,f1,label\n1.0,2.0,5\n");
  CHECK_THROWS_AS(read_dataset_csv(bad), FormatError);
}
