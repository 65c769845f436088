#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "snnevo/environments.hpp"

using namespace snnevo;

namespace {

// Classic cart-pole equations, written out independently.
CartPoleState reference_step(const CartPoleState& s, double f) {
  const double g = 9.8, mc = 1.0, mp = 0.1, l = 0.5, dt = 0.02;
  const double m = mc + mp;
  const double st = std::sin(s.theta), ct = std::cos(s.theta);
  const double b = (f + mp * l * s.theta_dot * s.theta_dot * st) / m;
  const double th_acc = (g * st - ct * b) / (l * (4.0 / 3.0 - mp * ct * ct / m));
  const double x_acc = b - mp * l * th_acc * ct / m;
  CartPoleState n;
  n.x_dot = s.x_dot + dt * x_acc;
  n.theta_dot = s.theta_dot + dt * th_acc;
  n.x = s.x + dt * n.x_dot;
  n.theta = s.theta + dt * n.theta_dot;
  return n;
}

double unforced_balance_time(std::uint64_t seed) {
  const CartPoleConfig cfg;
  CartPoleState s = initial_cartpole_state(seed, cfg);
  for (int n = 1; n <= 15001; ++n) {
    s = reference_step(s, 0.0);
    if (std::abs(s.x) > 2.4 || std::abs(s.theta) > 12.0 * std::numbers::pi / 180.0) return n * 0.02;
  }
  return 300.02;
}

Network pole_net() { return make_io_network(ArchitectureProfile::digital(), 8, 2, 0); }

// Tilt and tilt rate reflexes: push toward the side the pole leans.
Network reflex_net() {
  Network n = pole_net();
  n.synapses = {{0, 4, 8, 1024, 1}, {1, 5, 9, 1024, 1}, {2, 6, 8, 1024, 1}, {3, 7, 9, 1024, 1}};
  return n;
}

double nearest_template_accuracy(const ClassificationDataset& d) {
  const std::size_t len = d.feature_length();
  int correct = 0;
  for (std::size_t i = 0; i < d.features.size(); ++i) {
    int best = 0;
    double best_dist = INFINITY;
    for (int k = 0; k < d.num_classes; ++k) {
      double dist = 0.0;
      for (std::size_t j = 0; j < len; ++j) {
        const double t = 0.25 * std::sin(2 * std::numbers::pi * (2.0 + 2.0 * k) * static_cast<double>(j) /
                                         static_cast<double>(len));
        dist += (d.features[i][j] - t) * (d.features[i][j] - t);
      }
      if (dist < best_dist) {
        best_dist = dist;
        best = k;
      }
    }
    correct += best == d.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(d.features.size());
}

double nearest_frequency_accuracy(const ClassificationDataset& d) {
  const std::size_t len = d.feature_length();
  int correct = 0;
  for (std::size_t i = 0; i < d.features.size(); ++i) {
    int best = 0;
    double best_power = -1.0;
    for (int k = 0; k < d.num_classes; ++k) {
      double re = 0.0, im = 0.0;
      for (std::size_t j = 0; j < len; ++j) {
        const double a = 2 * std::numbers::pi * (2.0 + 2.0 * k) * static_cast<double>(j) / static_cast<double>(len);
        re += d.features[i][j] * std::cos(a);
        im += d.features[i][j] * std::sin(a);
      }
      if (re * re + im * im > best_power) {
        best_power = re * re + im * im;
        best = k;
      }
    }
    correct += best == d.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(d.features.size());
}

}  // namespace

TEST_CASE("cartpole_step fixed point and symmetry") {
  const CartPoleConfig cfg;
  CHECK(cartpole_step({}, 0.0, cfg) == CartPoleState{});
  const CartPoleState s{0.1, -0.2, 0.03, 0.4};
  const auto a = cartpole_step(s, 10.0, cfg);
  const auto b = cartpole_step({-s.x, -s.x_dot, -s.theta, -s.theta_dot}, -10.0, cfg);
  CHECK(b.x == doctest::Approx(-a.x).epsilon(1e-14));
  CHECK(b.x_dot == doctest::Approx(-a.x_dot).epsilon(1e-14));
  CHECK(b.theta == doctest::Approx(-a.theta).epsilon(1e-14));
  CHECK(b.theta_dot == doctest::Approx(-a.theta_dot).epsilon(1e-14));
}

TEST_CASE("unstable equilibrium: theta grows") {
  const CartPoleConfig cfg;
  const auto n = cartpole_step({0, 0, 0.01, 0}, 0.0, cfg);
  CHECK(n.theta > 0.01);
  CHECK(n.theta_dot > 0.0);
  const auto r = reference_step({0, 0, 0.01, 0}, 0.0);
  CHECK(n.theta == doctest::Approx(r.theta).epsilon(1e-14));
  CHECK(n.x == doctest::Approx(r.x).epsilon(1e-14));
}

TEST_CASE("zero-synapse network falls like the unforced pole") {
  const CartPoleConfig cfg;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const double t = run_pb_episode(pole_net(), default_pole_encoder(), {DecodeMode::BangBang, {}, 10.0}, cfg, seed);
    CHECK(t == doctest::Approx(unforced_balance_time(seed)).epsilon(1e-12));
    CHECK(t < 15.0);
  }
}

TEST_CASE("max_time zero returns zero") {
  CartPoleConfig cfg;
  cfg.max_time = 0.0;
  CHECK(run_pb_episode(reflex_net(), default_pole_encoder(), {DecodeMode::BangBang, {}, 10.0}, cfg, 1) == 0.0);
}

TEST_CASE("reflex network outlasts the empty network") {
  const CartPoleConfig cfg;
  const DecoderConfig dec{DecodeMode::BangBang, {}, 10.0};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double reflex = run_pb_episode(reflex_net(), default_pole_encoder(), dec, cfg, seed);
    const double empty = run_pb_episode(pole_net(), default_pole_encoder(), dec, cfg, seed);
    CHECK(reflex > empty);
    CHECK(reflex <= cfg.max_time);
  }
}

TEST_CASE("episode cap is exactly max_time") {
  CartPoleConfig cfg;
  cfg.max_time = 300.02;
  cfg.fail_x = 1e9;
  cfg.fail_theta = 1e9;
  const double t = run_pb_episode(pole_net(), default_pole_encoder(), {DecodeMode::BangBang, {}, 10.0}, cfg, 3);
  CHECK(t == 300.02);
}

TEST_CASE("pole episode arity mismatch") {
  const CartPoleConfig cfg;
  const Network bad = make_io_network(ArchitectureProfile::digital(), 4, 2);
  CHECK_THROWS_AS(run_pb_episode(bad, default_pole_encoder(), {DecodeMode::BangBang, {}, 10.0}, cfg, 1),
                  std::invalid_argument);
  const Network three = make_io_network(ArchitectureProfile::digital(), 8, 3);
  CHECK_THROWS_AS(run_pb_episode(three, default_pole_encoder(), {DecodeMode::BangBang, {}, 10.0}, cfg, 1),
                  std::invalid_argument);
}

TEST_CASE("signal dataset") {
  SUBCASE("noise-free classes are separable by frequency") {
    for (int classes = 2; classes <= 4; ++classes) {
      CHECK(nearest_frequency_accuracy(generate_signal_dataset(200, classes, 0.0, 5)) == 1.0);
    }
  }
  SUBCASE("deterministic") {
    CHECK(generate_signal_dataset(50, 3, 0.2, 9) == generate_signal_dataset(50, 3, 0.2, 9));
    CHECK_FALSE(generate_signal_dataset(50, 3, 0.2, 9) == generate_signal_dataset(50, 3, 0.2, 10));
  }
  SUBCASE("sigma 0.5 is hard but informative") {
    const double acc = nearest_template_accuracy(generate_signal_dataset(500, 2, 0.5, 1));
    CHECK(acc > 0.5);
    CHECK(acc < 1.0);
  }
  SUBCASE("labels and split") {
    const auto d = generate_signal_dataset(101, 3, 0.1, 2);
    CHECK(d.train.size() + d.test.size() == 101);
    std::vector<int> seen(101, 0);
    for (auto i : d.train) ++seen[i];
    for (auto i : d.test) ++seen[i];
    for (int s : seen) CHECK(s == 1);
    for (std::size_t i = 0; i < d.labels.size(); ++i) CHECK(d.labels[i] == static_cast<int>(i % 3));
  }
  SUBCASE("csv round trip keeps features and labels") {
    const auto d = generate_signal_dataset(20, 2, 0.3, 4);
    std::stringstream ss;
    write_dataset_csv(ss, d);
    const auto back = read_dataset_csv(ss);
    CHECK(back.labels == d.labels);
    CHECK(back.features == d.features);
    CHECK(ss.str().rfind("f0,f1,", 0) == 0);
  }
  CHECK_THROWS(generate_signal_dataset(10, 1, 0.1, 1));
}

TEST_CASE("classification") {
  const auto data = generate_signal_dataset(100, 2, 0.3, 3);
  const Network silent = make_io_network(ArchitectureProfile::digital(), 64, 2, 1023);
  const auto enc = default_signal_encoder(64);
  const DecoderConfig dec{DecodeMode::Argmax, {}, 0.0};

  SUBCASE("silent network predicts label 0") {
    for (Split split : {Split::Train, Split::Test}) {
      const auto& idx = split == Split::Train ? data.train : data.test;
      int zeros = 0;
      for (auto i : idx) zeros += data.labels[i] == 0;
      const double acc = run_classification(silent, enc, dec, data, split);
      CHECK(acc == doctest::Approx(static_cast<double>(zeros) / static_cast<double>(idx.size())));
    }
  }
  SUBCASE("empty split") {
    auto d = data;
    d.test.clear();
    CHECK_THROWS_WITH_AS(run_classification(silent, enc, dec, d, Split::Test), "empty split", std::invalid_argument);
  }
  SUBCASE("deterministic and in range") {
    Network n = make_io_network(ArchitectureProfile::digital(), 64, 2, 0);
    for (int i = 0; i < 64; i += 3) n.synapses.push_back({i, i, 64 + (i % 2), 700, 1 + i % 5});
    const double a = run_classification(n, enc, dec, data, Split::Train);
    CHECK(a == run_classification(n, enc, dec, data, Split::Train));
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
  SUBCASE("arity mismatch") {
    const Network n = make_io_network(ArchitectureProfile::digital(), 10, 2);
    CHECK_THROWS_AS(run_classification(n, enc, dec, data, Split::Train), std::invalid_argument);
  }
}

TEST_CASE("task wrappers") {
  PoleBalanceSettings s;
  s.physics.max_time = 20.0;
  s.episode_seeds = {1, 2, 3};
  const PoleBalanceTask task(s);
  CHECK(task.input_count() == 8);
  CHECK(task.output_count() == 2);
  CHECK(task.optimal_performance() == 20.0);
  double sum = 0.0;
  for (std::uint64_t seed : s.episode_seeds) {
    sum += run_pb_episode(reflex_net(), s.encoder, {DecodeMode::BangBang, {}, 10.0}, s.physics, seed);
  }
  CHECK(task.evaluate(reflex_net()) == doctest::Approx(sum / 3.0));
  const Activity act = task.probe(reflex_net());
  CHECK(act.timesteps > 0);
  CHECK(act.fire_counts.size() == reflex_net().neuron_count());
}
