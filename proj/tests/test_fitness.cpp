#include "doctest.h"

#include <cmath>

#include "snnevo/fitness.hpp"
#include "support/mann_whitney.hpp"
#include "support/oracles.hpp"
#include "support/random_networks.hpp"

using namespace snnevo;

namespace {

// Evaluator returning scripted values in call order.
Evaluator scripted(std::vector<double> values, std::size_t& calls) {
  return [values = std::move(values), &calls](const Network&) { return values.at(calls++); };
}

// Network with the requested hidden/total neuron counts.
Network sized(int hidden, int total) {
  Network n = make_io_network(ArchitectureProfile::digital(), 1, total - hidden - 1);
  for (int h = 0; h < hidden; ++h) n.neurons.push_back({100 + h, NeuronRole::Hidden, 0, 1, {}});
  for (int h = 0; h < hidden; ++h) n.synapses.push_back({h, 0, 100 + h, 8, 1});
  return n;
}

}  // namespace

TEST_CASE("size_penalty_fitness examples") {
  CHECK(size_penalty_fitness(100.0, 0, 10, 0.001) == 100.0);
  CHECK(size_penalty_fitness(300.0, 10, 20, 0.0) == 300.0);
  CHECK(size_penalty_fitness(300.02, 5, 15, 0.001) == doctest::Approx(299.9199933333333).epsilon(1e-15));
  CHECK_THROWS_AS(size_penalty_fitness(1.0, 0, 0, 0.001), std::invalid_argument);
}

TEST_CASE("size_penalty_fitness decreases with hidden count") {
  for (std::size_t h = 0; h < 50; ++h) {
    CHECK(size_penalty_fitness(12.5, h + 1, 50, 0.01) < size_penalty_fitness(12.5, h, 50, 0.01));
  }
}

TEST_CASE("multi_objective_fitness examples") {
  FitnessConfig cfg;
  cfg.variation = VariationSpec{PerturbationModel::bit_flip(7), 0.1};
  Rng rng(1);

  SUBCASE("worked example") {
    std::size_t calls = 0;
    const auto r = multi_objective_fitness(sized(2, 10), scripted({300, 280, 290, 300, 260, 270}, calls), cfg, rng);
    CHECK(calls == 6);
    CHECK(r.fitness == doctest::Approx(289.97).epsilon(1e-14));
    CHECK(r.detail.performance == 300.0);
    CHECK(r.detail.size_term == doctest::Approx(299.94).epsilon(1e-14));
    CHECK(*r.detail.mean_variation_performance == doctest::Approx(280.0).epsilon(1e-14));
    CHECK(r.detail.hidden == 2);
    CHECK(r.detail.total == 10);
  }
  SUBCASE("w2 = 0 is the size penalty, bitwise") {
    cfg.w1 = 1.0;
    cfg.w2 = 0.0;
    std::size_t calls = 0;
    const auto r = multi_objective_fitness(sized(3, 9), scripted({123.456}, calls), cfg, rng);
    CHECK(calls == 1);
    CHECK(r.fitness == size_penalty_fitness(123.456, 3, 9, cfg.delta));
    CHECK_FALSE(r.detail.mean_variation_performance.has_value());
  }
  SUBCASE("equal scores and no hidden neurons give P") {
    for (double w1 : {0.0, 0.25, 0.5, 1.0}) {
      cfg.w1 = w1;
      cfg.w2 = 1.0 - w1;
      std::size_t calls = 0;
      const auto r = multi_objective_fitness(sized(0, 4), scripted(std::vector<double>(6, 42.0), calls), cfg, rng);
      CHECK(r.fitness == doctest::Approx(42.0).epsilon(1e-15));
    }
  }
  SUBCASE("variation failures carry the index") {
    int calls = 0;
    Evaluator eval = [&calls](const Network&) {
      if (calls++ == 3) throw std::runtime_error("boom");
      return 1.0;
    };
    try {
      multi_objective_fitness(sized(1, 5), eval, cfg, rng);
      FAIL("expected VariationEvaluationError");
    } catch (const VariationEvaluationError& e) {
      CHECK(e.index() == 2);
    }
  }
  SUBCASE("deterministic for a fixed rng seed") {
    Rng a(9), b(9);
    Rng g(4);
    const Network net = testnet::random_network(g, ArchitectureProfile::digital(), 3, 2, 3, 15);
    Evaluator eval = [](const Network& n) {
      double s = 0;
      for (const auto& x : n.synapses) s += x.weight;
      return s;
    };
    CHECK(multi_objective_fitness(net, eval, cfg, a).fitness == multi_objective_fitness(net, eval, cfg, b).fitness);
  }
}

TEST_CASE("fitness config validation") {
  FitnessConfig cfg;
  CHECK_THROWS(cfg.validate());  // w2 > 0 without a variation spec
  cfg.variation = VariationSpec{PerturbationModel::bit_flip(7), 0.1};
  CHECK_NOTHROW(cfg.validate());
  cfg.w1 = 0.6;
  CHECK_THROWS(cfg.validate());
  cfg.w1 = 0.5;
  cfg.delta = 1.0;
  CHECK_THROWS(cfg.validate());
  cfg.delta = 0.001;
  cfg.n_variations = 0;
  CHECK_THROWS(cfg.validate());
  CHECK_NOTHROW(FitnessConfig::size_only(0.0, 30.0).validate());
}

TEST_CASE("resilience_metric") {
  CHECK(resilience_metric(300.02, 300.02) == 0.0);
  CHECK(resilience_metric(300.02, 0.0) == 1.0);
  CHECK(resilience_metric(300.02, 150.01) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(resilience_metric(10.0, 12.0) == doctest::Approx(-0.2));
  CHECK_THROWS_AS(resilience_metric(0.0, 1.0), std::invalid_argument);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double opt = uniform_real(rng, 0.1, 400), p = uniform_real(rng, -10, 500);
    CHECK(resilience_metric(opt, p) + p / opt == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(resilience_metric(opt, p) == doctest::Approx(oracle::resilience(opt, p)).epsilon(1e-12));
  }
}

TEST_CASE("fit_normal") {
  const std::vector<double> same{2.5, 2.5, 2.5}, two{0.0, 1.0}, three{0.1, 0.2, 0.3};
  CHECK(fit_normal(same).mean == 2.5);
  CHECK(fit_normal(same).stddev == 0.0);
  CHECK(fit_normal(two).mean == 0.5);
  CHECK(fit_normal(two).stddev == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(fit_normal(three).mean == doctest::Approx(0.2).epsilon(1e-15));
  const std::vector<double> one{1.0};
  CHECK_THROWS(fit_normal(one));
}

TEST_CASE("one-sided Mann-Whitney matches frozen reference values") {
  struct Case {
    std::vector<double> x, y;
    double u, p;
  };
  const Case cases[] = {
      {{0.1, 0.2, 0.3, 0.4}, {0.5, 0.6, 0.7, 0.8, 0.9}, 0.0, 0.009982226652608022},
      {{1, 2, 2, 3, 3, 3, 4}, {2, 3, 4, 4, 5, 5, 6, 7}, 8.5, 0.012639868442946957},
      {{0.3, 0.1, 0.25, 0.2, 0.05, 0.15, 0.12, 0.3, 0.22, 0.18},
       {0.35, 0.28, 0.4, 0.33, 0.29, 0.5, 0.31, 0.26, 0.45, 0.38},
       6.0,
       0.0005017781900517652},
      {{5, 5, 5}, {5, 5, 5}, 4.5, 1.0},
  };
  for (const auto& c : cases) {
    const auto r = stats::mann_whitney_less(c.x, c.y);
    CHECK(r.u == c.u);
    CHECK(r.p_less == doctest::Approx(c.p).epsilon(1e-12));
  }
}
