#include "doctest.h"

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "snnevo/perturbation.hpp"
#include "support/oracles.hpp"
#include "support/random_networks.hpp"

using namespace snnevo;

namespace {

const ArchitectureProfile kDigital = ArchitectureProfile::digital();

// Evaluator whose value depends on every weight, so any change shows.
double weight_checksum(const Network& n) {
  double s = 0.0;
  for (const auto& x : n.synapses) s += x.weight * (x.id + 1);
  return std::abs(s);
}

std::size_t changed_weights(const Network& a, const Network& b) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < a.synapses.size(); ++i) c += a.synapses[i].weight != b.synapses[i].weight;
  return c;
}

}  // namespace

TEST_CASE("flip_bit examples") {
  CHECK(flip_bit(0, 7, kDigital) == 128);
  CHECK(flip_bit(-1, 7, kDigital) == -129);
  CHECK(flip_bit(1000, 7, kDigital) == 872);
  CHECK(flip_bit(1024, 0, kDigital) == 1024);   // 1025 clamps
  CHECK(flip_bit(0, 10, kDigital) == 1024);
  CHECK(flip_bit(1023, 10, kDigital) == 1024);  // 2047 clamps
  CHECK(flip_bit(-1, 10, kDigital) == -1024);   // -1025 clamps
  CHECK(flip_bit(-1024, 10, kDigital) == -1024);
  CHECK_THROWS(flip_bit(0, 11, kDigital));
  CHECK_THROWS(flip_bit(0, -1, kDigital));
  CHECK_THROWS(flip_bit(0, 7, ArchitectureProfile::analog()));
  CHECK_THROWS(flip_bit(2000, 7, kDigital));
}

TEST_CASE("flip_bit agrees with the bit-string oracle everywhere") {
  for (int w = -1024; w <= 1024; ++w) {
    for (int b = 0; b <= 10; ++b) REQUIRE(flip_bit(w, b, kDigital) == oracle::flip_bit(w, b));
  }
}

TEST_CASE("flip_bit is an involution away from the clamp") {
  int covered = 0;
  for (int w = -1024; w <= 1024; ++w) {
    for (int b = 0; b <= 10; ++b) {
      std::string bits = oracle::to_bits12(w);
      bits[static_cast<std::size_t>(11 - b)] ^= 1;  // '0' <-> '1'
      const int raw = oracle::from_bits12(bits);
      if (raw < -1024 || raw > 1024) continue;
      ++covered;
      REQUIRE(flip_bit(flip_bit(w, b, kDigital), b, kDigital) == w);
    }
  }
  CHECK(covered > 20000);
}

TEST_CASE("diminish") {
  CHECK(diminish(0.5, 0.05, DiminishMode::TowardZero) == doctest::Approx(0.45).epsilon(1e-15));
  CHECK(diminish(-0.5, 0.05, DiminishMode::TowardZero) == doctest::Approx(-0.45).epsilon(1e-15));
  CHECK(diminish(0.03, 0.05, DiminishMode::TowardZero) == 0.0);
  CHECK(diminish(-0.03, 0.05, DiminishMode::TowardZero) == 0.0);
  CHECK(diminish(0.5, 0.1, DiminishMode::Subtract) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(diminish(-0.95, 0.1, DiminishMode::Subtract) == -1.0);
  Rng rng(8);
  for (int i = 0; i < 5000; ++i) {
    const double w = uniform_real(rng, -1, 1), e = uniform_real(rng, 0.0001, 0.5);
    const double d = diminish(w, e, DiminishMode::TowardZero);
    CHECK(std::abs(d) <= std::abs(w));
    CHECK(d * w >= 0.0);
  }
}

TEST_CASE("model validation") {
  CHECK_THROWS(PerturbationModel::diminish(0.05, 0.01).validate());
  CHECK_THROWS(PerturbationModel::subtract(0.0, 0.1).validate());
  CHECK_NOTHROW(PerturbationModel::diminish(0.05, 0.05).validate());
  CHECK_THROWS(PerturbationModel::bit_flip(7).validate_for(ArchitectureProfile::analog()));
  CHECK_THROWS(PerturbationModel::diminish(0.01, 0.1).validate_for(kDigital));
}

TEST_CASE("perturb") {
  Rng g(12);
  const Network net = testnet::random_network(g, kDigital, 3, 2, 3, 20);
  REQUIRE(net.synapse_count() >= 5);
  Rng rng(1);
  SUBCASE("empty id list is the identity") {
    CHECK(perturb(net, {}, PerturbationModel::bit_flip(7), rng) == net);
  }
  SUBCASE("one bit flip changes exactly one weight by 128 before clamping") {
    const int id = net.synapses[2].id;
    const Network p = perturb(net, std::vector<int>{id}, PerturbationModel::bit_flip(7), rng);
    CHECK(changed_weights(net, p) == 1);
    const double before = net.synapses[2].weight, after = p.synapses[2].weight;
    CHECK(after == oracle::flip_bit(static_cast<int>(before), 7));
    if (std::abs(after) < 1024) CHECK(std::abs(after - before) == 128.0);
    for (std::size_t i = 0; i < net.synapses.size(); ++i) {
      CHECK(p.synapses[i].pre == net.synapses[i].pre);
      CHECK(p.synapses[i].delay == net.synapses[i].delay);
    }
    CHECK(p.neurons == net.neurons);
  }
  SUBCASE("unknown id") {
    CHECK_THROWS_AS(perturb(net, std::vector<int>{999}, PerturbationModel::bit_flip(7), rng), std::invalid_argument);
  }
  SUBCASE("deterministic with ranged epsilon") {
    Rng ga(5);
    const Network analog = testnet::random_network(ga, ArchitectureProfile::analog(), 3, 2, 3, 20);
    std::vector<int> ids{analog.synapses[0].id, analog.synapses[3].id};
    Rng r1(77), r2(77);
    const auto model = PerturbationModel::subtract(0.008, 0.1);
    const Network a = perturb(analog, ids, model, r1), b = perturb(analog, ids, model, r2);
    CHECK(a == b);
    for (int k : {0, 3}) {
      const double d = analog.synapses[static_cast<std::size_t>(k)].weight - a.synapses[static_cast<std::size_t>(k)].weight;
      if (a.synapses[static_cast<std::size_t>(k)].weight > -1.0) {
        CHECK(d >= 0.008 - 1e-12);
        CHECK(d < 0.1 + 1e-12);
      }
    }
  }
}

TEST_CASE("sample_variation") {
  Rng g(21);
  SUBCASE("p = 0 is the identity") {
    const Network net = testnet::random_network(g, kDigital, 3, 2, 4, 30);
    Rng rng(1);
    CHECK(sample_variation(net, {PerturbationModel::bit_flip(7), 0.0}, rng) == net);
  }
  SUBCASE("p = 1 diminishes every weight") {
    const Network net = testnet::random_network(g, ArchitectureProfile::analog(), 3, 2, 4, 30);
    Rng rng(1);
    const Network v = sample_variation(net, {PerturbationModel::diminish(0.05, 0.05), 1.0}, rng);
    for (std::size_t i = 0; i < net.synapses.size(); ++i) {
      CHECK(v.synapses[i].weight == oracle::diminish_toward_zero(net.synapses[i].weight, 0.05));
    }
  }
  SUBCASE("mean flipped count with p = 0.1 on 100 synapses") {
    Network net = make_io_network(kDigital, 10, 10);
    int id = 0;
    for (int pre = 0; pre < 10; ++pre) {
      for (int post = 10; post < 20; ++post) net.synapses.push_back({id++, pre, post, 0, 1});
    }
    REQUIRE(net.synapse_count() == 100);
    Rng rng(2024);
    double total = 0.0;
    for (int i = 0; i < 10000; ++i) {
      total += static_cast<double>(changed_weights(net, sample_variation(net, {PerturbationModel::bit_flip(7), 0.1}, rng)));
    }
    CHECK(std::abs(total / 10000.0 - 10.0) <= 1.0);
  }
}

TEST_CASE("sweep") {
  Rng g(31);
  const Network net = testnet::random_network(g, kDigital, 3, 2, 3, 12);
  const Evaluator eval = weight_checksum;
  SweepConfig cfg;
  cfg.model = PerturbationModel::bit_flip(7);
  cfg.optimal_performance = 1e5;
  cfg.failure_threshold = weight_checksum(net);
  cfg.threads = 2;

  SUBCASE("defaults give 500 records and aggregates match the rows") {
    const auto rep = sweep(net, eval, cfg);
    CHECK(rep.records.size() == 500);
    std::map<int, int> per_k;
    double perf = 0.0, degr = 0.0;
    for (const auto& r : rep.records) {
      ++per_k[r.k];
      CHECK(static_cast<int>(r.synapse_ids.size()) == r.k);
      CHECK(std::set<int>(r.synapse_ids.begin(), r.synapse_ids.end()).size() == r.synapse_ids.size());
      CHECK(r.degradation == doctest::Approx(oracle::resilience(cfg.optimal_performance, r.performance)));
      Rng unused(0);
      CHECK(r.performance == weight_checksum(perturb(net, r.synapse_ids, cfg.model, unused)));
      perf += r.performance;
      degr += r.degradation;
    }
    for (int k = 1; k <= 5; ++k) CHECK(per_k[k] == 100);
    CHECK(rep.aggregates.mean_performance == doctest::Approx(perf / 500).epsilon(1e-12));
    CHECK(rep.aggregates.mean_degradation == doctest::Approx(degr / 500).epsilon(1e-12));
    CHECK(rep.aggregates == aggregate(rep.records, cfg));
    std::size_t hist_total = 0;
    for (auto c : rep.aggregates.performance_histogram.counts) hist_total += c;
    CHECK(hist_total == 500);
  }
  SUBCASE("deterministic regardless of thread count") {
    cfg.threads = 1;
    const auto a = sweep(net, eval, cfg);
    cfg.threads = 3;
    const auto b = sweep(net, eval, cfg);
    CHECK(a.records == b.records);
  }
  SUBCASE("k = 0 control rows equal the base performance") {
    cfg.k_values = {0, 1};
    cfg.trials_per_k = 3;
    for (const auto& r : sweep(net, eval, cfg).records) {
      if (r.k == 0) CHECK(r.performance == weight_checksum(net));
    }
  }
  SUBCASE("errors") {
    cfg.trials_per_k = 0;
    CHECK_THROWS_WITH(sweep(net, eval, cfg), doctest::Contains("empty report"));
    cfg.trials_per_k = 1;
    cfg.k_values = {1, 13};
    CHECK_THROWS_WITH(sweep(net, eval, cfg), doctest::Contains("too few synapses"));
  }
  SUBCASE("csv round trip") {
    cfg.trials_per_k = 4;
    const auto rep = sweep(net, eval, cfg);
    std::stringstream ss;
    write_sweep_csv(ss, "n1", rep.records);
    CHECK(ss.str().rfind("network_id,k,trial,synapse_ids,performance,degradation\n", 0) == 0);
    CHECK(read_sweep_csv(ss) == rep.records);
  }
  SUBCASE("summary json") {
    cfg.trials_per_k = 4;
    const auto rep = sweep(net, eval, cfg);
    const auto j = to_json(rep.aggregates, cfg);
    CHECK(j.at("mean_degradation").get<double>() == rep.aggregates.mean_degradation);
    CHECK(j.at("mean_resilience").get<double>() == doctest::Approx(1.0 - rep.aggregates.mean_degradation));
    CHECK(j.at("fraction_below_threshold").get<double>() == rep.aggregates.fraction_below_threshold);
    CHECK(j.contains("histogram"));
  }
}

TEST_CASE("histogram edges") {
  const std::vector<double> v{-1.0, 0.0, 0.49, 0.5, 1.0, 2.0};
  const auto h = make_histogram(v, 0.0, 1.0, 2);
  CHECK(h.counts == std::vector<std::size_t>{3, 3});
}
