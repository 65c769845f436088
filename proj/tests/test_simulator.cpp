#include "doctest.h"

#include <sstream>

#include "snnevo/simulator.hpp"
#include "support/oracles.hpp"
#include "support/random_networks.hpp"

using namespace snnevo;

namespace {

// Input A (id 0) -> output B (id 1), weight 2, delay 1, thresholds 1.
Network pair(int refractory_b) {
  Network n = make_io_network(ArchitectureProfile::digital(), 1, 1, 1);
  n.neurons[1].refractory_period = refractory_b;
  n.synapses.push_back({0, 0, 1, 2, 1});
  return n;
}

}  // namespace

TEST_CASE("no stimulus, no fires") {
  const auto r = run(make_io_network(ArchitectureProfile::digital(), 1, 1, 1), {}, 10);
  for (const auto& [id, c] : r.fire_counts) CHECK(c == 0);
}

TEST_CASE("single hop fires one step later") {
  const auto r = run(pair(1), {{0, 0, 2.0}}, 5, {true});
  CHECK(r.fire_times.at(0) == std::vector<std::int64_t>{0});
  CHECK(r.fire_times.at(1) == std::vector<std::int64_t>{1});
}

TEST_CASE("refractory output fires once") {
  const auto r = run(pair(3), {{0, 0, 2.0}, {0, 1, 2.0}}, 4, {true});
  CHECK(r.fire_counts.at(1) == 1);
}

TEST_CASE("charge arriving during refractory is discarded") {
  // A has refractory 0 so it fires on both injections; B (refractory 3)
  // fires at 1 and must not fire at 5 from charge delivered at 2.
  Network n = pair(3);
  n.neurons[0].refractory_period = 0;
  const auto r = run(n, {{0, 0, 2.0}, {0, 1, 2.0}}, 8, {true});
  CHECK(r.fire_times.at(0) == std::vector<std::int64_t>{0, 1});
  CHECK(r.fire_times.at(1) == std::vector<std::int64_t>{1});
}

TEST_CASE("threshold is strict and charge persists") {
  Network n = pair(1);
  n.synapses[0].weight = 1;
  const auto r = run(n, {{0, 0, 2.0}}, 5, {true});
  CHECK(r.fire_counts.at(1) == 0);
  const auto r2 = run(n, {{0, 0, 2.0}, {0, 2, 2.0}}, 6, {true});
  CHECK(r2.fire_times.at(1) == std::vector<std::int64_t>{3});
}

TEST_CASE("schedule validation") {
  CHECK_THROWS_AS(run(pair(1), {{1, 0, 1.0}}, 5), std::invalid_argument);
  CHECK_THROWS_AS(run(pair(1), {{0, 5, 1.0}}, 5), std::invalid_argument);
  CHECK_THROWS_AS(run(pair(1), {{0, -1, 1.0}}, 5), std::invalid_argument);
  CHECK_THROWS_AS(run(pair(1), {}, 0), std::invalid_argument);
}

TEST_CASE("spiking_frequency") {
  SimulationResult r;
  r.duration = 1000;
  r.fire_counts = {{1, 0}, {2, 22}, {3, 36}};
  CHECK(spiking_frequency(r, 1) == 0.0);
  CHECK(spiking_frequency(r, 2) == doctest::Approx(0.022).epsilon(1e-15));
  CHECK(spiking_frequency(r, 3) == doctest::Approx(0.036).epsilon(1e-15));
  CHECK_THROWS(spiking_frequency(r, 4));
}

TEST_CASE("matches the event-list reference on random digital networks") {
  Rng rng(123);
  for (int i = 0; i < 200; ++i) {
    const Network net = testnet::random_network(rng, ArchitectureProfile::digital(), 3, 2, uniform_int(rng, 0, 8),
                                                uniform_int(rng, 0, 40));
    InputSchedule sched;
    for (int k = 0; k < 25; ++k) {
      sched.push_back({uniform_int(rng, 0, 2), uniform_int(rng, 0, 59), static_cast<double>(uniform_int(rng, 0, 1500))});
    }
    const auto got = run(net, sched, 60, {true});
    const auto want = oracle::simulate(net, sched, 60);
    for (const auto& [id, times] : want.fires) {
      CHECK(got.fire_times.at(id) == std::vector<std::int64_t>(times.begin(), times.end()));
      CHECK(got.fire_counts.at(id) == static_cast<std::int64_t>(times.size()));
    }
  }
}

TEST_CASE("properties on random networks") {
  Rng rng(321);
  for (int i = 0; i < 100; ++i) {
    const bool analog = i % 2 == 0;
    const auto prof = analog ? ArchitectureProfile::analog(3.0) : ArchitectureProfile::digital();
    const Network net = testnet::random_network(rng, prof, 3, 2, 4, 20);
    InputSchedule sched;
    for (int k = 0; k < 20; ++k) {
      sched.push_back({uniform_int(rng, 0, 2), uniform_int(rng, 0, 49), analog ? 1.5 : 1100.0});
    }
    const auto a = run(net, sched, 50, {true});
    const auto b = run(net, sched, 50, {true});
    CHECK(a.fire_times == b.fire_times);
    for (const auto& n : net.neurons) {
      const auto c = a.fire_counts.at(n.id);
      CHECK(c == static_cast<std::int64_t>(a.fire_times.at(n.id).size()));
      CHECK(c <= (50 + n.refractory_period) / (n.refractory_period + 1));
      bool fed = false;
      for (const auto& s : net.synapses) fed = fed || s.post == n.id;
      if (n.role != NeuronRole::Input && !fed) CHECK(c == 0);
    }
  }
}

TEST_CASE("extra input never reduces fires when every event crosses threshold") {
  Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    Network net = testnet::random_network(rng, ArchitectureProfile::digital(), 2, 2, 3, 15);
    for (auto& s : net.synapses) s.weight = uniform_int(rng, 600, 1024);
    for (auto& n : net.neurons) {
      n.threshold = uniform_int(rng, 0, 599);
      n.refractory_period = 0;
    }
    InputSchedule sched;
    for (int k = 0; k < 6; ++k) sched.push_back({uniform_int(rng, 0, 1), uniform_int(rng, 0, 29), 600.0});
    InputSchedule more = sched;
    more.push_back({uniform_int(rng, 0, 1), uniform_int(rng, 0, 29), 600.0});
    const auto a = run(net, sched, 30);
    const auto b = run(net, more, 30);
    for (const auto& [id, c] : a.fire_counts) CHECK(b.fire_counts.at(id) >= c);
  }
}

TEST_CASE("merged arrivals can reduce fire counts") {
  // Two paths into h arrive at 3 and 4 and fire it twice. An extra injection
  // at 1 makes input 1 fire early, so both arrivals land at 3 and merge.
  Network n = make_io_network(ArchitectureProfile::digital(), 2, 1, 0);
  n.neurons.push_back({3, NeuronRole::Hidden, 5, 0, {}});
  n.synapses = {{0, 0, 3, 6, 3}, {1, 1, 3, 6, 2}, {2, 3, 2, 1, 1}};
  const InputSchedule base{{0, 0, 1.0}, {1, 2, 1.0}};
  const auto a = run(n, base, 10, {true});
  CHECK(a.fire_times.at(3) == std::vector<std::int64_t>{3, 4});
  InputSchedule more = base;
  more.push_back({1, 1, 1.0});
  const auto b = run(n, more, 10, {true});
  CHECK(b.fire_times.at(3) == std::vector<std::int64_t>{3});
  CHECK(b.fire_counts.at(3) < a.fire_counts.at(3));
}

TEST_CASE("advance keeps state across windows") {
  const Network n = pair(1);
  Simulator sim(n);
  const SpikeInjection first[] = {{0, 0, 2.0}};
  sim.advance(first, 1);
  CHECK(sim.now() == 1);
  sim.advance({}, 3);
  CHECK(sim.window_counts()[sim.index_of(1)] == 1);
  CHECK(sim.total_counts()[sim.index_of(0)] == 1);
  sim.reset();
  CHECK(sim.now() == 0);
  CHECK(sim.total_counts()[sim.index_of(1)] == 0);
}

TEST_CASE("trace csv") {
  const auto r = run(pair(1), {{0, 0, 2.0}}, 3, {true});
  std::ostringstream out;
  write_trace_csv(out, r);
  CHECK(out.str() == "timestep,neuron_id,event\n0,0,fire\n1,1,fire\n");
}
