#include "snnevo/simulator.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include <fmt/core.h>

namespace snnevo {

Simulator::Simulator(const Network& network) {
  const std::size_t n = network.neurons.size();
  ids_.reserve(n);
  for (const auto& neuron : network.neurons) ids_.push_back(neuron.id);
  id_lookup_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) id_lookup_.emplace_back(ids_[i], i);
  std::sort(id_lookup_.begin(), id_lookup_.end());

  is_input_.assign(n, false);
  for (int id : network.input_ids) is_input_[index_of(id)] = true;
  threshold_.resize(n);
  refractory_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    threshold_[i] = network.neurons[i].threshold;
    refractory_[i] = network.neurons[i].refractory_period;
  }

  // Outgoing synapses in CSR form.
  std::vector<std::tuple<std::size_t, std::size_t, double, int>> edges;
  edges.reserve(network.synapses.size());
  int max_delay = 1;
  for (const auto& s : network.synapses) {
    if (s.delay < 1) throw std::invalid_argument(fmt::format("synapse {} has delay < 1", s.id));
    edges.emplace_back(index_of(s.pre), index_of(s.post), s.weight, s.delay);
    max_delay = std::max(max_delay, s.delay);
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
  out_begin_.assign(n + 1, 0);
  for (const auto& e : edges) ++out_begin_[std::get<0>(e) + 1];
  for (std::size_t i = 0; i < n; ++i) out_begin_[i + 1] += out_begin_[i];
  for (const auto& [pre, post, w, d] : edges) {
    out_target_.push_back(static_cast<std::uint32_t>(post));
    out_weight_.push_back(w);
    out_delay_.push_back(d);
  }
  ring_size_ = static_cast<std::size_t>(max_delay) + 1;

  record_.assign(n, false);
  for (int id : network.output_ids) record_[index_of(id)] = true;
  reset();
}

std::size_t Simulator::index_of(int neuron_id) const {
  auto it = std::lower_bound(id_lookup_.begin(), id_lookup_.end(), std::make_pair(neuron_id, std::size_t{0}));
  if (it == id_lookup_.end() || it->first != neuron_id) {
    throw std::invalid_argument(fmt::format("unknown neuron id {}", neuron_id));
  }
  return it->second;
}

void Simulator::reset() {
  const std::size_t n = ids_.size();
  now_ = 0;
  charge_.assign(n, 0.0);
  pending_.assign(ring_size_ * n, 0.0);
  refractory_until_.assign(n, -1);
  window_counts_.assign(n, 0);
  total_counts_.assign(n, 0);
  fire_times_.assign(n, {});
}

void Simulator::set_fire_time_recording(std::vector<bool> record_by_index) {
  if (record_by_index.size() != ids_.size()) throw std::invalid_argument("recording mask size mismatch");
  record_ = std::move(record_by_index);
}

void Simulator::advance(std::span<const SpikeInjection> schedule, int duration) {
  if (duration < 0) throw std::invalid_argument("negative duration");
  injections_.clear();
  for (const auto& inj : schedule) {
    const std::size_t idx = index_of(inj.neuron_id);
    if (!is_input_[idx]) {
      throw std::invalid_argument(fmt::format("injection into non-input neuron {}", inj.neuron_id));
    }
    if (inj.time < 0 || inj.time >= duration) {
      throw std::invalid_argument(
          fmt::format("injection time {} outside window [0, {})", inj.time, duration));
    }
    injections_.push_back({now_ + inj.time, {idx, inj.charge}});
  }
  std::stable_sort(injections_.begin(), injections_.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::fill(window_counts_.begin(), window_counts_.end(), 0);
  std::size_t next = 0;
  for (int t = 0; t < duration; ++t) step(next);
}

void Simulator::step(std::size_t& next_injection) {
  const std::size_t n = ids_.size();
  const std::int64_t t = now_;
  double* slot = pending_.data() + static_cast<std::size_t>(t % static_cast<std::int64_t>(ring_size_)) * n;

  // Delivery phase.
  for (std::size_t i = 0; i < n; ++i) {
    if (slot[i] != 0.0) {
      if (t > refractory_until_[i]) charge_[i] += slot[i];
      slot[i] = 0.0;
    }
  }
  while (next_injection < injections_.size() && injections_[next_injection].first == t) {
    const auto [idx, q] = injections_[next_injection].second;
    if (t > refractory_until_[idx]) charge_[idx] += q;
    ++next_injection;
  }

  // Fire phase.
  for (std::size_t i = 0; i < n; ++i) {
    if (t <= refractory_until_[i] || !(charge_[i] > threshold_[i])) continue;
    charge_[i] = 0.0;
    refractory_until_[i] = t + refractory_[i];
    ++window_counts_[i];
    ++total_counts_[i];
    if (record_[i]) fire_times_[i].push_back(t);
    for (std::size_t e = out_begin_[i]; e < out_begin_[i + 1]; ++e) {
      const auto arrival = static_cast<std::size_t>((t + out_delay_[e]) % static_cast<std::int64_t>(ring_size_));
      pending_[arrival * n + out_target_[e]] += out_weight_[e];
    }
  }
  ++now_;
}

SimulationResult run(const Network& network, const InputSchedule& schedule, int duration,
                     SimulationOptions options) {
  if (duration < 1) throw std::invalid_argument("duration must be at least 1");
  Simulator sim(network);
  if (options.record_all_fire_times) sim.set_fire_time_recording(std::vector<bool>(sim.size(), true));
  sim.advance(schedule, duration);

  SimulationResult result;
  result.duration = duration;
  const auto& ids = sim.neuron_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) result.fire_counts[ids[i]] = sim.total_counts()[i];
  std::vector<int> recorded = network.output_ids;
  if (options.record_all_fire_times) recorded = ids;
  for (int id : recorded) result.fire_times[id] = sim.fire_times()[sim.index_of(id)];
  return result;
}

double spiking_frequency(const SimulationResult& result, int neuron_id) {
  auto it = result.fire_counts.find(neuron_id);
  if (it == result.fire_counts.end()) {
    throw std::invalid_argument(fmt::format("neuron {} not recorded", neuron_id));
  }
  if (result.duration <= 0) throw std::invalid_argument("empty simulation");
  return static_cast<double>(it->second) / static_cast<double>(result.duration);
}

void write_trace_csv(std::ostream& out, const SimulationResult& result) {
  std::vector<std::pair<std::int64_t, int>> events;
  for (const auto& [id, times] : result.fire_times) {
    for (auto t : times) events.emplace_back(t, id);
  }
  std::sort(events.begin(), events.end());
  out << "timestep,neuron_id,event\n";
  for (const auto& [t, id] : events) out << t << ',' << id << ",fire\n";
}

}  // namespace snnevo
