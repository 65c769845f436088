#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "snnevo/network.hpp"

namespace snnevo {

/// Charge injected into an input neuron at a timestep relative to the start
/// of a simulation window.
struct SpikeInjection {
  int neuron_id = 0;
  int time = 0;
  double charge = 0.0;

  bool operator==(const SpikeInjection&) const = default;
};

using InputSchedule = std::vector<SpikeInjection>;

struct SimulationResult {
  std::int64_t duration = 0;
  std::map<int, std::int64_t> fire_counts;
  /// Always present for outputs; for every neuron when requested.
  std::map<int, std::vector<std::int64_t>> fire_times;
};

struct SimulationOptions {
  bool record_all_fire_times = false;
};

/// Discrete-time integrate-and-fire simulator with a persistent state.
///
/// Each timestep t:
///   1. charge arriving at t (synaptic events and injections) is added to the
///      target's accumulator, or discarded if the target is refractory;
///   2. every non-refractory neuron whose charge strictly exceeds its threshold
///      fires, resets to zero, is refractory for the next refractory_period
///      steps and sends weight-sized events that arrive at t + delay.
/// Charge does not leak.
class Simulator {
 public:
  explicit Simulator(const Network& network);

  /// Back to time zero with empty accumulators and queues.
  void reset();

  /// Runs `duration` timesteps. Injection times are relative to the current
  /// time. Throws std::invalid_argument for injections into non-input neurons
  /// or outside [0, duration).
  void advance(std::span<const SpikeInjection> schedule, int duration);

  std::int64_t now() const { return now_; }
  std::size_t size() const { return ids_.size(); }
  std::size_t index_of(int neuron_id) const;
  const std::vector<int>& neuron_ids() const { return ids_; }

  /// Fires in the most recent advance() call, by neuron index.
  std::span<const std::int64_t> window_counts() const { return window_counts_; }
  /// Fires since the last reset, by neuron index.
  std::span<const std::int64_t> total_counts() const { return total_counts_; }

  void set_fire_time_recording(std::vector<bool> record_by_index);
  const std::vector<std::vector<std::int64_t>>& fire_times() const { return fire_times_; }

 private:
  void step(std::size_t& next_injection);

  std::vector<int> ids_;
  std::vector<std::pair<int, std::size_t>> id_lookup_;  // sorted (id, index)
  std::vector<bool> is_input_;
  std::vector<double> threshold_;
  std::vector<int> refractory_;
  std::vector<std::size_t> out_begin_;
  std::vector<std::uint32_t> out_target_;
  std::vector<double> out_weight_;
  std::vector<int> out_delay_;
  std::size_t ring_size_ = 1;

  std::int64_t now_ = 0;
  std::vector<double> charge_;
  std::vector<double> pending_;  // ring_size_ x size()
  std::vector<std::int64_t> refractory_until_;
  std::vector<std::int64_t> window_counts_;
  std::vector<std::int64_t> total_counts_;
  std::vector<bool> record_;
  std::vector<std::vector<std::int64_t>> fire_times_;
  std::vector<std::pair<std::int64_t, std::pair<std::size_t, double>>> injections_;
};

/// Fresh simulation of `duration` >= 1 timesteps. Pure.
SimulationResult run(const Network& network, const InputSchedule& schedule, int duration,
                     SimulationOptions options = {});

/// Fires per timestep for a recorded neuron.
double spiking_frequency(const SimulationResult& result, int neuron_id);

/// CSV trace with columns timestep,neuron_id,event ordered by time then id.
void write_trace_csv(std::ostream& out, const SimulationResult& result);

}  // namespace snnevo
