#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "snnevo/environments.hpp"
#include "snnevo/network.hpp"

namespace snnevo {

struct PruneConfig {
  double frequency_ratio = 0.1;

  void validate() const;
};

struct NetworkStats {
  std::size_t hidden_count = 0;
  std::size_t synapse_count = 0;
  double avg_hidden_freq = 0.0;
  double avg_input_freq = 0.0;
  double avg_output_freq = 0.0;
  double performance = 0.0;
};

/// Role-wise mean spiking frequencies (fires per timestep) measured on the
/// task's probe workload.
NetworkStats measure_stats(const Network& network, const Task& probe);
NetworkStats stats_from_activity(const Network& network, const Activity& activity);

struct RemovedNeuron {
  int id = 0;
  double measured_freq = 0.0;
  double threshold_freq = 0.0;
  bool dead_path = false;  // removed by cleanup rather than the frequency rule
};

struct PruneRecord {
  std::vector<RemovedNeuron> removed;
  NetworkStats before;
  NetworkStats after;
};

struct PruneResult {
  Network network;
  PruneRecord record;
};

/// Removes hidden neurons with f < frequency_ratio * mean output frequency,
/// then repeatedly removes hidden neurons left without incoming or outgoing
/// synapses (self-loops don't count).
PruneResult prune(const Network& network, const Task& probe, const PruneConfig& cfg);

/// Columns: network_id,removed_neuron_id,measured_freq,threshold_freq.
void write_prune_csv(std::ostream& out, std::string_view network_id, const PruneRecord& record);
nlohmann::json to_json(const NetworkStats& stats);

}  // namespace snnevo
