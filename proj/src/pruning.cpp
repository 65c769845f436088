#include "snnevo/pruning.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include <fmt/core.h>

namespace snnevo {

void PruneConfig::validate() const {
  if (!(frequency_ratio > 0.0)) throw std::invalid_argument("prune.frequency_ratio must be positive");
}

namespace {

double frequency(const Activity& activity, int id) {
  if (activity.timesteps <= 0) return 0.0;
  auto it = activity.fire_counts.find(id);
  if (it == activity.fire_counts.end()) throw std::invalid_argument(fmt::format("neuron {} not in probe", id));
  return static_cast<double>(it->second) / static_cast<double>(activity.timesteps);
}

}  // namespace

NetworkStats stats_from_activity(const Network& network, const Activity& activity) {
  NetworkStats s;
  s.hidden_count = network.hidden_count();
  s.synapse_count = network.synapse_count();
  s.performance = activity.performance;
  double sums[3] = {0, 0, 0};
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& n : network.neurons) {
    const auto r = static_cast<std::size_t>(n.role);
    sums[r] += frequency(activity, n.id);
    ++counts[r];
  }
  auto mean = [&](NeuronRole role) {
    const auto r = static_cast<std::size_t>(role);
    return counts[r] == 0 ? 0.0 : sums[r] / static_cast<double>(counts[r]);
  };
  s.avg_input_freq = mean(NeuronRole::Input);
  s.avg_hidden_freq = mean(NeuronRole::Hidden);
  s.avg_output_freq = mean(NeuronRole::Output);
  return s;
}

NetworkStats measure_stats(const Network& network, const Task& probe) {
  if (static_cast<int>(network.input_ids.size()) != probe.input_count() ||
      static_cast<int>(network.output_ids.size()) != probe.output_count()) {
    throw std::invalid_argument(fmt::format("network has {}/{} inputs/outputs, probe expects {}/{}",
                                            network.input_ids.size(), network.output_ids.size(),
                                            probe.input_count(), probe.output_count()));
  }
  return stats_from_activity(network, probe.probe(network));
}

PruneResult prune(const Network& network, const Task& probe, const PruneConfig& cfg) {
  cfg.validate();
  const Activity activity = probe.probe(network);
  PruneResult result{network, {}};
  result.record.before = stats_from_activity(network, activity);

  const double threshold = cfg.frequency_ratio * result.record.before.avg_output_freq;
  std::map<int, double> freq;
  for (const auto& n : network.neurons) {
    if (n.role == NeuronRole::Hidden) freq[n.id] = frequency(activity, n.id);
  }

  std::set<int> removed;
  for (const auto& [id, f] : freq) {
    if (f < threshold) {
      removed.insert(id);
      result.record.removed.push_back({id, f, threshold, false});
    }
  }
  auto& net = result.network;
  auto drop = [&net](const std::set<int>& ids) {
    std::erase_if(net.neurons, [&](const Neuron& n) { return ids.contains(n.id); });
    std::erase_if(net.synapses, [&](const Synapse& s) { return ids.contains(s.pre) || ids.contains(s.post); });
  };
  drop(removed);

  // Dead-path cleanup until nothing changes.
  for (;;) {
    std::set<int> has_in, has_out;
    for (const auto& s : net.synapses) {
      if (s.pre == s.post) continue;
      has_out.insert(s.pre);
      has_in.insert(s.post);
    }
    std::set<int> dead;
    for (const auto& n : net.neurons) {
      if (n.role == NeuronRole::Hidden && (!has_in.contains(n.id) || !has_out.contains(n.id))) dead.insert(n.id);
    }
    if (dead.empty()) break;
    for (int id : dead) result.record.removed.push_back({id, freq.at(id), threshold, true});
    drop(dead);
  }

  result.record.after = stats_from_activity(net, probe.probe(net));
  return result;
}

void write_prune_csv(std::ostream& out, std::string_view network_id, const PruneRecord& record) {
  out << "network_id,removed_neuron_id,measured_freq,threshold_freq\n";
  for (const auto& r : record.removed) {
    out << fmt::format("{},{},{},{}\n", network_id, r.id, r.measured_freq, r.threshold_freq);
  }
}

nlohmann::json to_json(const NetworkStats& s) {
  return {{"hidden_count", s.hidden_count},     {"synapse_count", s.synapse_count},
          {"avg_hidden_freq", s.avg_hidden_freq}, {"avg_input_freq", s.avg_input_freq},
          {"avg_output_freq", s.avg_output_freq}, {"performance", s.performance}};
}

}  // namespace snnevo
