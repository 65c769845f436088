#include "snnevo/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/core.h>

#include "snnevo/fitness.hpp"
#include "snnevo/parallel.hpp"

namespace snnevo {

PerturbationModel PerturbationModel::bit_flip(int bit_index) {
  return {FaultKind::BitFlip, bit_index, {}};
}

PerturbationModel PerturbationModel::diminish(double lo, double hi) {
  return {FaultKind::DiminishTowardZero, 0, {lo, hi}};
}

PerturbationModel PerturbationModel::subtract(double lo, double hi) {
  return {FaultKind::Subtract, 0, {lo, hi}};
}

void PerturbationModel::validate() const {
  if (kind == FaultKind::BitFlip) {
    if (bit_index < 0 || bit_index >= kWeightRegisterBits - 1) {
      throw std::invalid_argument(fmt::format("bit_index {} outside [0, {}]", bit_index, kWeightRegisterBits - 2));
    }
    return;
  }
  if (epsilon.fixed()) {
    if (!(epsilon.lo > 0.0)) throw std::invalid_argument("epsilon must be positive");
  } else if (!(epsilon.lo > 0.0 && epsilon.lo < epsilon.hi)) {
    throw std::invalid_argument("epsilon range must satisfy 0 < lo < hi");
  }
}

void PerturbationModel::validate_for(const ArchitectureProfile& profile) const {
  validate();
  if (kind == FaultKind::BitFlip && profile.kind != ProfileKind::Digital) {
    throw std::invalid_argument("bit flips apply to the digital profile only");
  }
  if (kind != FaultKind::BitFlip && profile.kind != ProfileKind::Analog) {
    throw std::invalid_argument("diminish/subtract faults apply to the analog profile only");
  }
}

void VariationSpec::validate_for(const ArchitectureProfile& profile) const {
  model.validate_for(profile);
  if (!(per_synapse_probability >= 0.0 && per_synapse_probability <= 1.0)) {
    throw std::invalid_argument("per_synapse_probability must be in [0, 1]");
  }
}

int flip_bit(int weight, int bit_index, const ArchitectureProfile& profile) {
  if (profile.kind != ProfileKind::Digital) throw std::invalid_argument("flip_bit needs the digital profile");
  if (bit_index < 0 || bit_index >= kWeightRegisterBits - 1) {
    throw std::invalid_argument(fmt::format("bit_index {} outside [0, {}]", bit_index, kWeightRegisterBits - 2));
  }
  if (weight < profile.weight_min || weight > profile.weight_max) {
    throw std::invalid_argument(fmt::format("weight {} outside the profile range", weight));
  }
  constexpr std::uint32_t mask = (1u << kWeightRegisterBits) - 1;
  constexpr std::uint32_t sign = 1u << (kWeightRegisterBits - 1);
  std::uint32_t reg = static_cast<std::uint32_t>(weight) & mask;
  reg ^= 1u << bit_index;
  const int decoded = (reg & sign) ? static_cast<int>(reg) - static_cast<int>(1u << kWeightRegisterBits)
                                   : static_cast<int>(reg);
  return static_cast<int>(std::clamp<double>(decoded, profile.weight_min, profile.weight_max));
}

double diminish(double weight, double epsilon, DiminishMode mode) {
  if (mode == DiminishMode::TowardZero) {
    const double magnitude = std::max(std::abs(weight) - epsilon, 0.0);
    return weight < 0.0 ? -magnitude : magnitude;
  }
  return std::clamp(weight - epsilon, -1.0, 1.0);
}

namespace {

double draw_epsilon(const EpsilonRange& eps, Rng& rng) {
  return eps.fixed() ? eps.lo : uniform_real(rng, eps.lo, eps.hi);
}

void apply_fault(Synapse& s, const PerturbationModel& model, const ArchitectureProfile& profile, Rng& rng) {
  switch (model.kind) {
    case FaultKind::BitFlip:
      s.weight = flip_bit(static_cast<int>(s.weight), model.bit_index, profile);
      break;
    case FaultKind::DiminishTowardZero:
      s.weight = diminish(s.weight, draw_epsilon(model.epsilon, rng), DiminishMode::TowardZero);
      break;
    case FaultKind::Subtract:
      s.weight = std::clamp(s.weight - draw_epsilon(model.epsilon, rng), profile.weight_min, profile.weight_max);
      break;
  }
}

}  // namespace

Network perturb(const Network& network, std::span<const int> synapse_ids, const PerturbationModel& model,
                Rng& rng) {
  model.validate_for(network.profile);
  Network out = network;
  std::set<int> done;
  for (int id : synapse_ids) {
    auto it = std::find_if(out.synapses.begin(), out.synapses.end(), [id](const Synapse& s) { return s.id == id; });
    if (it == out.synapses.end()) throw std::invalid_argument(fmt::format("unknown synapse id {}", id));
    if (!done.insert(id).second) continue;
    apply_fault(*it, model, out.profile, rng);
  }
  return out;
}

Network sample_variation(const Network& network, const VariationSpec& spec, Rng& rng) {
  spec.validate_for(network.profile);
  Network out = network;
  for (auto& s : out.synapses) {
    if (bernoulli(rng, spec.per_synapse_probability)) apply_fault(s, spec.model, out.profile, rng);
  }
  return out;
}

// ---------------------------------------------------------------------------

void SweepConfig::validate() const {
  if (k_values.empty()) throw std::invalid_argument("sweep needs at least one k value");
  for (int k : k_values) {
    if (k < 0) throw std::invalid_argument("sweep k values must be non-negative");
  }
  if (trials_per_k < 1) throw std::invalid_argument("sweep trials_per_k must be at least 1 (empty report)");
  if (!(optimal_performance > 0.0)) throw std::invalid_argument("sweep optimal_performance must be positive");
  if (histogram_bins < 1) throw std::invalid_argument("sweep histogram_bins must be at least 1");
  model.validate();
}

Histogram make_histogram(std::span<const double> values, double lo, double hi, int bins) {
  if (bins < 1 || !(lo < hi)) throw std::invalid_argument("bad histogram range");
  Histogram h{lo, hi, std::vector<std::size_t>(static_cast<std::size_t>(bins), 0)};
  for (double v : values) {
    auto b = static_cast<long>(std::floor((v - lo) / (hi - lo) * bins));
    b = std::clamp<long>(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

SweepAggregates aggregate(std::span<const SweepRecord> records, const SweepConfig& cfg) {
  SweepAggregates agg;
  agg.count = records.size();
  if (records.empty()) return agg;
  std::vector<double> perf, degr;
  std::size_t below = 0;
  for (const auto& r : records) {
    perf.push_back(r.performance);
    degr.push_back(r.degradation);
    if (r.performance < cfg.failure_threshold) ++below;
  }
  const auto n = static_cast<double>(records.size());
  agg.mean_performance = std::accumulate(perf.begin(), perf.end(), 0.0) / n;
  agg.mean_degradation = std::accumulate(degr.begin(), degr.end(), 0.0) / n;
  if (records.size() >= 2) agg.stddev_degradation = fit_normal(degr).stddev;
  agg.fraction_below_threshold = static_cast<double>(below) / n;
  agg.performance_histogram = make_histogram(perf, 0.0, cfg.optimal_performance, cfg.histogram_bins);
  return agg;
}

SweepReport sweep(const Network& network, const Evaluator& evaluator, const SweepConfig& cfg) {
  cfg.validate();
  cfg.model.validate_for(network.profile);
  const int max_k = *std::max_element(cfg.k_values.begin(), cfg.k_values.end());
  if (static_cast<std::size_t>(max_k) > network.synapses.size()) {
    throw std::invalid_argument(fmt::format("too few synapses: sweep needs {}, network has {}", max_k,
                                            network.synapses.size()));
  }

  SweepReport report;
  for (int k : cfg.k_values) {
    for (int trial = 0; trial < cfg.trials_per_k; ++trial) report.records.push_back({k, trial, {}, 0.0, 0.0});
  }

  parallel_for(report.records.size(), cfg.threads, [&](std::size_t i) {
    auto& rec = report.records[i];
    Rng rng = make_rng({cfg.seed, static_cast<std::uint64_t>(rec.k), static_cast<std::uint64_t>(rec.trial)});
    // Partial Fisher-Yates: k distinct synapses.
    std::vector<std::size_t> order(network.synapses.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int j = 0; j < rec.k; ++j) {
      const auto pick = std::uniform_int_distribution<std::size_t>(static_cast<std::size_t>(j), order.size() - 1)(rng);
      std::swap(order[static_cast<std::size_t>(j)], order[pick]);
      rec.synapse_ids.push_back(network.synapses[order[static_cast<std::size_t>(j)]].id);
    }
    std::sort(rec.synapse_ids.begin(), rec.synapse_ids.end());
    const Network perturbed = perturb(network, rec.synapse_ids, cfg.model, rng);
    rec.performance = evaluator(perturbed);
    rec.degradation = resilience_metric(cfg.optimal_performance, rec.performance);
  });

  report.aggregates = aggregate(report.records, cfg);
  return report;
}

void write_sweep_csv(std::ostream& out, std::string_view network_id, std::span<const SweepRecord> records) {
  out << "network_id,k,trial,synapse_ids,performance,degradation\n";
  for (const auto& r : records) {
    std::string ids;
    for (std::size_t i = 0; i < r.synapse_ids.size(); ++i) {
      if (i > 0) ids += ';';
      ids += std::to_string(r.synapse_ids[i]);
    }
    out << fmt::format("{},{},{},{},{},{}\n", network_id, r.k, r.trial, ids, r.performance, r.degradation);
  }
}

std::vector<SweepRecord> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "network_id,k,trial,synapse_ids,performance,degradation") {
    throw std::runtime_error("sweep csv: unexpected header");
  }
  std::vector<SweepRecord> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 6) throw std::runtime_error(fmt::format("sweep csv line {}: expected 6 columns", row));
    try {
      SweepRecord r;
      r.k = std::stoi(cells[1]);
      r.trial = std::stoi(cells[2]);
      std::stringstream ids(cells[3]);
      std::string id;
      while (std::getline(ids, id, ';')) {
        if (!id.empty()) r.synapse_ids.push_back(std::stoi(id));
      }
      r.performance = std::stod(cells[4]);
      r.degradation = std::stod(cells[5]);
      out.push_back(std::move(r));
    } catch (const std::exception&) {
      throw std::runtime_error(fmt::format("sweep csv line {}: malformed row", row));
    }
  }
  return out;
}

nlohmann::json to_json(const PerturbationModel& model) {
  switch (model.kind) {
    case FaultKind::BitFlip:
      return {{"kind", "bit_flip"}, {"bit_index", model.bit_index}};
    case FaultKind::DiminishTowardZero:
      return {{"kind", "diminish"}, {"epsilon", {model.epsilon.lo, model.epsilon.hi}}};
    case FaultKind::Subtract:
      return {{"kind", "subtract"}, {"epsilon", {model.epsilon.lo, model.epsilon.hi}}};
  }
  return {};
}

nlohmann::json to_json(const SweepAggregates& agg, const SweepConfig& cfg) {
  nlohmann::json j;
  j["count"] = agg.count;
  j["mean_performance"] = agg.mean_performance;
  j["mean_degradation"] = agg.mean_degradation;
  j["stddev_degradation"] = agg.stddev_degradation ? nlohmann::json(*agg.stddev_degradation) : nlohmann::json();
  // 1 - degradation, reported alongside for readability.
  j["mean_resilience"] = 1.0 - agg.mean_degradation;
  j["failure_threshold"] = cfg.failure_threshold;
  j["fraction_below_threshold"] = agg.fraction_below_threshold;
  j["optimal_performance"] = cfg.optimal_performance;
  j["histogram"] = {{"lo", agg.performance_histogram.lo},
                    {"hi", agg.performance_histogram.hi},
                    {"counts", agg.performance_histogram.counts}};
  j["model"] = to_json(cfg.model);
  j["k_values"] = cfg.k_values;
  j["trials_per_k"] = cfg.trials_per_k;
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace snnevo
