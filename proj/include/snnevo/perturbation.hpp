#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "snnevo/environments.hpp"
#include "snnevo/network.hpp"
#include "snnevo/rng.hpp"

namespace snnevo {

enum class FaultKind { BitFlip, DiminishTowardZero, Subtract };

/// Epsilon magnitude: fixed when lo == hi, otherwise drawn uniformly from
/// [lo, hi) per perturbed synapse.
struct EpsilonRange {
  double lo = 0.0;
  double hi = 0.0;
  bool fixed() const { return lo == hi; }
};

struct PerturbationModel {
  FaultKind kind = FaultKind::BitFlip;
  int bit_index = 7;  // BitFlip: 0-based from the least significant bit
  EpsilonRange epsilon;

  static PerturbationModel bit_flip(int bit_index);
  static PerturbationModel diminish(double lo, double hi);
  static PerturbationModel subtract(double lo, double hi);

  /// Throws std::invalid_argument if the model does not fit the profile.
  void validate_for(const ArchitectureProfile& profile) const;
  void validate() const;
};

struct VariationSpec {
  PerturbationModel model;
  double per_synapse_probability = 0.1;

  void validate_for(const ArchitectureProfile& profile) const;
};

inline constexpr int kWeightRegisterBits = 12;

/// Flips one bit of the weight held as 12-bit two's complement, then clamps
/// the decoded value to the profile's weight range. Digital profile only.
int flip_bit(int weight, int bit_index, const ArchitectureProfile& profile);

enum class DiminishMode { TowardZero, Subtract };

/// TowardZero: sign(w) * max(|w| - eps, 0). Subtract: clamp(w - eps, -1, 1).
double diminish(double weight, double epsilon, DiminishMode mode);

/// Applies the model to exactly the listed synapses.
Network perturb(const Network& network, std::span<const int> synapse_ids, const PerturbationModel& model,
                Rng& rng);

/// Independent Bernoulli(p) selection per synapse, in storage order.
Network sample_variation(const Network& network, const VariationSpec& spec, Rng& rng);

// ---------------------------------------------------------------------------
// Post-hoc perturbation sweep

struct SweepConfig {
  std::vector<int> k_values{1, 2, 3, 4, 5};  // 0 adds unperturbed control rows
  int trials_per_k = 100;
  PerturbationModel model;
  std::uint64_t seed = 1;
  double optimal_performance = 300.02;
  double failure_threshold = 50.0;  // performance below this counts as failed
  int histogram_bins = 10;
  int threads = 0;

  void validate() const;
};

struct SweepRecord {
  int k = 0;
  int trial = 0;
  std::vector<int> synapse_ids;
  double performance = 0.0;
  double degradation = 0.0;

  bool operator==(const SweepRecord&) const = default;
};

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;

  bool operator==(const Histogram&) const = default;
};

/// Values outside [lo, hi] land in the first or last bin.
Histogram make_histogram(std::span<const double> values, double lo, double hi, int bins);

struct SweepAggregates {
  std::size_t count = 0;
  double mean_performance = 0.0;
  double mean_degradation = 0.0;
  std::optional<double> stddev_degradation;  // needs at least two records
  double fraction_below_threshold = 0.0;
  Histogram performance_histogram;

  bool operator==(const SweepAggregates&) const = default;
};

struct SweepReport {
  std::vector<SweepRecord> records;
  SweepAggregates aggregates;
};

SweepReport sweep(const Network& network, const Evaluator& evaluator, const SweepConfig& cfg);
SweepAggregates aggregate(std::span<const SweepRecord> records, const SweepConfig& cfg);

/// Columns: network_id,k,trial,synapse_ids,performance,degradation.
/// synapse_ids are ';'-separated.
void write_sweep_csv(std::ostream& out, std::string_view network_id, std::span<const SweepRecord> records);
std::vector<SweepRecord> read_sweep_csv(std::istream& in);

nlohmann::json to_json(const SweepAggregates& aggregates, const SweepConfig& cfg);
nlohmann::json to_json(const PerturbationModel& model);

}  // namespace snnevo
