#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "snnevo/environments.hpp"
#include "snnevo/fitness.hpp"
#include "snnevo/network.hpp"
#include "snnevo/rng.hpp"

namespace snnevo {

struct EvolutionConfig {
  int population_size = 100;
  double crossover_rate = 0.5;
  double mutation_rate = 0.9;
  double merge_rate = 0.1;
  int tournament_size = 4;
  int elitism = 2;
  int max_generations = 100;
  std::optional<double> target_fitness;
  std::uint64_t master_seed = 1;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
};

struct Individual {
  Network network;
  std::optional<double> fitness;
  FitnessDetail detail;
};

using Population = std::vector<Individual>;

/// Random seed networks built on the template's input/output scaffold: 0-3
/// hidden neurons each wired with one incoming and one outgoing synapse, and
/// each input connected forward with probability 0.5.
Population init_population(const Network& io_template, const EvolutionConfig& cfg, Rng& rng);

enum class MutationOp {
  PerturbWeight,
  PerturbThreshold,
  PerturbDelay,
  AddSynapse,
  DeleteSynapse,
  AddHiddenNeuron,
  DeleteHiddenNeuron,
};
inline constexpr int kMutationOpCount = 7;

bool mutation_applicable(const Network& network, MutationOp op);
/// Applies `op`; the caller checks applicability.
Network apply_mutation(const Network& network, MutationOp op, Rng& rng);
/// One uniformly drawn applicable operator. Returns the input unchanged when
/// nothing applies.
Network mutate(const Network& network, Rng& rng, MutationOp* applied = nullptr);

/// Matching hidden neurons (same id) are always inherited, disjoint ones with
/// probability 0.5; synapses follow surviving endpoints.
Network crossover(const Network& a, const Network& b, Rng& rng);

/// Union: all hidden neurons of both parents (b's relabeled) and their synapses.
Network merge(const Network& a, const Network& b, Rng& rng);

struct GenerationStats {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  double mean_hidden = 0.0;
  double mean_synapses = 0.0;
  double best_performance = 0.0;
  std::optional<double> best_mean_variation_performance;
  int population_size = 0;
  // Offspring bred from this generation and operators applied to them.
  int offspring = 0;
  int crossovers = 0;
  int merges = 0;
  int mutations = 0;
  int failed_evaluations = 0;
};

struct EvolutionResult {
  Individual best;
  std::vector<GenerationStats> stats;
  Population final_population;
};

/// Per-generation observer; also receives the evaluated population.
using GenerationCallback = std::function<void(const GenerationStats&, const Population&)>;

EvolutionResult evolve(const Network& io_template, const Evaluator& evaluator, const FitnessConfig& fitness,
                       const EvolutionConfig& cfg, const GenerationCallback& on_generation = {});

void write_stats_csv_header(std::ostream& out);
void write_stats_csv_row(std::ostream& out, const GenerationStats& s);

}  // namespace snnevo
