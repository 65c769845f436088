#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "snnevo/environments.hpp"
#include "snnevo/network.hpp"
#include "snnevo/perturbation.hpp"
#include "snnevo/rng.hpp"

namespace snnevo {

/// Weights of the scalarized objective
///   F = w1 * P * (1 - hidden/total * delta) + w2 * mean_i P(variation_i)
/// with w1 + w2 = 1. delta = 0 turns the size penalty off.
struct FitnessConfig {
  double delta = 0.001;
  int n_variations = 5;
  double w1 = 0.5;
  double w2 = 0.5;
  std::optional<VariationSpec> variation;  // required when w2 > 0
  double optimal_performance = 300.02;

  void validate() const;
  /// Size-penalty-only objective (w1 = 1, w2 = 0).
  static FitnessConfig size_only(double delta, double optimal_performance);
};

/// performance * (1 - hidden/total * delta)
double size_penalty_fitness(double performance, std::size_t hidden, std::size_t total, double delta);

struct FitnessDetail {
  double performance = 0.0;
  double size_term = 0.0;  // size-penalized performance, before w1
  std::optional<double> mean_variation_performance;  // absent when w2 = 0
  std::vector<double> variation_performances;
  std::size_t hidden = 0;
  std::size_t total = 0;
};

struct FitnessResult {
  double fitness = 0.0;
  FitnessDetail detail;
};

/// Thrown when the evaluator fails on a sampled variation.
class VariationEvaluationError : public std::runtime_error {
 public:
  VariationEvaluationError(int index, const std::string& what)
      : std::runtime_error(what), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

/// Evaluates the base network once and, when w2 > 0, n_variations freshly
/// sampled variations drawn from `rng`.
FitnessResult multi_objective_fitness(const Network& network, const Evaluator& evaluator,
                                      const FitnessConfig& cfg, Rng& rng);

/// (optimal - performance) / optimal. Not clamped.
double resilience_metric(double optimal, double performance);

struct NormalFit {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Sample mean and sample standard deviation (n - 1).
NormalFit fit_normal(std::span<const double> samples);

}  // namespace snnevo
