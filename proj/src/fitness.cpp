#include "snnevo/fitness.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/core.h>

namespace snnevo {

void FitnessConfig::validate() const {
  if (!(w1 >= 0.0 && w1 <= 1.0 && w2 >= 0.0 && w2 <= 1.0)) {
    throw std::invalid_argument("fitness weights w1, w2 must be in [0, 1]");
  }
  if (std::abs(w1 + w2 - 1.0) > 1e-12) throw std::invalid_argument("fitness weights must satisfy w1 + w2 = 1");
  if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("fitness delta must be in [0, 1)");
  if (n_variations < 1) throw std::invalid_argument("fitness n_variations must be at least 1");
  if (w2 > 0.0 && !variation) throw std::invalid_argument("fitness with w2 > 0 needs a variation spec");
  if (!(optimal_performance > 0.0)) throw std::invalid_argument("fitness optimal_performance must be positive");
}

FitnessConfig FitnessConfig::size_only(double delta, double optimal_performance) {
  FitnessConfig cfg;
  cfg.delta = delta;
  cfg.w1 = 1.0;
  cfg.w2 = 0.0;
  cfg.variation.reset();
  cfg.optimal_performance = optimal_performance;
  return cfg;
}

double size_penalty_fitness(double performance, std::size_t hidden, std::size_t total, double delta) {
  if (total == 0) throw std::invalid_argument("size_penalty_fitness: total neuron count is zero");
  if (hidden > total) throw std::invalid_argument("size_penalty_fitness: hidden exceeds total");
  const double fraction = static_cast<double>(hidden) / static_cast<double>(total);
  return performance * (1.0 - fraction * delta);
}

FitnessResult multi_objective_fitness(const Network& network, const Evaluator& evaluator,
                                      const FitnessConfig& cfg, Rng& rng) {
  cfg.validate();
  FitnessResult result;
  auto& d = result.detail;
  d.hidden = network.hidden_count();
  d.total = network.neuron_count();
  d.performance = evaluator(network);
  d.size_term = size_penalty_fitness(d.performance, d.hidden, d.total, cfg.delta);
  result.fitness = cfg.w1 * d.size_term;
  if (cfg.w2 == 0.0) return result;

  for (int i = 0; i < cfg.n_variations; ++i) {
    const Network variant = sample_variation(network, *cfg.variation, rng);
    try {
      d.variation_performances.push_back(evaluator(variant));
    } catch (const std::exception& e) {
      throw VariationEvaluationError(i, fmt::format("variation {} failed: {}", i, e.what()));
    }
  }
  const double mean = std::accumulate(d.variation_performances.begin(), d.variation_performances.end(), 0.0) /
                      static_cast<double>(cfg.n_variations);
  d.mean_variation_performance = mean;
  result.fitness += cfg.w2 * mean;
  return result;
}

double resilience_metric(double optimal, double performance) {
  if (!(optimal > 0.0)) throw std::invalid_argument("resilience_metric: optimal must be positive");
  return (optimal - performance) / optimal;
}

NormalFit fit_normal(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("fit_normal needs at least two samples");
  const auto n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace snnevo
