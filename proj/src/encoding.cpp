#include "snnevo/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

namespace snnevo {

void RateEncoderConfig::validate() const {
  if (features.empty()) throw std::invalid_argument("encoder needs at least one feature");
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!(features[i].min < features[i].max)) {
      throw std::invalid_argument(fmt::format("encoder feature {}: min must be below max", i));
    }
  }
  if (window < 1) throw std::invalid_argument("encoder window must be at least 1");
  if (max_rate < 1 || max_rate > window) {
    throw std::invalid_argument("encoder max_rate must be in [1, window]");
  }
}

int injection_count(double value, const FeatureRange& range, int max_rate) {
  const double frac = std::clamp((value - range.min) / (range.max - range.min), 0.0, 1.0);
  return static_cast<int>(std::round(max_rate * frac));
}

void rate_encode_into(std::span<const double> observation, const RateEncoderConfig& cfg,
                      std::span<const int> input_ids, InputSchedule& out) {
  if (observation.size() != cfg.features.size()) {
    throw std::invalid_argument(fmt::format("observation has {} values, encoder expects {}",
                                            observation.size(), cfg.features.size()));
  }
  if (input_ids.size() < cfg.features.size()) {
    throw std::invalid_argument(fmt::format("encoder needs {} input neurons, network has {}",
                                            cfg.features.size(), input_ids.size()));
  }
  out.clear();
  for (std::size_t f = 0; f < observation.size(); ++f) {
    const int r = injection_count(observation[f], cfg.features[f], cfg.max_rate);
    for (int i = 0; i < r; ++i) {
      out.push_back({input_ids[f], (i * cfg.window) / r, cfg.charge_per_spike});
    }
  }
}

InputSchedule rate_encode(std::span<const double> observation, const RateEncoderConfig& cfg,
                          std::span<const int> input_ids) {
  InputSchedule out;
  rate_encode_into(observation, cfg, input_ids, out);
  return out;
}

void DecoderConfig::validate() const {
  if (mode == DecodeMode::Argmax && output_ids.empty()) {
    throw std::invalid_argument("argmax decoder needs at least one output");
  }
  if (mode == DecodeMode::BangBang && output_ids.size() != 2) {
    throw std::invalid_argument("bang-bang decoder needs exactly two outputs");
  }
}

int argmax_label(std::span<const std::int64_t> counts) {
  int best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

double bang_bang_force(std::int64_t first, std::int64_t second, double force_magnitude) {
  if (first > second) return force_magnitude;
  if (first < second) return -force_magnitude;
  return 0.0;
}

std::variant<int, double> decode(const SimulationResult& result, const DecoderConfig& cfg) {
  cfg.validate();
  std::vector<std::int64_t> counts;
  for (int id : cfg.output_ids) {
    auto it = result.fire_counts.find(id);
    if (it == result.fire_counts.end()) {
      throw std::invalid_argument(fmt::format("output {} not recorded", id));
    }
    counts.push_back(it->second);
  }
  if (cfg.mode == DecodeMode::Argmax) return argmax_label(counts);
  return bang_bang_force(counts[0], counts[1], cfg.force_magnitude);
}

}  // namespace snnevo
