#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "snnevo/simulator.hpp"

namespace snnevo {

struct FeatureRange {
  double min = 0.0;
  double max = 1.0;
};

/// Rate coding: feature i drives input neuron i with a number of evenly spaced
/// injections proportional to its normalized value.
struct RateEncoderConfig {
  std::vector<FeatureRange> features;
  int window = 10;
  int max_rate = 10;
  double charge_per_spike = 1.0;

  void validate() const;
};

/// round(max_rate * clamp((v - min) / (max - min), 0, 1))
int injection_count(double value, const FeatureRange& range, int max_rate);

/// Appends the injections for one window to `out` (cleared first).
void rate_encode_into(std::span<const double> observation, const RateEncoderConfig& cfg,
                      std::span<const int> input_ids, InputSchedule& out);
InputSchedule rate_encode(std::span<const double> observation, const RateEncoderConfig& cfg,
                          std::span<const int> input_ids);

enum class DecodeMode { Argmax, BangBang };

struct DecoderConfig {
  DecodeMode mode = DecodeMode::Argmax;
  std::vector<int> output_ids;
  double force_magnitude = 10.0;  // BangBang only

  void validate() const;
};

/// Index of the largest count; ties go to the lowest index.
int argmax_label(std::span<const std::int64_t> counts);
/// +force if first > second, -force if less, 0 on a tie.
double bang_bang_force(std::int64_t first, std::int64_t second, double force_magnitude);

/// Label (Argmax) or force (BangBang) from a simulation result.
std::variant<int, double> decode(const SimulationResult& result, const DecoderConfig& cfg);

}  // namespace snnevo
