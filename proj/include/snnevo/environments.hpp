#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <numbers>
#include <vector>

#include "snnevo/encoding.hpp"
#include "snnevo/network.hpp"

namespace snnevo {

/// Performance of a network on a task. Must be deterministic and must not
/// keep state between calls.
using Evaluator = std::function<double(const Network&)>;

// ---------------------------------------------------------------------------
// Cart-pole ("PB")

struct CartPoleState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;

  bool operator==(const CartPoleState&) const = default;
};

struct CartPoleConfig {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_half_length = 0.5;
  double force_magnitude = 10.0;
  double dt = 0.02;
  double fail_x = 2.4;
  double fail_theta = 12.0 * std::numbers::pi / 180.0;
  double max_time = 300.02;
  double initial_range = 0.05;  // initial state ~ U(-r, r) per component

  void validate() const;
};

/// One semi-implicit Euler step of the classic cart-pole equations.
CartPoleState cartpole_step(const CartPoleState& state, double force, const CartPoleConfig& cfg);

CartPoleState initial_cartpole_state(std::uint64_t seed, const CartPoleConfig& cfg);

/// Sign-split observation: x+, x-, x_dot+, x_dot-, theta+, theta-, theta_dot+, theta_dot-.
std::array<double, 8> pole_observation(const CartPoleState& state);

/// Default rate encoder for pole_observation.
RateEncoderConfig default_pole_encoder();

/// Fire counts accumulated over a whole evaluation.
struct Activity {
  double performance = 0.0;
  std::int64_t timesteps = 0;
  std::map<int, std::int64_t> fire_counts;
};

/// Closed-loop episode: encode state, simulate one window, decode a force,
/// step the physics, until failure or max_time. Returns the balance time in
/// seconds. The decoder's output_ids are ignored in favour of the network's
/// first two outputs when empty.
double run_pb_episode(const Network& network, const RateEncoderConfig& enc, const DecoderConfig& dec,
                      const CartPoleConfig& cfg, std::uint64_t seed, Activity* activity = nullptr);

// ---------------------------------------------------------------------------
// Synthetic labeled-signal classification (stand-in for radio data)

struct ClassificationDataset {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  int num_classes = 2;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  std::size_t feature_length() const { return features.empty() ? 0 : features.front().size(); }
  bool operator==(const ClassificationDataset&) const = default;
};

struct SignalDatasetConfig {
  int num_samples = 500;
  int num_classes = 2;
  double noise_sigma = 0.3;
  std::uint64_t seed = 1;
  int feature_length = 64;
  double train_fraction = 0.8;
};

/// Carrier frequency (cycles per feature vector) of class k.
double class_frequency(int k);

/// Sample i has label i mod num_classes and features
/// sin(2 pi f_k j / L + phase) + N(0, sigma^2), with a uniform random phase.
ClassificationDataset generate_signal_dataset(const SignalDatasetConfig& cfg);
ClassificationDataset generate_signal_dataset(int num_samples, int num_classes, double noise_sigma,
                                              std::uint64_t seed);

/// One row per sample: f0..f{L-1},label. The train/test split is not stored.
void write_dataset_csv(std::ostream& out, const ClassificationDataset& data);
ClassificationDataset read_dataset_csv(std::istream& in, double train_fraction = 0.8,
                                       std::uint64_t split_seed = 1);

enum class Split { Train, Test };

RateEncoderConfig default_signal_encoder(int feature_length);

/// Fraction of split samples whose decoded label matches. Each sample is
/// simulated from a reset network.
double run_classification(const Network& network, const RateEncoderConfig& enc, const DecoderConfig& dec,
                          const ClassificationDataset& data, Split split, Activity* activity = nullptr);

// ---------------------------------------------------------------------------
// Tasks bundle an environment with its I/O mapping.

class Task {
 public:
  virtual ~Task() = default;
  virtual double evaluate(const Network& network) const = 0;
  /// Performance plus fire counts over the probe workload.
  virtual Activity probe(const Network& network) const = 0;
  virtual double optimal_performance() const = 0;
  virtual int input_count() const = 0;
  virtual int output_count() const = 0;

  Evaluator evaluator() const {
    return [this](const Network& n) { return evaluate(n); };
  }
};

struct PoleBalanceSettings {
  CartPoleConfig physics;
  RateEncoderConfig encoder = default_pole_encoder();
  std::vector<std::uint64_t> episode_seeds{1};
  std::uint64_t probe_seed = 1;
};

class PoleBalanceTask final : public Task {
 public:
  explicit PoleBalanceTask(PoleBalanceSettings settings);
  double evaluate(const Network& network) const override;
  Activity probe(const Network& network) const override;
  double optimal_performance() const override { return settings_.physics.max_time; }
  int input_count() const override { return static_cast<int>(settings_.encoder.features.size()); }
  int output_count() const override { return 2; }
  const PoleBalanceSettings& settings() const { return settings_; }

 private:
  DecoderConfig decoder_for(const Network& network) const;
  PoleBalanceSettings settings_;
};

class ClassificationTask final : public Task {
 public:
  ClassificationTask(ClassificationDataset data, RateEncoderConfig encoder, Split split = Split::Train);
  double evaluate(const Network& network) const override;
  Activity probe(const Network& network) const override;
  double optimal_performance() const override { return 1.0; }
  int input_count() const override { return static_cast<int>(encoder_.features.size()); }
  int output_count() const override { return data_.num_classes; }
  const ClassificationDataset& data() const { return data_; }

 private:
  DecoderConfig decoder_for(const Network& network) const;
  ClassificationDataset data_;
  RateEncoderConfig encoder_;
  Split split_;
};

}  // namespace snnevo
