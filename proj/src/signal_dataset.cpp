#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <fmt/core.h>

#include "snnevo/environments.hpp"
#include "snnevo/rng.hpp"

namespace snnevo {

namespace {

constexpr double kSignalAmplitude = 0.25;
constexpr double kPhaseJitter = std::numbers::pi / 8.0;

void assign_split(ClassificationDataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
    throw std::invalid_argument("train_fraction must be in [0, 1]");
  }
  std::vector<std::size_t> order(data.labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = make_rng({seed, 0x5917});
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(order.size())));
  data.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  data.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(data.train.begin(), data.train.end());
  std::sort(data.test.begin(), data.test.end());
}

}  // namespace

double class_frequency(int k) { return 2.0 + 2.0 * k; }

ClassificationDataset generate_signal_dataset(const SignalDatasetConfig& cfg) {
  if (cfg.num_classes < 2) throw std::invalid_argument("num_classes must be at least 2");
  if (cfg.num_samples < 0) throw std::invalid_argument("num_samples must be non-negative");
  if (cfg.feature_length < 1) throw std::invalid_argument("feature_length must be positive");
  if (cfg.noise_sigma < 0) throw std::invalid_argument("noise_sigma must be non-negative");

  ClassificationDataset data;
  data.num_classes = cfg.num_classes;
  Rng rng = make_rng({cfg.seed, 0xDA7A});
  std::normal_distribution<double> noise(0.0, 1.0);
  const double len = cfg.feature_length;
  for (int i = 0; i < cfg.num_samples; ++i) {
    const int label = i % cfg.num_classes;
    const double f = class_frequency(label);
    const double phase = uniform_real(rng, -kPhaseJitter, kPhaseJitter);
    std::vector<double> x(static_cast<std::size_t>(cfg.feature_length));
    for (int j = 0; j < cfg.feature_length; ++j) {
      const double clean = kSignalAmplitude * std::sin(2.0 * std::numbers::pi * f * j / len + phase);
      const double n = noise(rng);
      x[static_cast<std::size_t>(j)] = clean + (cfg.noise_sigma > 0.0 ? cfg.noise_sigma * n : 0.0);
    }
    data.features.push_back(std::move(x));
    data.labels.push_back(label);
  }
  assign_split(data, cfg.train_fraction, cfg.seed);
  return data;
}

ClassificationDataset generate_signal_dataset(int num_samples, int num_classes, double noise_sigma,
                                              std::uint64_t seed) {
  SignalDatasetConfig cfg;
  cfg.num_samples = num_samples;
  cfg.num_classes = num_classes;
  cfg.noise_sigma = noise_sigma;
  cfg.seed = seed;
  return generate_signal_dataset(cfg);
}

void write_dataset_csv(std::ostream& out, const ClassificationDataset& data) {
  const std::size_t len = data.feature_length();
  for (std::size_t j = 0; j < len; ++j) out << 'f' << j << ',';
  out << "label\n";
  for (std::size_t i = 0; i < data.features.size(); ++i) {
    for (double v : data.features[i]) out << fmt::format("{}", v) << ',';
    out << data.labels[i] << '\n';
  }
}

ClassificationDataset read_dataset_csv(std::istream& in, double train_fraction, std::uint64_t split_seed) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset csv: missing header");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 2 || line.substr(line.rfind(',') + 1) != "label") {
    throw std::runtime_error("dataset csv: last header column must be 'label'");
  }
  ClassificationDataset data;
  int max_label = -1;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw std::runtime_error(fmt::format("dataset csv line {}: bad value '{}'", row, cell));
      }
    }
    if (values.size() != columns) {
      throw std::runtime_error(fmt::format("dataset csv line {}: expected {} columns, got {}", row, columns,
                                           values.size()));
    }
    const double label = values.back();
    if (label < 0 || label != std::floor(label)) {
      throw std::runtime_error(fmt::format("dataset csv line {}: bad label", row));
    }
    values.pop_back();
    data.features.push_back(std::move(values));
    data.labels.push_back(static_cast<int>(label));
    max_label = std::max(max_label, static_cast<int>(label));
  }
  data.num_classes = std::max(2, max_label + 1);
  assign_split(data, train_fraction, split_seed);
  return data;
}

RateEncoderConfig default_signal_encoder(int feature_length) {
  RateEncoderConfig enc;
  enc.features.assign(static_cast<std::size_t>(feature_length), FeatureRange{-0.5, 0.5});
  enc.window = 10;
  enc.max_rate = 5;
  enc.charge_per_spike = 1024.0;
  return enc;
}

double run_classification(const Network& network, const RateEncoderConfig& enc, const DecoderConfig& dec,
                          const ClassificationDataset& data, Split split, Activity* activity) {
  const auto& indices = split == Split::Train ? data.train : data.test;
  if (indices.empty()) throw std::invalid_argument("empty split");
  if (enc.features.size() != data.feature_length()) {
    throw std::invalid_argument(fmt::format("encoder has {} features, dataset has {}", enc.features.size(),
                                            data.feature_length()));
  }
  if (network.input_ids.size() != enc.features.size()) {
    throw std::invalid_argument(fmt::format("classification needs {} inputs, network has {}",
                                            enc.features.size(), network.input_ids.size()));
  }
  const std::vector<int> outputs = dec.output_ids.empty() ? network.output_ids : dec.output_ids;
  if (outputs.size() != static_cast<std::size_t>(data.num_classes)) {
    throw std::invalid_argument(fmt::format("classification needs {} outputs, decoder has {}", data.num_classes,
                                            outputs.size()));
  }

  Simulator sim(network);
  std::vector<std::size_t> out_index;
  for (int id : outputs) out_index.push_back(sim.index_of(id));
  std::vector<std::int64_t> totals(sim.size(), 0);
  std::vector<std::int64_t> counts(outputs.size());
  InputSchedule schedule;
  std::size_t correct = 0;
  for (std::size_t idx : indices) {
    sim.reset();
    rate_encode_into(data.features[idx], enc, network.input_ids, schedule);
    sim.advance(schedule, enc.window);
    const auto window = sim.window_counts();
    for (std::size_t k = 0; k < out_index.size(); ++k) counts[k] = window[out_index[k]];
    if (argmax_label(counts) == data.labels[idx]) ++correct;
    if (activity != nullptr) {
      for (std::size_t i = 0; i < totals.size(); ++i) totals[i] += window[i];
    }
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(indices.size());
  if (activity != nullptr) {
    activity->performance = accuracy;
    activity->timesteps = static_cast<std::int64_t>(indices.size()) * enc.window;
    activity->fire_counts.clear();
    for (std::size_t i = 0; i < sim.size(); ++i) activity->fire_counts[sim.neuron_ids()[i]] = totals[i];
  }
  return accuracy;
}

}  // namespace snnevo
