#include <stdexcept>

#include "snnevo/environments.hpp"

namespace snnevo {

PoleBalanceTask::PoleBalanceTask(PoleBalanceSettings settings) : settings_(std::move(settings)) {
  settings_.physics.validate();
  settings_.encoder.validate();
  if (settings_.episode_seeds.empty()) throw std::invalid_argument("pole balance needs at least one episode");
}

DecoderConfig PoleBalanceTask::decoder_for(const Network& network) const {
  DecoderConfig dec;
  dec.mode = DecodeMode::BangBang;
  dec.output_ids = network.output_ids;
  dec.force_magnitude = settings_.physics.force_magnitude;
  return dec;
}

double PoleBalanceTask::evaluate(const Network& network) const {
  const auto dec = decoder_for(network);
  double total = 0.0;
  for (auto seed : settings_.episode_seeds) {
    total += run_pb_episode(network, settings_.encoder, dec, settings_.physics, seed);
  }
  return total / static_cast<double>(settings_.episode_seeds.size());
}

Activity PoleBalanceTask::probe(const Network& network) const {
  Activity activity;
  run_pb_episode(network, settings_.encoder, decoder_for(network), settings_.physics, settings_.probe_seed,
                 &activity);
  return activity;
}

ClassificationTask::ClassificationTask(ClassificationDataset data, RateEncoderConfig encoder, Split split)
    : data_(std::move(data)), encoder_(std::move(encoder)), split_(split) {
  encoder_.validate();
}

DecoderConfig ClassificationTask::decoder_for(const Network& network) const {
  DecoderConfig dec;
  dec.mode = DecodeMode::Argmax;
  dec.output_ids = network.output_ids;
  return dec;
}

double ClassificationTask::evaluate(const Network& network) const {
  return run_classification(network, encoder_, decoder_for(network), data_, split_);
}

Activity ClassificationTask::probe(const Network& network) const {
  Activity activity;
  run_classification(network, encoder_, decoder_for(network), data_, Split::Train, &activity);
  return activity;
}

}  // namespace snnevo
