#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

#include "snnevo/environments.hpp"
#include "snnevo/rng.hpp"

namespace snnevo {

void CartPoleConfig::validate() const {
  if (!(gravity > 0 && cart_mass > 0 && pole_mass > 0 && pole_half_length > 0 && force_magnitude > 0 &&
        dt > 0 && fail_x > 0 && fail_theta > 0)) {
    throw std::invalid_argument("cart-pole parameters must be positive");
  }
  if (max_time < 0) throw std::invalid_argument("cart-pole max_time must be non-negative");
  if (initial_range < 0) throw std::invalid_argument("cart-pole initial_range must be non-negative");
}

CartPoleState cartpole_step(const CartPoleState& s, double force, const CartPoleConfig& cfg) {
  const double total_mass = cfg.cart_mass + cfg.pole_mass;
  const double polemass_length = cfg.pole_mass * cfg.pole_half_length;
  const double cos_t = std::cos(s.theta);
  const double sin_t = std::sin(s.theta);

  const double temp = (force + polemass_length * s.theta_dot * s.theta_dot * sin_t) / total_mass;
  const double theta_acc = (cfg.gravity * sin_t - cos_t * temp) /
                           (cfg.pole_half_length * (4.0 / 3.0 - cfg.pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;

  CartPoleState next;
  next.x_dot = s.x_dot + cfg.dt * x_acc;
  next.x = s.x + cfg.dt * next.x_dot;
  next.theta_dot = s.theta_dot + cfg.dt * theta_acc;
  next.theta = s.theta + cfg.dt * next.theta_dot;
  return next;
}

CartPoleState initial_cartpole_state(std::uint64_t seed, const CartPoleConfig& cfg) {
  Rng rng = make_rng({seed, 0xCA27});
  const double r = cfg.initial_range;
  CartPoleState s;
  if (r == 0.0) return s;
  s.x = uniform_real(rng, -r, r);
  s.x_dot = uniform_real(rng, -r, r);
  s.theta = uniform_real(rng, -r, r);
  s.theta_dot = uniform_real(rng, -r, r);
  return s;
}

std::array<double, 8> pole_observation(const CartPoleState& s) {
  auto pos = [](double v) { return v > 0.0 ? v : 0.0; };
  auto neg = [](double v) { return v < 0.0 ? -v : 0.0; };
  return {pos(s.x), neg(s.x), pos(s.x_dot), neg(s.x_dot),
          pos(s.theta), neg(s.theta), pos(s.theta_dot), neg(s.theta_dot)};
}

RateEncoderConfig default_pole_encoder() {
  RateEncoderConfig enc;
  enc.features = {{0.0, 2.4}, {0.0, 2.4}, {0.0, 1.0}, {0.0, 1.0},
                  {0.0, 0.1}, {0.0, 0.1}, {0.0, 1.0}, {0.0, 1.0}};
  enc.window = 10;
  enc.max_rate = 5;
  enc.charge_per_spike = 1024.0;
  return enc;
}

double run_pb_episode(const Network& network, const RateEncoderConfig& enc, const DecoderConfig& dec,
                      const CartPoleConfig& cfg, std::uint64_t seed, Activity* activity) {
  if (network.input_ids.size() != enc.features.size()) {
    throw std::invalid_argument(fmt::format("pole balance needs {} inputs, network has {}",
                                            enc.features.size(), network.input_ids.size()));
  }
  std::vector<int> outputs = dec.output_ids.empty() ? network.output_ids : dec.output_ids;
  if (outputs.size() != 2 || network.output_ids.size() != 2) {
    throw std::invalid_argument("pole balance needs exactly two outputs");
  }

  Simulator sim(network);
  const std::size_t left = sim.index_of(outputs[0]);
  const std::size_t right = sim.index_of(outputs[1]);
  const auto max_steps =
      cfg.max_time <= 0.0 ? std::int64_t{0} : static_cast<std::int64_t>(std::ceil(cfg.max_time / cfg.dt - 1e-9));

  CartPoleState state = initial_cartpole_state(seed, cfg);
  InputSchedule schedule;
  double balance_time = cfg.max_time <= 0.0 ? 0.0 : cfg.max_time;
  for (std::int64_t n = 0; n < max_steps; ++n) {
    const auto obs = pole_observation(state);
    rate_encode_into(obs, enc, network.input_ids, schedule);
    sim.advance(schedule, enc.window);
    const auto counts = sim.window_counts();
    const double force = bang_bang_force(counts[left], counts[right], dec.force_magnitude);
    state = cartpole_step(state, force, cfg);
    if (std::abs(state.x) > cfg.fail_x || std::abs(state.theta) > cfg.fail_theta) {
      balance_time = std::min(static_cast<double>(n + 1) * cfg.dt, cfg.max_time);
      break;
    }
  }

  if (activity != nullptr) {
    activity->performance = balance_time;
    activity->timesteps = sim.now();
    activity->fire_counts.clear();
    for (std::size_t i = 0; i < sim.size(); ++i) activity->fire_counts[sim.neuron_ids()[i]] = sim.total_counts()[i];
  }
  return balance_time;
}

}  // namespace snnevo
