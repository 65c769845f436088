#include "snnevo/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include <fmt/core.h>

#include "snnevo/parallel.hpp"

namespace snnevo {

void EvolutionConfig::validate() const {
  auto rate = [](double r, const char* name) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument(fmt::format("evolution.{} must be in [0, 1]", name));
  };
  rate(crossover_rate, "crossover_rate");
  rate(mutation_rate, "mutation_rate");
  rate(merge_rate, "merge_rate");
  if (population_size < 2) throw std::invalid_argument("evolution.population_size must be at least 2");
  if (elitism < 0 || elitism >= population_size) {
    throw std::invalid_argument("evolution.elitism must be in [0, population_size)");
  }
  if (tournament_size < 1) throw std::invalid_argument("evolution.tournament_size must be at least 1");
  if (max_generations < 0) throw std::invalid_argument("evolution.max_generations must be non-negative");
}

namespace {

constexpr int kDigitalWeightStep = 64;
constexpr double kAnalogWeightStep = 0.1;
constexpr int kDigitalThresholdStep = 64;
constexpr double kAnalogThresholdStep = 0.1;
constexpr double kPositionStep = 0.1;

bool is_digital(const ArchitectureProfile& p) { return p.kind == ProfileKind::Digital; }
bool uses_distance(const ArchitectureProfile& p) { return p.delay_source == DelaySource::Distance; }

double random_weight(const ArchitectureProfile& p, Rng& rng) {
  if (p.weight_is_integer) {
    return uniform_int(rng, static_cast<int>(p.weight_min), static_cast<int>(p.weight_max));
  }
  return uniform_real(rng, p.weight_min, p.weight_max);
}

double random_threshold(const ArchitectureProfile& p, Rng& rng) {
  if (is_digital(p)) {
    return uniform_int(rng, static_cast<int>(p.threshold_min), static_cast<int>(p.threshold_max));
  }
  return uniform_real(rng, p.threshold_min, p.threshold_max);
}

Position random_position(Rng& rng) {
  return {uniform_real(rng, 0.0, 1.0), uniform_real(rng, 0.0, 1.0), uniform_real(rng, 0.0, 1.0)};
}

// Adds pre -> post unless the edge exists. Returns true when added.
bool add_edge(Network& net, int pre, int post, Rng& rng) {
  if (net.has_edge(pre, post)) return false;
  Synapse s;
  s.id = net.next_synapse_id();
  s.pre = pre;
  s.post = post;
  s.weight = random_weight(net.profile, rng);
  if (uses_distance(net.profile)) {
    s.delay = distance_delay(net.find_neuron(pre)->position, net.find_neuron(post)->position, net.profile);
  } else {
    s.delay = uniform_int(rng, net.profile.delay_min, net.profile.delay_max);
  }
  net.synapses.push_back(s);
  return true;
}

std::vector<int> ids_with_role(const Network& net, std::initializer_list<NeuronRole> roles) {
  std::vector<int> ids;
  for (const auto& n : net.neurons) {
    if (std::find(roles.begin(), roles.end(), n.role) != roles.end()) ids.push_back(n.id);
  }
  return ids;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

int add_hidden_neuron(Network& net, Rng& rng) {
  Neuron n;
  n.id = net.next_neuron_id();
  n.role = NeuronRole::Hidden;
  n.threshold = random_threshold(net.profile, rng);
  if (uses_distance(net.profile)) n.position = random_position(rng);
  std::vector<int> sources = ids_with_role(net, {NeuronRole::Input, NeuronRole::Hidden});
  std::vector<int> targets = ids_with_role(net, {NeuronRole::Hidden, NeuronRole::Output});
  net.neurons.push_back(n);
  add_edge(net, pick(sources, rng), n.id, rng);
  add_edge(net, n.id, pick(targets, rng), rng);
  return n.id;
}

void remove_neuron(Network& net, int id) {
  std::erase_if(net.neurons, [id](const Neuron& n) { return n.id == id; });
  std::erase_if(net.synapses, [id](const Synapse& s) { return s.pre == id || s.post == id; });
}

// Candidate (pre, post) pairs that would be new edges: any pre, post hidden or output.
std::vector<std::pair<int, int>> free_edges(const Network& net) {
  std::set<std::pair<int, int>> existing;
  for (const auto& s : net.synapses) existing.emplace(s.pre, s.post);
  std::vector<std::pair<int, int>> out;
  for (const auto& pre : net.neurons) {
    for (const auto& post : net.neurons) {
      if (post.role == NeuronRole::Input) continue;
      if (!existing.contains({pre.id, post.id})) out.emplace_back(pre.id, post.id);
    }
  }
  return out;
}

void renumber_synapses(Network& net) {
  std::sort(net.synapses.begin(), net.synapses.end(),
            [](const Synapse& x, const Synapse& y) { return std::tie(x.pre, x.post) < std::tie(y.pre, y.post); });
  for (std::size_t i = 0; i < net.synapses.size(); ++i) net.synapses[i].id = static_cast<int>(i);
}

void require_compatible(const Network& a, const Network& b, const char* op) {
  if (!(a.profile == b.profile)) throw std::invalid_argument(fmt::format("{}: profile mismatch", op));
  if (a.input_ids != b.input_ids || a.output_ids != b.output_ids) {
    throw std::invalid_argument(fmt::format("{}: input/output scaffold mismatch", op));
  }
}

}  // namespace

Population init_population(const Network& io_template, const EvolutionConfig& cfg, Rng& rng) {
  if (io_template.hidden_count() != 0 || !io_template.synapses.empty()) {
    throw std::invalid_argument("init_population: template must contain only input and output neurons");
  }
  Population pop;
  pop.reserve(static_cast<std::size_t>(cfg.population_size));
  for (int i = 0; i < cfg.population_size; ++i) {
    Network net = io_template;
    for (auto& n : net.neurons) {
      n.threshold = random_threshold(net.profile, rng);
      if (uses_distance(net.profile)) n.position = random_position(rng);
    }
    const int hidden = uniform_int(rng, 0, 3);
    for (int h = 0; h < hidden; ++h) add_hidden_neuron(net, rng);
    const auto targets = ids_with_role(net, {NeuronRole::Hidden, NeuronRole::Output});
    for (int in : net.input_ids) {
      if (bernoulli(rng, 0.5)) add_edge(net, in, pick(targets, rng), rng);
    }
    pop.push_back({std::move(net), std::nullopt, {}});
  }
  return pop;
}

bool mutation_applicable(const Network& net, MutationOp op) {
  switch (op) {
    case MutationOp::PerturbWeight:
    case MutationOp::DeleteSynapse:
      return !net.synapses.empty();
    case MutationOp::PerturbThreshold:
      return !net.neurons.empty();
    case MutationOp::PerturbDelay:
      return uses_distance(net.profile) ? !net.neurons.empty() : !net.synapses.empty();
    case MutationOp::AddSynapse:
      return !free_edges(net).empty();
    case MutationOp::AddHiddenNeuron:
      return true;
    case MutationOp::DeleteHiddenNeuron:
      return net.hidden_count() > 0;
  }
  return false;
}

Network apply_mutation(const Network& network, MutationOp op, Rng& rng) {
  Network net = network;
  const auto& p = net.profile;
  switch (op) {
    case MutationOp::PerturbWeight: {
      auto& s = net.synapses[std::uniform_int_distribution<std::size_t>(0, net.synapses.size() - 1)(rng)];
      const double step = is_digital(p) ? uniform_int(rng, -kDigitalWeightStep, kDigitalWeightStep)
                                        : uniform_real(rng, -kAnalogWeightStep, kAnalogWeightStep);
      s.weight = quantize_weight(s.weight + step, p);
      break;
    }
    case MutationOp::PerturbThreshold: {
      auto& n = net.neurons[std::uniform_int_distribution<std::size_t>(0, net.neurons.size() - 1)(rng)];
      const double step = is_digital(p) ? uniform_int(rng, -kDigitalThresholdStep, kDigitalThresholdStep)
                                        : uniform_real(rng, -kAnalogThresholdStep, kAnalogThresholdStep);
      n.threshold = quantize_threshold(n.threshold + step, p);
      break;
    }
    case MutationOp::PerturbDelay: {
      if (uses_distance(p)) {
        // Delays follow geometry, so move a neuron.
        auto& n = net.neurons[std::uniform_int_distribution<std::size_t>(0, net.neurons.size() - 1)(rng)];
        for (auto& c : n.position) c = std::clamp(c + uniform_real(rng, -kPositionStep, kPositionStep), 0.0, 1.0);
        recompute_delays(net);
      } else {
        auto& s = net.synapses[std::uniform_int_distribution<std::size_t>(0, net.synapses.size() - 1)(rng)];
        s.delay = clamp_delay(s.delay + (bernoulli(rng, 0.5) ? 1 : -1), p);
      }
      break;
    }
    case MutationOp::AddSynapse: {
      const auto candidates = free_edges(net);
      const auto [pre, post] = pick(candidates, rng);
      add_edge(net, pre, post, rng);
      break;
    }
    case MutationOp::DeleteSynapse:
      net.synapses.erase(net.synapses.begin() +
                         static_cast<std::ptrdiff_t>(
                             std::uniform_int_distribution<std::size_t>(0, net.synapses.size() - 1)(rng)));
      break;
    case MutationOp::AddHiddenNeuron:
      add_hidden_neuron(net, rng);
      break;
    case MutationOp::DeleteHiddenNeuron:
      remove_neuron(net, pick(ids_with_role(net, {NeuronRole::Hidden}), rng));
      break;
  }
  return net;
}

Network mutate(const Network& network, Rng& rng, MutationOp* applied) {
  std::vector<MutationOp> ops;
  for (int i = 0; i < kMutationOpCount; ++i) {
    const auto op = static_cast<MutationOp>(i);
    if (mutation_applicable(network, op)) ops.push_back(op);
  }
  if (ops.empty()) return network;
  // Uniform over all operators with redraws on inapplicable ones is the same
  // distribution as uniform over the applicable ones.
  const MutationOp op = pick(ops, rng);
  if (applied != nullptr) *applied = op;
  return apply_mutation(network, op, rng);
}

Network crossover(const Network& a, const Network& b, Rng& rng) {
  require_compatible(a, b, "crossover");
  std::map<int, const Neuron*> na, nb;
  for (const auto& n : a.neurons) na[n.id] = &n;
  for (const auto& n : b.neurons) nb[n.id] = &n;
  std::set<int> all_ids;
  for (const auto& [id, _] : na) all_ids.insert(id);
  for (const auto& [id, _] : nb) all_ids.insert(id);

  Network child;
  child.profile = a.profile;
  child.input_ids = a.input_ids;
  child.output_ids = a.output_ids;
  for (int id : all_ids) {
    auto ia = na.find(id);
    auto ib = nb.find(id);
    const bool in_a = ia != na.end(), in_b = ib != nb.end();
    const Neuron& sample = in_a ? *ia->second : *ib->second;
    if (in_a && in_b) {
      // Shared gene: scaffold or matching hidden neuron.
      child.neurons.push_back(bernoulli(rng, 0.5) ? *ia->second : *ib->second);
    } else if (sample.role == NeuronRole::Hidden && bernoulli(rng, 0.5)) {
      child.neurons.push_back(sample);
    }
  }

  std::set<int> kept;
  for (const auto& n : child.neurons) kept.insert(n.id);
  std::map<std::pair<int, int>, std::pair<const Synapse*, const Synapse*>> edges;
  for (const auto& s : a.synapses) edges[{s.pre, s.post}].first = &s;
  for (const auto& s : b.synapses) edges[{s.pre, s.post}].second = &s;
  for (const auto& [key, parents] : edges) {
    if (!kept.contains(key.first) || !kept.contains(key.second)) continue;
    const auto [sa, sb] = parents;
    const Synapse* chosen = (sa && sb) ? (bernoulli(rng, 0.5) ? sa : sb) : (sa ? sa : sb);
    child.synapses.push_back(*chosen);
  }
  renumber_synapses(child);
  recompute_delays(child);
  return child;
}

Network merge(const Network& a, const Network& b, Rng& rng) {
  require_compatible(a, b, "merge");
  Network child = a;
  std::map<int, int> relabel;
  for (const auto& n : child.neurons) relabel[n.id] = n.id;  // scaffold ids are shared
  int next_id = a.next_neuron_id();
  std::vector<Neuron> b_hidden;
  for (const auto& n : b.neurons) {
    if (n.role == NeuronRole::Hidden) b_hidden.push_back(n);
  }
  std::sort(b_hidden.begin(), b_hidden.end(), [](const Neuron& x, const Neuron& y) { return x.id < y.id; });
  for (auto n : b_hidden) {
    relabel[n.id] = next_id;
    n.id = next_id++;
    child.neurons.push_back(n);
  }

  int next_synapse = child.next_synapse_id();
  for (const auto& s : b.synapses) {
    Synapse copy = s;
    copy.pre = relabel.at(s.pre);
    copy.post = relabel.at(s.post);
    auto existing = std::find_if(child.synapses.begin(), child.synapses.end(),
                                 [&](const Synapse& c) { return c.pre == copy.pre && c.post == copy.post; });
    if (existing != child.synapses.end()) {
      if (bernoulli(rng, 0.5)) {
        existing->weight = copy.weight;
        existing->delay = copy.delay;
      }
      continue;
    }
    copy.id = next_synapse++;
    child.synapses.push_back(copy);
  }
  recompute_delays(child);
  return child;
}

// ---------------------------------------------------------------------------

namespace {

std::size_t tournament(const Population& pop, int size, Rng& rng) {
  std::uniform_int_distribution<std::size_t> dist(0, pop.size() - 1);
  std::size_t best = dist(rng);
  for (int i = 1; i < size; ++i) {
    const std::size_t c = dist(rng);
    if (*pop[c].fitness > *pop[best].fitness) best = c;
  }
  return best;
}

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kBreedStream = 0xB4EED;

}  // namespace

EvolutionResult evolve(const Network& io_template, const Evaluator& evaluator, const FitnessConfig& fitness,
                       const EvolutionConfig& cfg, const GenerationCallback& on_generation) {
  cfg.validate();
  fitness.validate();
  if (fitness.variation) fitness.variation->validate_for(io_template.profile);

  Rng init_rng = make_rng({cfg.master_seed, kInitStream});
  Population pop = init_population(io_template, cfg, init_rng);
  EvolutionResult result;
  std::optional<Individual> best;

  for (int gen = 0;; ++gen) {
    std::vector<int> failed(pop.size(), 0);
    parallel_for(pop.size(), cfg.threads, [&](std::size_t i) {
      auto& ind = pop[i];
      if (ind.fitness) return;
      Rng rng = make_rng({cfg.master_seed, static_cast<std::uint64_t>(gen), static_cast<std::uint64_t>(i)});
      try {
        auto r = multi_objective_fitness(ind.network, evaluator, fitness, rng);
        ind.fitness = r.fitness;
        ind.detail = std::move(r.detail);
      } catch (const std::exception& e) {
        ind.fitness = -std::numeric_limits<double>::infinity();
        ind.detail = {};
        failed[i] = 1;
        std::cerr << fmt::format("warning: generation {} individual {}: evaluation failed: {}\n", gen, i, e.what());
      }
    });

    GenerationStats s;
    s.generation = gen;
    s.population_size = static_cast<int>(pop.size());
    s.failed_evaluations = std::accumulate(failed.begin(), failed.end(), 0);
    std::size_t best_idx = 0;
    double fitness_sum = 0.0, hidden_sum = 0.0, synapse_sum = 0.0;
    std::size_t finite = 0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (*pop[i].fitness > *pop[best_idx].fitness) best_idx = i;
      if (std::isfinite(*pop[i].fitness)) {
        fitness_sum += *pop[i].fitness;
        ++finite;
      }
      hidden_sum += static_cast<double>(pop[i].network.hidden_count());
      synapse_sum += static_cast<double>(pop[i].network.synapse_count());
    }
    const double n = static_cast<double>(pop.size());
    s.best_fitness = *pop[best_idx].fitness;
    s.mean_fitness = finite > 0 ? fitness_sum / static_cast<double>(finite) : std::nan("");
    s.mean_hidden = hidden_sum / n;
    s.mean_synapses = synapse_sum / n;
    s.best_performance = pop[best_idx].detail.performance;
    s.best_mean_variation_performance = pop[best_idx].detail.mean_variation_performance;
    if (!best || *pop[best_idx].fitness > *best->fitness) best = pop[best_idx];

    const bool done = gen >= cfg.max_generations || (cfg.target_fitness && s.best_fitness >= *cfg.target_fitness);
    if (!done) {
      // Breed the next generation.
      Rng rng = make_rng({cfg.master_seed, static_cast<std::uint64_t>(gen), kBreedStream});
      std::vector<std::size_t> order(pop.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t x, std::size_t y) { return *pop[x].fitness > *pop[y].fitness; });
      Population next;
      next.reserve(pop.size());
      for (int e = 0; e < cfg.elitism; ++e) next.push_back(pop[order[static_cast<std::size_t>(e)]]);
      while (next.size() < pop.size()) {
        Network child = pop[tournament(pop, cfg.tournament_size, rng)].network;
        if (bernoulli(rng, cfg.crossover_rate)) {
          child = crossover(child, pop[tournament(pop, cfg.tournament_size, rng)].network, rng);
          ++s.crossovers;
        }
        if (bernoulli(rng, cfg.merge_rate)) {
          child = merge(child, pop[tournament(pop, cfg.tournament_size, rng)].network, rng);
          ++s.merges;
        }
        if (bernoulli(rng, cfg.mutation_rate)) {
          child = mutate(child, rng);
          ++s.mutations;
        }
        next.push_back({std::move(child), std::nullopt, {}});
        ++s.offspring;
      }
      if (on_generation) on_generation(s, pop);
      result.stats.push_back(s);
      pop = std::move(next);
      continue;
    }
    if (on_generation) on_generation(s, pop);
    result.stats.push_back(s);
    break;
  }

  result.best = std::move(*best);
  result.final_population = std::move(pop);
  return result;
}

void write_stats_csv_header(std::ostream& out) {
  out << "generation,best_fitness,mean_fitness,mean_hidden,mean_synapses,best_performance,"
         "best_mean_variation_performance\n";
}

void write_stats_csv_row(std::ostream& out, const GenerationStats& s) {
  out << fmt::format("{},{},{},{},{},{},{}\n", s.generation, s.best_fitness, s.mean_fitness, s.mean_hidden,
                     s.mean_synapses, s.best_performance,
                     s.best_mean_variation_performance ? fmt::format("{}", *s.best_mean_variation_performance)
                                                       : std::string());
}

}  // namespace snnevo
