#include "snnevo/experiment.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <fmt/core.h>

namespace snnevo {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Typed access to one JSON object; every key must be consumed.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  bool has(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = node_.find(key);
    return it != node_.end() && !it->is_null();
  }

  const json& raw(std::string_view key) {
    if (!has(key)) throw ConfigError(field(key), "required field is missing");
    return node_.at(std::string(key));
  }

  Section section(std::string_view key) { return Section(raw(key), field(key)); }

  double number(std::string_view key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    return v.get<double>();
  }
  double number(std::string_view key, double fallback) { return has(key) ? number(key) : fallback; }

  std::int64_t integer(std::string_view key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    return v.get<std::int64_t>();
  }
  int integer(std::string_view key, int fallback) { return has(key) ? static_cast<int>(integer(key)) : fallback; }

  std::uint64_t seed(std::string_view key) {
    const json& v = raw(key);
    if (!v.is_number_unsigned()) throw ConfigError(field(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  std::uint64_t seed(std::string_view key, std::uint64_t fallback) { return has(key) ? seed(key) : fallback; }

  std::string string(std::string_view key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<std::int64_t> integers(std::string_view key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array");
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) throw ConfigError(fmt::format("{}[{}]", field(key), i), "expected an integer");
      out.push_back(v[i].get<std::int64_t>());
    }
    return out;
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.contains(it.key())) throw ConfigError(field(it.key()), "unknown field");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

// Rethrows library validation failures as ConfigError on `path`.
template <typename F>
void check(const std::string& path, F&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

EpsilonRange parse_epsilon(Section& s) {
  const json& v = s.raw("epsilon");
  if (v.is_number()) return {v.get<double>(), v.get<double>()};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ConfigError(s.field("epsilon"), "expected a number or a [lo, hi] pair");
}

PerturbationModel parse_model(Section s) {
  const std::string kind = s.string("kind");
  PerturbationModel m;
  if (kind == "bit_flip") {
    m = PerturbationModel::bit_flip(s.integer("bit_index", 7));
  } else if (kind == "diminish" || kind == "subtract") {
    const EpsilonRange eps = parse_epsilon(s);
    m = kind == "diminish" ? PerturbationModel::diminish(eps.lo, eps.hi) : PerturbationModel::subtract(eps.lo, eps.hi);
  } else {
    throw ConfigError(s.field("kind"), fmt::format("unknown fault kind '{}'", kind));
  }
  s.finish();
  return m;
}

VariationSpec parse_variation(Section s) {
  VariationSpec v;
  v.model = parse_model(s.section("model"));
  v.per_synapse_probability = s.number("per_synapse_probability", v.per_synapse_probability);
  s.finish();
  return v;
}

RateEncoderConfig parse_encoder(Section s, RateEncoderConfig enc) {
  enc.window = s.integer("window", enc.window);
  enc.max_rate = s.integer("max_rate", enc.max_rate);
  enc.charge_per_spike = s.number("charge_per_spike", enc.charge_per_spike);
  if (s.has("features")) {
    const json& arr = s.raw("features");
    if (!arr.is_array()) throw ConfigError(s.field("features"), "expected an array");
    enc.features.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section f(arr[i], fmt::format("{}[{}]", s.field("features"), i));
      enc.features.push_back({f.number("min"), f.number("max")});
      f.finish();
    }
  }
  s.finish();
  return enc;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& doc) {
  ExperimentConfig cfg;
  cfg.source = doc;
  Section root(doc, "");

  if (root.has("name")) cfg.name = root.string("name");
  const std::string task = root.string("task");
  if (task == "pb") {
    cfg.task = TaskKind::PoleBalance;
  } else if (task == "classify") {
    cfg.task = TaskKind::Classify;
  } else {
    throw ConfigError("task", fmt::format("unknown task '{}' (expected pb or classify)", task));
  }
  const std::string profile = root.string("profile");
  if (profile == "digital") {
    cfg.profile = ProfileKind::Digital;
  } else if (profile == "analog") {
    cfg.profile = ProfileKind::Analog;
  } else {
    throw ConfigError("profile", fmt::format("unknown profile '{}' (expected digital or analog)", profile));
  }
  cfg.master_seed = root.seed("master_seed");
  if (root.has("output_dir")) cfg.output_dir = root.string("output_dir");

  {
    Section e = root.section("evolution");
    auto& ev = cfg.evolution;
    ev.population_size = static_cast<int>(e.integer("population_size"));
    ev.max_generations = static_cast<int>(e.integer("max_generations"));
    ev.crossover_rate = e.number("crossover_rate", ev.crossover_rate);
    ev.mutation_rate = e.number("mutation_rate", ev.mutation_rate);
    ev.merge_rate = e.number("merge_rate", ev.merge_rate);
    ev.tournament_size = e.integer("tournament_size", ev.tournament_size);
    ev.elitism = e.integer("elitism", ev.elitism);
    ev.threads = e.integer("threads", ev.threads);
    if (e.has("target_fitness")) ev.target_fitness = e.number("target_fitness");
    e.finish();
    ev.master_seed = cfg.master_seed;
    check("evolution", [&] { ev.validate(); });
  }

  if (root.has("pb")) {
    Section p = root.section("pb");
    auto& phys = cfg.pole.physics;
    phys.max_time = p.number("max_time", phys.max_time);
    phys.dt = p.number("dt", phys.dt);
    phys.initial_range = p.number("initial_range", phys.initial_range);
    if (p.has("episode_seeds")) {
      cfg.pole.episode_seeds.clear();
      for (auto s : p.integers("episode_seeds")) {
        if (s < 0) throw ConfigError(p.field("episode_seeds"), "seeds must be non-negative");
        cfg.pole.episode_seeds.push_back(static_cast<std::uint64_t>(s));
      }
      if (cfg.pole.episode_seeds.empty()) throw ConfigError(p.field("episode_seeds"), "needs at least one seed");
    }
    cfg.pole.probe_seed = p.seed("probe_seed", cfg.pole.probe_seed);
    p.finish();
    check("pb", [&] { phys.validate(); });
  }

  if (root.has("classify")) {
    Section c = root.section("classify");
    auto& sig = cfg.signal;
    sig.num_samples = c.integer("num_samples", sig.num_samples);
    sig.num_classes = c.integer("num_classes", sig.num_classes);
    sig.noise_sigma = c.number("noise_sigma", sig.noise_sigma);
    sig.seed = c.seed("seed", sig.seed);
    sig.feature_length = c.integer("feature_length", sig.feature_length);
    sig.train_fraction = c.number("train_fraction", sig.train_fraction);
    c.finish();
    if (sig.num_classes < 2) throw ConfigError("classify.num_classes", "needs at least two classes");
    if (sig.num_samples < sig.num_classes) throw ConfigError("classify.num_samples", "fewer samples than classes");
    if (sig.feature_length < 1) throw ConfigError("classify.feature_length", "must be positive");
    if (!(sig.noise_sigma >= 0.0)) throw ConfigError("classify.noise_sigma", "must be non-negative");
    if (!(sig.train_fraction > 0.0 && sig.train_fraction < 1.0)) {
      throw ConfigError("classify.train_fraction", "must be in (0, 1)");
    }
  }

  const RateEncoderConfig base_encoder =
      cfg.task == TaskKind::PoleBalance ? default_pole_encoder() : default_signal_encoder(cfg.signal.feature_length);
  if (root.has("encoder")) {
    cfg.encoder = parse_encoder(root.section("encoder"), base_encoder);
    check("encoder", [&] { cfg.encoder->validate(); });
  }
  const double optimal = cfg.task == TaskKind::PoleBalance ? cfg.pole.physics.max_time : 1.0;

  const ArchitectureProfile prof = make_profile(cfg);
  if (root.has("variation_spec")) {
    cfg.variation_spec = parse_variation(root.section("variation_spec"));
    check("variation_spec", [&] { cfg.variation_spec->validate_for(prof); });
  }

  {
    auto& f = cfg.fitness;
    f.optimal_performance = optimal;
    f.variation = cfg.variation_spec;
    if (!cfg.variation_spec) {
      f.w1 = 1.0;
      f.w2 = 0.0;
    }
    if (root.has("fitness")) {
      Section s = root.section("fitness");
      f.delta = s.number("delta", f.delta);
      f.n_variations = s.integer("n_variations", f.n_variations);
      f.w1 = s.number("w1", f.w1);
      f.w2 = s.number("w2", f.w2);
      s.finish();
    }
    check("fitness", [&] { f.validate(); });
  }

  if (root.has("prune")) {
    Section s = root.section("prune");
    PruneConfig p;
    p.frequency_ratio = s.number("frequency_ratio", p.frequency_ratio);
    s.finish();
    check("prune", [&] { p.validate(); });
    cfg.prune = p;
  }

  if (root.has("sweep")) {
    Section s = root.section("sweep");
    SweepConfig sw;
    if (s.has("k_values")) {
      sw.k_values.clear();
      for (auto k : s.integers("k_values")) sw.k_values.push_back(static_cast<int>(k));
    }
    sw.trials_per_k = s.integer("trials_per_k", sw.trials_per_k);
    sw.model = parse_model(s.section("model"));
    sw.seed = s.seed("seed", cfg.master_seed);
    sw.failure_threshold = s.number("failure_threshold", cfg.task == TaskKind::PoleBalance ? 50.0 : 0.5);
    sw.histogram_bins = s.integer("histogram_bins", sw.histogram_bins);
    sw.threads = s.integer("threads", sw.threads);
    s.finish();
    sw.optimal_performance = optimal;
    check("sweep", [&] { sw.validate(); });
    check("sweep.model", [&] { sw.model.validate_for(prof); });
    cfg.sweep = sw;
  }

  root.finish();
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", fmt::format("cannot read config '{}'", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return parse_experiment_config(doc);
}

ArchitectureProfile make_profile(const ExperimentConfig& cfg) {
  return cfg.profile == ProfileKind::Digital ? ArchitectureProfile::digital() : ArchitectureProfile::analog();
}

std::unique_ptr<Task> make_task(const ExperimentConfig& cfg) {
  if (cfg.task == TaskKind::PoleBalance) {
    PoleBalanceSettings s = cfg.pole;
    if (cfg.encoder) s.encoder = *cfg.encoder;
    return std::make_unique<PoleBalanceTask>(std::move(s));
  }
  RateEncoderConfig enc = cfg.encoder ? *cfg.encoder : default_signal_encoder(cfg.signal.feature_length);
  return std::make_unique<ClassificationTask>(generate_signal_dataset(cfg.signal), std::move(enc), Split::Train);
}

Network make_template(const ExperimentConfig& cfg, const Task& task) {
  const ArchitectureProfile prof = make_profile(cfg);
  const double threshold = prof.kind == ProfileKind::Digital ? 512.0 : 0.5;
  return make_io_network(prof, task.input_count(), task.output_count(), threshold);
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

namespace {

fs::path resolve_out(const ExperimentConfig& cfg, const CommandOptions& opts) {
  return opts.out ? *opts.out : cfg.output_dir;
}

ExperimentConfig load_with_overrides(const CommandOptions& opts) {
  ExperimentConfig cfg = load_experiment_config(opts.config);
  if (opts.seed) {
    cfg.master_seed = *opts.seed;
    cfg.evolution.master_seed = *opts.seed;
    if (cfg.sweep) cfg.sweep->seed = *opts.seed;
  }
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

Network load_input_network(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("<network>", fmt::format("network file '{}' not found", path.string()));
  try {
    return load_network(path);
  } catch (const std::exception& e) {
    throw ConfigError("<network>", e.what());
  }
}

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Maps exceptions onto exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

json manifest(const ExperimentConfig& cfg, std::string_view command, double wall_seconds) {
  const std::string canonical = cfg.source.dump();
  return {{"tool", "snnevo"},
          {"version", std::string(kVersion)},
          {"command", std::string(command)},
          {"config", cfg.source},
          {"config_hash", fnv1a_hex(canonical)},
          {"master_seed", cfg.master_seed},
          {"wall_time_seconds", wall_seconds}};
}

void check_arity(const Network& net, const Task& task) {
  if (static_cast<int>(net.input_ids.size()) != task.input_count() ||
      static_cast<int>(net.output_ids.size()) != task.output_count()) {
    throw UsageError(fmt::format("network has {}/{} inputs/outputs, task expects {}/{}", net.input_ids.size(),
                                 net.output_ids.size(), task.input_count(), task.output_count()));
  }
}

}  // namespace

int cmd_train(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const auto start = std::chrono::steady_clock::now();
    const ExperimentConfig cfg = load_with_overrides(opts);
    const fs::path out = resolve_out(cfg, opts);
    fs::create_directories(out);

    const auto task = make_task(cfg);
    const Network tmpl = make_template(cfg, *task);
    std::ostringstream csv;
    write_stats_csv_header(csv);
    const auto result = evolve(tmpl, task->evaluator(), cfg.fitness, cfg.evolution,
                               [&](const GenerationStats& s, const Population&) {
                                 write_stats_csv_row(csv, s);
                                 log << fmt::format("gen {:4d}  best {:.6g}  mean {:.6g}  hidden {:.2f}\n",
                                                    s.generation, s.best_fitness, s.mean_fitness, s.mean_hidden);
                               });

    save_network(result.best.network, out / "best_network.json");
    write_text(out / "generations.csv", csv.str());
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json m = manifest(cfg, "train", wall);
    m["generations"] = result.stats.size();
    m["best_fitness"] = result.best.fitness.value_or(0.0);
    m["best_performance"] = result.best.detail.performance;
    m["best_hidden"] = result.best.network.hidden_count();
    write_text(out / "manifest.json", m.dump(2) + "\n");
    log << fmt::format("wrote {}\n", out.string());
    return int{kExitOk};
  });
}

int cmd_prune(const fs::path& network, const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = load_with_overrides(opts);
    const Network net = load_input_network(network);
    const auto task = make_task(cfg);
    check_arity(net, *task);
    const fs::path out = resolve_out(cfg, opts);
    fs::create_directories(out);

    const PruneResult pr = prune(net, *task, cfg.prune.value_or(PruneConfig{}));
    save_network(pr.network, out / "pruned_network.json");
    std::ostringstream csv;
    write_prune_csv(csv, network.stem().string(), pr.record);
    write_text(out / "prune_record.csv", csv.str());
    const json stats = {{"network_id", network.stem().string()},
                        {"before", to_json(pr.record.before)},
                        {"after", to_json(pr.record.after)}};
    write_text(out / "prune_stats.json", stats.dump(2) + "\n");
    log << fmt::format("removed {} hidden neurons ({} -> {})\n", pr.record.removed.size(),
                       pr.record.before.hidden_count, pr.record.after.hidden_count);
    return int{kExitOk};
  });
}

int cmd_sweep(const fs::path& network, const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = load_with_overrides(opts);
    if (!cfg.sweep) throw ConfigError("sweep", "required field is missing");
    const Network net = load_input_network(network);
    const auto task = make_task(cfg);
    check_arity(net, *task);
    const fs::path out = resolve_out(cfg, opts);
    fs::create_directories(out);

    const SweepReport report = sweep(net, task->evaluator(), *cfg.sweep);
    std::ostringstream csv;
    write_sweep_csv(csv, network.stem().string(), report.records);
    write_text(out / "sweep.csv", csv.str());
    json summary = to_json(report.aggregates, *cfg.sweep);
    summary["network_id"] = network.stem().string();
    write_text(out / "sweep_summary.json", summary.dump(2) + "\n");
    log << fmt::format("{} records, mean degradation {:.6g}\n", report.records.size(),
                       report.aggregates.mean_degradation);
    return int{kExitOk};
  });
}

int cmd_stats(const fs::path& network, const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = load_with_overrides(opts);
    const Network net = load_input_network(network);
    const auto task = make_task(cfg);
    check_arity(net, *task);
    json doc = to_json(measure_stats(net, *task));
    doc["network_id"] = network.stem().string();
    if (opts.out) {
      fs::create_directories(*opts.out);
      write_text(*opts.out / "stats.json", doc.dump(2) + "\n");
    } else {
      log << doc.dump(2) << '\n';
    }
    return int{kExitOk};
  });
}

namespace {

json arm_json(const std::vector<SweepRecord>& records) {
  std::vector<double> deg;
  deg.reserve(records.size());
  for (const auto& r : records) deg.push_back(r.degradation);
  json arm = {{"count", deg.size()}};
  if (deg.size() >= 2) {
    const NormalFit fit = fit_normal(deg);
    arm["mean_degradation"] = fit.mean;
    arm["stddev_degradation"] = fit.stddev;
  } else {
    arm["mean_degradation"] = deg.front();
    arm["stddev_degradation"] = nullptr;
  }
  const Histogram h = make_histogram(deg, 0.0, 1.0, 10);
  arm["degradation_histogram"] = {{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}};
  return arm;
}

std::vector<SweepRecord> read_run_dir(const fs::path& dir) {
  const fs::path csv = dir / "sweep.csv";
  std::ifstream in(csv);
  if (!in) throw UsageError(fmt::format("'{}' has no sweep.csv", dir.string()));
  std::vector<SweepRecord> records;
  try {
    records = read_sweep_csv(in);
  } catch (const std::exception& e) {
    throw UsageError(fmt::format("'{}': {}", csv.string(), e.what()));
  }
  if (records.empty()) throw UsageError(fmt::format("'{}' holds no records", csv.string()));
  return records;
}

}  // namespace

json compare_sweeps(const std::vector<SweepRecord>& a, const std::vector<SweepRecord>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("both arms need at least one record");
  json doc = {{"a", arm_json(a)}, {"b", arm_json(b)}};
  doc["difference_of_means"] = doc["b"]["mean_degradation"].get<double>() - doc["a"]["mean_degradation"].get<double>();
  return doc;
}

int cmd_compare(const fs::path& run_a, const fs::path& run_b, const CommandOptions& opts, std::ostream& log,
                std::ostream& err) {
  return guarded(err, [&] {
    json doc = compare_sweeps(read_run_dir(run_a), read_run_dir(run_b));
    doc["a"]["run_dir"] = run_a.string();
    doc["b"]["run_dir"] = run_b.string();
    if (opts.out) {
      fs::create_directories(*opts.out);
      write_text(*opts.out / "comparison.json", doc.dump(2) + "\n");
    } else {
      log << doc.dump(2) << '\n';
    }
    return int{kExitOk};
  });
}

}  // namespace snnevo
