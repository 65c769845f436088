#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "snnevo/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Evolve, prune and stress-test spiking neural networks"};
  app.set_version_flag("--version", std::string(snnevo::kVersion));
  app.require_subcommand(1);

  snnevo::CommandOptions opts;
  std::string config, out, network, run_a, run_b;
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "Override master_seed");
    cmd->add_option("--out", out, "Override output_dir");
  };

  auto* train = app.add_subcommand("train", "Evolve networks and save the best one");
  common(train);
  auto* prune = app.add_subcommand("prune", "Frequency-based pruning of a trained network");
  prune->add_option("network", network, "Network file")->required();
  common(prune);
  auto* sweep = app.add_subcommand("sweep", "Post-hoc perturbation sweep");
  sweep->add_option("network", network, "Network file")->required();
  common(sweep);
  auto* stats = app.add_subcommand("stats", "Size and spiking statistics of a network");
  stats->add_option("network", network, "Network file")->required();
  common(stats);
  auto* compare = app.add_subcommand("compare", "Compare the sweeps of two run directories");
  compare->add_option("run_a", run_a, "First run directory")->required();
  compare->add_option("run_b", run_b, "Second run directory")->required();
  compare->add_option("--out", out, "Directory for comparison.json (stdout when absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : snnevo::kExitUsage;
  }

  opts.config = config;
  for (auto* cmd : {train, prune, sweep, stats}) {
    if (cmd->parsed() && cmd->count("--seed") > 0) opts.seed = seed;
  }
  if (!out.empty()) opts.out = out;

  if (train->parsed()) return snnevo::cmd_train(opts, std::cout, std::cerr);
  if (prune->parsed()) return snnevo::cmd_prune(network, opts, std::cout, std::cerr);
  if (sweep->parsed()) return snnevo::cmd_sweep(network, opts, std::cout, std::cerr);
  if (stats->parsed()) return snnevo::cmd_stats(network, opts, std::cout, std::cerr);
  return snnevo::cmd_compare(run_a, run_b, opts, std::cout, std::cerr);
}
