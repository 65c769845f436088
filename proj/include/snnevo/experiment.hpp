#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "snnevo/environments.hpp"
#include "snnevo/evolution.hpp"
#include "snnevo/fitness.hpp"
#include "snnevo/perturbation.hpp"
#include "snnevo/pruning.hpp"

namespace snnevo {

inline constexpr std::string_view kVersion = "1.0.0";

/// Invalid experiment configuration; what() starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class TaskKind { PoleBalance, Classify };

struct ExperimentConfig {
  std::string name;
  TaskKind task = TaskKind::PoleBalance;
  ProfileKind profile = ProfileKind::Digital;
  std::uint64_t master_seed = 1;
  std::filesystem::path output_dir = ".";
  EvolutionConfig evolution;
  FitnessConfig fitness;
  std::optional<VariationSpec> variation_spec;
  PoleBalanceSettings pole;
  SignalDatasetConfig signal;
  std::optional<RateEncoderConfig> encoder;  // task default when absent
  std::optional<PruneConfig> prune;
  std::optional<SweepConfig> sweep;
  nlohmann::json source;  // the document as read
};

ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

ArchitectureProfile make_profile(const ExperimentConfig& cfg);
std::unique_ptr<Task> make_task(const ExperimentConfig& cfg);
Network make_template(const ExperimentConfig& cfg, const Task& task);

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitRuntime = 2 };

// Each command writes its outputs under the resolved output directory and
// returns an exit code; diagnostics go to `err`.
int cmd_train(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_prune(const std::filesystem::path& network, const CommandOptions& opts, std::ostream& log,
              std::ostream& err);
int cmd_sweep(const std::filesystem::path& network, const CommandOptions& opts, std::ostream& log,
              std::ostream& err);
int cmd_stats(const std::filesystem::path& network, const CommandOptions& opts, std::ostream& log,
              std::ostream& err);
/// Compares the sweep.csv files of two run directories.
int cmd_compare(const std::filesystem::path& run_a, const std::filesystem::path& run_b,
                const CommandOptions& opts, std::ostream& log, std::ostream& err);

/// Comparison document for two sets of sweep records.
nlohmann::json compare_sweeps(const std::vector<SweepRecord>& a, const std::vector<SweepRecord>& b);

std::string fnv1a_hex(std::string_view data);

}  // namespace snnevo
