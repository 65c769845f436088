#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace snnevo {

enum class ProfileKind { Digital, Analog };
enum class DelaySource { Explicit, Distance };
enum class NeuronRole { Input, Hidden, Output };

/// Parameter domains of a neuromorphic target.
///
/// Digital: integer weights in [-1024, 1024], integer thresholds in [0, 1023],
/// explicit 4-bit delays in [1, 15].
/// Analog: real weights in [-1, 1], real thresholds in [0, 1], delays derived
/// from the Euclidean distance between neuron positions.
struct ArchitectureProfile {
  ProfileKind kind = ProfileKind::Digital;
  double weight_min = -1024.0;
  double weight_max = 1024.0;
  bool weight_is_integer = true;
  double threshold_min = 0.0;
  double threshold_max = 1023.0;
  int delay_min = 1;
  int delay_max = 15;
  DelaySource delay_source = DelaySource::Explicit;
  double distance_to_delay_scale = 1.0;

  static ArchitectureProfile digital();
  static ArchitectureProfile analog(double distance_to_delay_scale = 1.0);

  bool operator==(const ArchitectureProfile&) const = default;
};

using Position = std::array<double, 3>;

inline constexpr int kDefaultRefractoryPeriod = 1;

struct Neuron {
  int id = 0;
  NeuronRole role = NeuronRole::Hidden;
  double threshold = 0.0;
  int refractory_period = kDefaultRefractoryPeriod;
  Position position{};  // only meaningful for the analog profile

  bool operator==(const Neuron&) const = default;
};

struct Synapse {
  int id = 0;
  int pre = 0;
  int post = 0;
  double weight = 0.0;
  int delay = 1;

  bool operator==(const Synapse&) const = default;
};

/// Directed graph of neurons and synapses. Treated as a value: every
/// operation in this library that changes a network returns a new one.
struct Network {
  ArchitectureProfile profile;
  std::vector<Neuron> neurons;
  std::vector<Synapse> synapses;
  std::vector<int> input_ids;
  std::vector<int> output_ids;

  const Neuron* find_neuron(int id) const;
  const Synapse* find_synapse(int id) const;
  const Synapse* find_edge(int pre, int post) const;
  bool has_edge(int pre, int post) const { return find_edge(pre, post) != nullptr; }

  std::size_t hidden_count() const;
  std::size_t neuron_count() const { return neurons.size(); }
  std::size_t synapse_count() const { return synapses.size(); }

  int next_neuron_id() const;
  int next_synapse_id() const;

  bool operator==(const Network&) const = default;
};

/// A network with only input and output neurons and no synapses.
Network make_io_network(const ArchitectureProfile& profile, int num_inputs, int num_outputs,
                        double threshold = 0.0);

// Quantization. Digital: round half away from zero, then clamp. Analog: clamp.
double quantize_weight(double w, const ArchitectureProfile& profile);
double quantize_threshold(double threshold, const ArchitectureProfile& profile);
int clamp_delay(int delay, const ArchitectureProfile& profile);

/// ceil(distance * scale), at least 1.
int distance_delay(const Position& a, const Position& b, const ArchitectureProfile& profile);

/// Sets every synapse delay from neuron positions. No-op for explicit-delay profiles.
void recompute_delays(Network& network);

struct Violation {
  std::string kind;
  int element_id = -1;
  std::string detail;
};

/// Checks every structural and domain invariant. Violations are data.
std::vector<Violation> validate(const Network& network);
inline bool is_valid(const Network& network) { return validate(network).empty(); }

/// Equality up to synapse ids and element ordering.
bool structurally_equal(const Network& a, const Network& b);

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by deserialization when the document parses but fails validation.
class InvalidNetworkError : public std::runtime_error {
 public:
  InvalidNetworkError(std::string what, std::vector<Violation> violations)
      : std::runtime_error(std::move(what)), violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

std::string serialize(const Network& network);
Network deserialize(std::string_view text);

void save_network(const Network& network, const std::filesystem::path& path);
Network load_network(const std::filesystem::path& path);

std::string_view to_string(NeuronRole role);
std::string_view to_string(ProfileKind kind);

}  // namespace snnevo
