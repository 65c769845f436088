#include "snnevo/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <fmt/core.h>

#include "json.hpp"

namespace snnevo {

using nlohmann::json;

ArchitectureProfile ArchitectureProfile::digital() { return ArchitectureProfile{}; }

ArchitectureProfile ArchitectureProfile::analog(double distance_to_delay_scale) {
  ArchitectureProfile p;
  p.kind = ProfileKind::Analog;
  p.weight_min = -1.0;
  p.weight_max = 1.0;
  p.weight_is_integer = false;
  p.threshold_min = 0.0;
  p.threshold_max = 1.0;
  p.delay_min = 1;
  // Positions live in the unit cube, so the longest edge is sqrt(3).
  p.delay_max = std::max(1, static_cast<int>(std::ceil(std::sqrt(3.0) * distance_to_delay_scale)));
  p.delay_source = DelaySource::Distance;
  p.distance_to_delay_scale = distance_to_delay_scale;
  return p;
}

const Neuron* Network::find_neuron(int id) const {
  auto it = std::find_if(neurons.begin(), neurons.end(), [id](const Neuron& n) { return n.id == id; });
  return it == neurons.end() ? nullptr : &*it;
}

const Synapse* Network::find_synapse(int id) const {
  auto it = std::find_if(synapses.begin(), synapses.end(), [id](const Synapse& s) { return s.id == id; });
  return it == synapses.end() ? nullptr : &*it;
}

const Synapse* Network::find_edge(int pre, int post) const {
  auto it = std::find_if(synapses.begin(), synapses.end(),
                         [&](const Synapse& s) { return s.pre == pre && s.post == post; });
  return it == synapses.end() ? nullptr : &*it;
}

std::size_t Network::hidden_count() const {
  return static_cast<std::size_t>(std::count_if(
      neurons.begin(), neurons.end(), [](const Neuron& n) { return n.role == NeuronRole::Hidden; }));
}

int Network::next_neuron_id() const {
  int next = 0;
  for (const auto& n : neurons) next = std::max(next, n.id + 1);
  return next;
}

int Network::next_synapse_id() const {
  int next = 0;
  for (const auto& s : synapses) next = std::max(next, s.id + 1);
  return next;
}

Network make_io_network(const ArchitectureProfile& profile, int num_inputs, int num_outputs,
                        double threshold) {
  if (num_inputs < 1 || num_outputs < 1) {
    throw std::invalid_argument("a network needs at least one input and one output");
  }
  Network net;
  net.profile = profile;
  const double t = quantize_threshold(threshold, profile);
  int id = 0;
  for (int i = 0; i < num_inputs; ++i, ++id) {
    net.neurons.push_back({id, NeuronRole::Input, t, kDefaultRefractoryPeriod, {}});
    net.input_ids.push_back(id);
  }
  for (int i = 0; i < num_outputs; ++i, ++id) {
    net.neurons.push_back({id, NeuronRole::Output, t, kDefaultRefractoryPeriod, {}});
    net.output_ids.push_back(id);
  }
  if (profile.delay_source == DelaySource::Distance) {
    // Deterministic spread along the cube diagonal; callers that want random
    // placement overwrite these.
    const double n = static_cast<double>(net.neurons.size());
    for (auto& neuron : net.neurons) {
      const double c = (neuron.id + 0.5) / n;
      neuron.position = {c, c, c};
    }
  }
  return net;
}

double quantize_weight(double w, const ArchitectureProfile& profile) {
  if (profile.weight_is_integer) w = std::round(w);
  return std::clamp(w, profile.weight_min, profile.weight_max);
}

double quantize_threshold(double threshold, const ArchitectureProfile& profile) {
  if (profile.kind == ProfileKind::Digital) threshold = std::round(threshold);
  return std::clamp(threshold, profile.threshold_min, profile.threshold_max);
}

int clamp_delay(int delay, const ArchitectureProfile& profile) {
  return std::clamp(delay, profile.delay_min, profile.delay_max);
}

int distance_delay(const Position& a, const Position& b, const ArchitectureProfile& profile) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
  return std::max(1, static_cast<int>(std::ceil(d * profile.distance_to_delay_scale)));
}

void recompute_delays(Network& network) {
  if (network.profile.delay_source != DelaySource::Distance) return;
  std::map<int, Position> positions;
  for (const auto& n : network.neurons) positions[n.id] = n.position;
  for (auto& s : network.synapses) {
    auto pre = positions.find(s.pre);
    auto post = positions.find(s.post);
    if (pre == positions.end() || post == positions.end()) continue;
    s.delay = distance_delay(pre->second, post->second, network.profile);
  }
}

std::vector<Violation> validate(const Network& net) {
  std::vector<Violation> out;
  auto report = [&](std::string kind, int id, std::string detail) {
    out.push_back({std::move(kind), id, std::move(detail)});
  };
  const auto& p = net.profile;

  if (!(p.weight_min < p.weight_max)) report("profile", -1, "weight_min must be below weight_max");
  if (!(p.threshold_min <= p.threshold_max)) report("profile", -1, "threshold_min above threshold_max");
  if (p.delay_min < 1) report("profile", -1, "delay_min must be at least 1");
  if (p.delay_max < p.delay_min) report("profile", -1, "delay_max below delay_min");
  if (p.delay_source == DelaySource::Distance && !(p.distance_to_delay_scale > 0.0)) {
    report("profile", -1, "distance_to_delay_scale must be positive");
  }

  std::map<int, const Neuron*> by_id;
  for (const auto& n : net.neurons) {
    if (!by_id.emplace(n.id, &n).second) {
      report("duplicate neuron id", n.id, "");
      continue;
    }
    if (!(n.threshold >= p.threshold_min && n.threshold <= p.threshold_max)) {
      report("threshold out of range", n.id, fmt::format("threshold {}", n.threshold));
    } else if (p.kind == ProfileKind::Digital && n.threshold != std::round(n.threshold)) {
      report("non-integer threshold", n.id, fmt::format("threshold {}", n.threshold));
    }
    if (n.refractory_period < 0) report("negative refractory period", n.id, "");
  }

  auto check_io = [&](const std::vector<int>& ids, NeuronRole role, std::string_view name) {
    if (ids.empty()) report(fmt::format("no {}", name), -1, "");
    std::set<int> seen;
    for (int id : ids) {
      if (!seen.insert(id).second) report(fmt::format("duplicate {} id", name), id, "");
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        report(fmt::format("missing {} neuron", name), id, "");
      } else if (it->second->role != role) {
        report("role mismatch", id, fmt::format("listed in {} but has role {}", name,
                                                to_string(it->second->role)));
      }
    }
    for (const auto& n : net.neurons) {
      if (n.role == role && !seen.contains(n.id)) {
        report("role mismatch", n.id, fmt::format("{} neuron not listed in {}", to_string(role), name));
      }
    }
  };
  check_io(net.input_ids, NeuronRole::Input, "inputs");
  check_io(net.output_ids, NeuronRole::Output, "outputs");
  for (int id : net.input_ids) {
    if (std::find(net.output_ids.begin(), net.output_ids.end(), id) != net.output_ids.end()) {
      report("input/output overlap", id, "");
    }
  }

  std::set<int> synapse_ids;
  std::set<std::pair<int, int>> edges;
  for (const auto& s : net.synapses) {
    if (!synapse_ids.insert(s.id).second) report("duplicate synapse id", s.id, "");
    auto pre = by_id.find(s.pre);
    auto post = by_id.find(s.post);
    if (pre == by_id.end() || post == by_id.end()) {
      report("dangling synapse", s.id,
             fmt::format("references missing neuron {}", pre == by_id.end() ? s.pre : s.post));
    }
    if (!edges.emplace(s.pre, s.post).second) {
      report("duplicate edge", s.id, fmt::format("{} -> {}", s.pre, s.post));
    }
    if (!(s.weight >= p.weight_min && s.weight <= p.weight_max)) {
      report("weight out of range", s.id, fmt::format("weight {}", s.weight));
    } else if (p.weight_is_integer && s.weight != std::round(s.weight)) {
      report("non-integer weight", s.id, fmt::format("weight {}", s.weight));
    }
    if (s.delay < p.delay_min || s.delay > p.delay_max) {
      report("delay out of range", s.id, fmt::format("delay {}", s.delay));
    }
    if (p.delay_source == DelaySource::Distance && pre != by_id.end() && post != by_id.end()) {
      const int expected = distance_delay(pre->second->position, post->second->position, p);
      if (s.delay != expected) {
        report("delay mismatch", s.id, fmt::format("delay {} but distance implies {}", s.delay, expected));
      }
    }
  }
  return out;
}

bool structurally_equal(const Network& a, const Network& b) {
  if (!(a.profile == b.profile) || a.input_ids != b.input_ids || a.output_ids != b.output_ids) {
    return false;
  }
  auto neurons = [](const Network& n) {
    auto v = n.neurons;
    std::sort(v.begin(), v.end(), [](const Neuron& x, const Neuron& y) { return x.id < y.id; });
    return v;
  };
  if (neurons(a) != neurons(b)) return false;
  auto edges = [](const Network& n) {
    std::vector<std::tuple<int, int, double, int>> v;
    for (const auto& s : n.synapses) v.emplace_back(s.pre, s.post, s.weight, s.delay);
    std::sort(v.begin(), v.end());
    return v;
  };
  return edges(a) == edges(b);
}

std::string_view to_string(NeuronRole role) {
  switch (role) {
    case NeuronRole::Input: return "input";
    case NeuronRole::Hidden: return "hidden";
    case NeuronRole::Output: return "output";
  }
  return "?";
}

std::string_view to_string(ProfileKind kind) {
  return kind == ProfileKind::Digital ? "digital" : "analog";
}

// ---------------------------------------------------------------------------
// JSON file format

namespace {

json number(double v, bool integral) {
  if (integral && v == std::round(v)) return static_cast<long long>(v);
  return v;
}

json profile_to_json(const ArchitectureProfile& p) {
  return json{{"kind", std::string(to_string(p.kind))},
              {"weight_min", number(p.weight_min, p.weight_is_integer)},
              {"weight_max", number(p.weight_max, p.weight_is_integer)},
              {"weight_is_integer", p.weight_is_integer},
              {"threshold_min", number(p.threshold_min, p.kind == ProfileKind::Digital)},
              {"threshold_max", number(p.threshold_max, p.kind == ProfileKind::Digital)},
              {"delay_min", p.delay_min},
              {"delay_max", p.delay_max},
              {"delay_source", p.delay_source == DelaySource::Explicit ? "explicit" : "distance"},
              {"distance_to_delay_scale", p.distance_to_delay_scale}};
}

// Field readers that report the json path of the offending value.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    for (const auto& [key, _] : j_.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        fail(fmt::format("unknown key '{}'", key));
      }
    }
  }

  const json& at(std::string_view key) const {
    auto it = j_.find(key);
    if (it == j_.end()) fail(fmt::format("missing field '{}'", key));
    return *it;
  }
  bool has(std::string_view key) const { return j_.contains(key); }

  double real(std::string_view key) const {
    const auto& v = at(key);
    if (!v.is_number()) fail_field(key, "expected a number");
    return v.get<double>();
  }
  int integer(std::string_view key) const {
    const auto& v = at(key);
    if (!v.is_number_integer()) fail_field(key, "expected an integer");
    return v.get<int>();
  }
  bool boolean(std::string_view key) const {
    const auto& v = at(key);
    if (!v.is_boolean()) fail_field(key, "expected a boolean");
    return v.get<bool>();
  }
  std::string string(std::string_view key) const {
    const auto& v = at(key);
    if (!v.is_string()) fail_field(key, "expected a string");
    return v.get<std::string>();
  }
  std::string field_path(std::string_view key) const { return fmt::format("{}.{}", path_, key); }

  [[noreturn]] void fail(std::string_view msg) const {
    throw ParseError(fmt::format("{}: {}", path_, msg));
  }
  [[noreturn]] void fail_field(std::string_view key, std::string_view msg) const {
    throw ParseError(fmt::format("{}: {}", field_path(key), msg));
  }

 private:
  const json& j_;
  std::string path_;
};

ArchitectureProfile profile_from_json(const json& j) {
  Reader r(j, "profile");
  r.allow_only({"kind", "weight_min", "weight_max", "weight_is_integer", "threshold_min",
                "threshold_max", "delay_min", "delay_max", "delay_source", "distance_to_delay_scale"});
  ArchitectureProfile p;
  const auto kind = r.string("kind");
  if (kind == "digital") {
    p.kind = ProfileKind::Digital;
  } else if (kind == "analog") {
    p.kind = ProfileKind::Analog;
  } else {
    r.fail_field("kind", fmt::format("unknown profile kind '{}'", kind));
  }
  p.weight_min = r.real("weight_min");
  p.weight_max = r.real("weight_max");
  p.weight_is_integer = r.boolean("weight_is_integer");
  p.threshold_min = r.real("threshold_min");
  p.threshold_max = r.real("threshold_max");
  p.delay_min = r.integer("delay_min");
  p.delay_max = r.integer("delay_max");
  const auto source = r.string("delay_source");
  if (source == "explicit") {
    p.delay_source = DelaySource::Explicit;
  } else if (source == "distance") {
    p.delay_source = DelaySource::Distance;
  } else {
    r.fail_field("delay_source", fmt::format("unknown delay source '{}'", source));
  }
  p.distance_to_delay_scale = r.real("distance_to_delay_scale");
  return p;
}

NeuronRole role_from_string(const Reader& r, const std::string& s) {
  if (s == "input") return NeuronRole::Input;
  if (s == "hidden") return NeuronRole::Hidden;
  if (s == "output") return NeuronRole::Output;
  r.fail_field("role", fmt::format("unknown role '{}'", s));
}

std::vector<int> id_list(const json& j, std::string_view name) {
  if (!j.is_array()) throw ParseError(fmt::format("{}: expected an array", name));
  std::vector<int> ids;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer()) throw ParseError(fmt::format("{}[{}]: expected an integer", name, i));
    ids.push_back(j[i].get<int>());
  }
  return ids;
}

std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

constexpr std::array<std::string_view, 5> kSections = {"profile", "neurons", "synapses", "inputs",
                                                       "outputs"};

}  // namespace

std::string serialize(const Network& net) {
  const bool analog = net.profile.kind == ProfileKind::Analog;
  const bool int_threshold = net.profile.kind == ProfileKind::Digital;
  json neurons = json::array();
  for (const auto& n : net.neurons) {
    json jn{{"id", n.id},
            {"role", std::string(to_string(n.role))},
            {"threshold", number(n.threshold, int_threshold)},
            {"refractory", n.refractory_period}};
    if (analog) jn["position"] = {n.position[0], n.position[1], n.position[2]};
    neurons.push_back(std::move(jn));
  }
  json synapses = json::array();
  for (const auto& s : net.synapses) {
    synapses.push_back({{"id", s.id},
                        {"pre", s.pre},
                        {"post", s.post},
                        {"weight", number(s.weight, net.profile.weight_is_integer)},
                        {"delay", s.delay}});
  }
  json doc{{"profile", profile_to_json(net.profile)},
           {"neurons", std::move(neurons)},
           {"synapses", std::move(synapses)},
           {"inputs", net.input_ids},
           {"outputs", net.output_ids}};
  return doc.dump(2) + "\n";
}

Network deserialize(std::string_view text) {
  // Track which top-level section the parser is inside so truncated input can
  // be reported against the section it ended in.
  std::string current_section;
  std::set<std::string> seen_sections;
  json::parser_callback_t track = [&](int depth, json::parse_event_t event, json& parsed) {
    if (event == json::parse_event_t::key && depth == 1 && parsed.is_string()) {
      current_section = parsed.get<std::string>();
      seen_sections.insert(current_section);
    }
    return true;
  };

  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), track);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::vector<std::string> missing;
    for (auto s : kSections) {
      if (!seen_sections.contains(std::string(s))) missing.emplace_back(s);
    }
    std::string where = current_section.empty() ? std::string("before any section")
                                                 : fmt::format("in section '{}'", current_section);
    std::string msg = fmt::format("malformed network file at line {}, column {} ({})", line, col, where);
    if (!missing.empty()) {
      std::string joined;
      for (const auto& m : missing) joined += (joined.empty() ? "'" : ", '") + m + "'";
      msg += fmt::format("; missing section {}", joined);
    }
    throw ParseError(msg);
  }

  Reader top(doc, "network");
  for (auto s : kSections) {
    if (!doc.contains(s)) throw ParseError(fmt::format("network: missing section '{}'", s));
  }
  top.allow_only({"profile", "neurons", "synapses", "inputs", "outputs"});

  Network net;
  net.profile = profile_from_json(doc.at("profile"));
  const bool analog = net.profile.kind == ProfileKind::Analog;

  const auto& jn = doc.at("neurons");
  if (!jn.is_array()) throw ParseError("neurons: expected an array");
  for (std::size_t i = 0; i < jn.size(); ++i) {
    Reader r(jn[i], fmt::format("neurons[{}]", i));
    r.allow_only({"id", "role", "threshold", "refractory", "position"});
    Neuron n;
    n.id = r.integer("id");
    n.role = role_from_string(r, r.string("role"));
    n.threshold = r.real("threshold");
    n.refractory_period = r.integer("refractory");
    if (analog) {
      const auto& pos = r.at("position");
      if (!pos.is_array() || pos.size() != 3 ||
          !std::all_of(pos.begin(), pos.end(), [](const json& v) { return v.is_number(); })) {
        r.fail_field("position", "expected an array of 3 numbers");
      }
      n.position = {pos[0].get<double>(), pos[1].get<double>(), pos[2].get<double>()};
    } else if (r.has("position")) {
      r.fail_field("position", "only allowed for the analog profile");
    }
    net.neurons.push_back(n);
  }

  const auto& js = doc.at("synapses");
  if (!js.is_array()) throw ParseError("synapses: expected an array");
  for (std::size_t i = 0; i < js.size(); ++i) {
    Reader r(js[i], fmt::format("synapses[{}]", i));
    r.allow_only({"id", "pre", "post", "weight", "delay"});
    net.synapses.push_back(
        {r.integer("id"), r.integer("pre"), r.integer("post"), r.real("weight"), r.integer("delay")});
  }
  net.input_ids = id_list(doc.at("inputs"), "inputs");
  net.output_ids = id_list(doc.at("outputs"), "outputs");

  auto violations = validate(net);
  if (!violations.empty()) {
    std::string msg = "network failed validation:";
    for (const auto& v : violations) {
      msg += fmt::format(" [{} id={}{}{}]", v.kind, v.element_id, v.detail.empty() ? "" : " ", v.detail);
    }
    throw InvalidNetworkError(msg, std::move(violations));
  }
  return net;
}

void save_network(const Network& network, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << serialize(network);
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

}  // namespace snnevo
