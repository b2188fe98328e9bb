#include "vtl/simengine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <queue>
#include <set>
#include <sstream>

namespace vtl {

namespace {

constexpr double kSpeedOfLightMetersPerUs = 299.792458;

std::string join(const std::vector<std::string>& parts, const std::string& separator) {
  std::string joined;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) joined += separator;
    joined += parts[i];
  }
  return joined;
}

bool valid_node_id(const NodeId& id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

} // namespace

ScenarioError::ScenarioError(std::vector<std::string> all_violations)
    : std::runtime_error("invalid scenario:\n  - " + join(all_violations, "\n  - ")),
      violations(std::move(all_violations)) {}

std::vector<std::string> Scenario::validate() const {
  std::vector<std::string> violations;
  if (duration_us <= 0) {
    violations.push_back("duration must be positive");
  }

  std::vector<NodeId> ids{controller.config.source_id};
  for (const auto& spec : retransmitters) ids.push_back(spec.config.node_id);
  for (const auto& spec : receivers) ids.push_back(spec.config.node_id);
  for (const NodeId& id : ids) {
    if (!valid_node_id(id)) {
      violations.push_back("node id '" + id + "' is empty or has characters outside [A-Za-z0-9_.-]");
    }
  }
  std::set<NodeId> unique_ids(ids.begin(), ids.end());
  if (unique_ids.size() != ids.size()) {
    violations.push_back("node ids are not unique");
  }

  for (const std::string& violation : controller.config.validate()) {
    violations.push_back(controller.config.source_id + ": " + violation);
  }
  if (!controller.config.state_periods_us.empty() && !retransmitters.empty()) {
    violations.push_back("retransmitter slots need a uniform controller state period");
  }

  for (const auto& spec : retransmitters) {
    for (const std::string& violation : spec.config.validate()) {
      violations.push_back(spec.config.node_id + ": " + violation);
    }
    if (spec.config.controller_source_id != controller.config.source_id) {
      violations.push_back(spec.config.node_id + " listens to unknown controller '" +
                           spec.config.controller_source_id + "'");
    }
    if (spec.config.controller_period_us != controller.config.state_period_us) {
      violations.push_back(spec.config.node_id +
                           " slot period does not match the controller state period");
    }
  }

  std::set<NodeId> sources{controller.config.source_id};
  for (const auto& spec : retransmitters) sources.insert(spec.config.node_id);
  for (const auto& spec : receivers) {
    for (const std::string& violation : spec.config.validate()) {
      violations.push_back(spec.config.node_id + ": " + violation);
    }
    if (!sources.contains(spec.attach)) {
      violations.push_back(spec.config.node_id + " attaches to unknown node '" +
                           spec.attach + "'");
    }
    if (!standard_intersection().find(spec.config.movement_of_interest)) {
      violations.push_back(spec.config.node_id + " watches unknown movement " +
                           spec.config.movement_of_interest.str());
    }
  }

  if (!controller.config.phase_table.empty()) {
    try {
      const ValidationReport report = validate_phase_table(
          controller.config.phase_table, standard_intersection().matrix);
      if (!report.conflict_free()) {
        violations.push_back("phase table authorizes " +
                             std::to_string(report.findings.size()) +
                             " conflicting movement pair(s)");
      }
    } catch (const MalformedTableError& error) {
      violations.push_back(std::string("phase table: ") + error.what());
    }
  }

  for (const auto& [link, curve] : link_overrides) {
    (void)curve;
    if (!sources.contains(link.first) && link.first != controller.config.source_id) {
      violations.push_back("link override names unknown transmitter '" + link.first + "'");
    }
    if (unique_ids.find(link.second) == unique_ids.end()) {
      violations.push_back("link override names unknown receiver '" + link.second + "'");
    }
  }
  return violations;
}

std::string_view to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::Tx: return "tx";
    case TraceKind::RxOk: return "rx-ok";
    case TraceKind::RxLost: return "rx-lost";
    case TraceKind::RxCorrupt: return "rx-corrupt";
    case TraceKind::DisplayChange: return "display-change";
    case TraceKind::StateAdvance: return "state-advance";
    case TraceKind::SlotChange: return "slot-change";
  }
  return "?";
}

std::optional<TraceKind> trace_kind_from(std::string_view text) {
  for (TraceKind kind : {TraceKind::Tx, TraceKind::RxOk, TraceKind::RxLost,
                         TraceKind::RxCorrupt, TraceKind::DisplayChange,
                         TraceKind::StateAdvance, TraceKind::SlotChange}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

TraceParseError::TraceParseError(std::size_t line_no, const std::string& what)
    : std::runtime_error("trace line " + std::to_string(line_no) + ": " + what),
      line(line_no) {}

void Trace::write_csv(std::ostream& out) const {
  out << "time_us,kind,node,payload\n";
  for (const TraceEvent& event : events) {
    out << event.time_us << ',' << to_string(event.kind) << ',' << event.node << ','
        << event.payload << '\n';
  }
}

std::string Trace::to_csv() const {
  std::ostringstream out;
  write_csv(out);
  return out.str();
}

Trace Trace::read_csv(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw TraceParseError(1, "missing header");
  }
  ++line_no;
  if (line != "time_us,kind,node,payload") {
    throw TraceParseError(1, "unexpected header '" + line + "'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    const auto c3 = line.find(',', c2 == std::string::npos ? c2 : c2 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos || c3 == std::string::npos) {
      throw TraceParseError(line_no, "expected 4 comma-separated fields");
    }
    TraceEvent event;
    try {
      event.time_us = std::stoll(line.substr(0, c1));
    } catch (const std::exception&) {
      throw TraceParseError(line_no, "bad timestamp '" + line.substr(0, c1) + "'");
    }
    const std::string kind_text = line.substr(c1 + 1, c2 - c1 - 1);
    const auto kind = trace_kind_from(kind_text);
    if (!kind) {
      throw TraceParseError(line_no, "unknown event kind '" + kind_text + "'");
    }
    event.kind = *kind;
    event.node = line.substr(c2 + 1, c3 - c2 - 1);
    event.payload = line.substr(c3 + 1);
    trace.events.push_back(std::move(event));
  }
  return trace;
}

Trace Trace::read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open trace file " + path.string());
  }
  return read_csv(in);
}

std::vector<std::pair<std::string, std::string>> parse_payload(std::string_view payload) {
  std::vector<std::pair<std::string, std::string>> fields;
  std::size_t start = 0;
  while (start <= payload.size()) {
    std::size_t end = payload.find(';', start);
    if (end == std::string_view::npos) end = payload.size();
    const std::string_view part = payload.substr(start, end - start);
    if (!part.empty()) {
      const std::size_t eq = part.find('=');
      if (eq == std::string_view::npos) {
        fields.emplace_back(std::string(part), "");
      } else {
        fields.emplace_back(std::string(part.substr(0, eq)),
                            std::string(part.substr(eq + 1)));
      }
    }
    if (end == payload.size()) break;
    start = end + 1;
  }
  return fields;
}

namespace {

struct QueuedEvent {
  SimTime time_us = 0;
  NodeId node;
  int rank = 0; // 0 = wake, 1 = frame arrival
  std::uint64_t seq = 0;
  bool delivered = false;
  std::vector<std::uint8_t> bytes;
  NodeId source;
};

struct EventAfter {
  bool operator()(const QueuedEvent& a, const QueuedEvent& b) const {
    return std::tie(a.time_us, a.node, a.rank, a.seq) >
           std::tie(b.time_us, b.node, b.rank, b.seq);
  }
};

class Engine {
public:
  explicit Engine(const Scenario& scenario) : scenario_(scenario) {
    build_nodes();
    build_links();
  }

  Trace run() {
    for (const auto& [id, node] : nodes_) {
      (void)node;
      schedule_wake(id, 0);
    }
    while (!queue_.empty()) {
      const QueuedEvent event = queue_.top();
      queue_.pop();
      if (event.time_us > scenario_.duration_us) break;
      if (event.rank == 0) {
        dispatch_wake(event);
      } else {
        dispatch_arrival(event);
      }
    }
    return std::move(trace_);
  }

private:
  struct EngineNode {
    std::unique_ptr<ProtocolMachine> machine;
    Trajectory trajectory;
  };

  void build_nodes() {
    const auto& controller = scenario_.controller;
    auto shared_table = std::make_shared<const std::vector<PhaseState>>(
        controller.config.phase_table.empty() ? standard_phase_table()
                                              : controller.config.phase_table);
    nodes_.emplace(controller.config.source_id,
                   EngineNode{std::make_unique<ControllerMachine>(
                                  controller.config,
                                  jitter_seed(controller.config.source_id)),
                              controller.trajectory});
    for (const auto& spec : scenario_.retransmitters) {
      nodes_.emplace(spec.config.node_id,
                     EngineNode{std::make_unique<RetransmitterMachine>(
                                    spec.config, jitter_seed(spec.config.node_id)),
                                spec.trajectory});
    }
    for (const auto& spec : scenario_.receivers) {
      nodes_.emplace(spec.config.node_id,
                     EngineNode{std::make_unique<ReceiverMachine>(
                                    spec.config, nullptr, shared_table),
                                spec.trajectory});
    }
  }

  void build_links() {
    const NodeId& controller_id = scenario_.controller.config.source_id;
    for (const auto& spec : scenario_.retransmitters) {
      add_link(controller_id, spec.config.node_id);
    }
    for (const auto& spec : scenario_.receivers) {
      add_link(spec.attach, spec.config.node_id);
    }
    for (auto& [tx, rx_list] : addressees_) {
      (void)tx;
      std::sort(rx_list.begin(), rx_list.end());
    }
  }

  void add_link(const NodeId& tx, const NodeId& rx) {
    addressees_[tx].push_back(rx);
    const auto key = std::make_pair(tx, rx);
    streams_.emplace(key,
                     RngStream(mix_seed(mix_seed(mix_seed(scenario_.seed, "link"), tx), rx)));
    auto it = scenario_.link_overrides.find(key);
    curves_.emplace(key, it != scenario_.link_overrides.end() ? &it->second
                                                              : &scenario_.channel);
  }

  std::uint64_t jitter_seed(const NodeId& id) const {
    return mix_seed(mix_seed(scenario_.seed, "jitter"), id);
  }

  void schedule_wake(const NodeId& node, SimTime time_us) {
    if (time_us > scenario_.duration_us) return;
    if (!scheduled_wakes_[node].insert(time_us).second) return;
    QueuedEvent event;
    event.time_us = time_us;
    event.node = node;
    event.rank = 0;
    event.seq = ++sequence_;
    queue_.push(std::move(event));
  }

  void dispatch_wake(const QueuedEvent& event) {
    scheduled_wakes_[event.node].erase(event.time_us);
    EngineNode& node = nodes_.at(event.node);
    StepOutput out = node.machine->on_wake(event.time_us);
    process_output(event.node, event.time_us, out, /*source=*/"");
  }

  void dispatch_arrival(const QueuedEvent& event) {
    const int state_id = peek_state(event.bytes);
    if (!event.delivered) {
      append(event.time_us, TraceKind::RxLost, event.node,
             describe_frame(state_id, event.bytes) + ";from=" + event.source +
                 ";reason=channel");
      return;
    }
    EngineNode& node = nodes_.at(event.node);
    StepOutput out = node.machine->on_frame(event.time_us, event.bytes, event.source);
    process_output(event.node, event.time_us, out, event.source,
                   describe_frame(state_id, event.bytes));
  }

  static int peek_state(std::span<const std::uint8_t> bytes) {
    const DecodeResult result = decode_frame(bytes);
    return result.ok() ? result.frame.state_id : 0;
  }

  static std::string describe_frame(int state_id, std::span<const std::uint8_t> bytes) {
    std::string text = "state=" + std::to_string(state_id);
    if (bytes.size() == kTaggedFrameSize) {
      text += ";tag=" + std::to_string(static_cast<int>(bytes.back()));
    }
    return text;
  }

  void process_output(const NodeId& node, SimTime now, StepOutput& out,
                      const NodeId& source, const std::string& frame_text = "") {
    for (const NodeEvent& event : out.events) {
      switch (event.kind) {
        case NodeEventKind::StateAdvance:
          append(now, TraceKind::StateAdvance, node,
                 "state=" + std::to_string(event.state_id));
          break;
        case NodeEventKind::SlotChange:
          append(now, TraceKind::SlotChange, node,
                 std::string("slot=") + (event.observe_slot ? "observe" : "broadcast"));
          break;
        case NodeEventKind::DisplayChange:
          append(now, TraceKind::DisplayChange, node,
                 "display=" + std::string(to_string(event.display)));
          break;
        case NodeEventKind::RxAccepted:
          append(now, TraceKind::RxOk, node, frame_text + ";from=" + source);
          break;
        case NodeEventKind::RxCorrupt:
          append(now, TraceKind::RxCorrupt, node,
                 frame_text + ";from=" + source + ";reason=crc");
          break;
        case NodeEventKind::RxNotListening:
          append(now, TraceKind::RxLost, node,
                 frame_text + ";from=" + source + ";reason=not-listening");
          break;
        case NodeEventKind::RxFiltered:
          append(now, TraceKind::RxLost, node,
                 frame_text + ";from=" + source + ";reason=filtered");
          break;
      }
    }
    for (const Transmission& transmission : out.transmissions) {
      transmit(node, now, transmission.bytes);
    }
    if (out.next_wake) {
      schedule_wake(node, *out.next_wake);
    }
  }

  void transmit(const NodeId& node, SimTime now, const std::vector<std::uint8_t>& bytes) {
    append(now, TraceKind::Tx, node, describe_frame(peek_state(bytes), bytes));
    const Position tx_pos = nodes_.at(node).trajectory.position_at(now);
    const double air_time_us = tx_time_us(bytes.size());
    auto it = addressees_.find(node);
    if (it == addressees_.end()) return;
    for (const NodeId& rx : it->second) {
      const Position rx_pos = nodes_.at(rx).trajectory.position_at(now);
      const auto key = std::make_pair(node, rx);
      const bool delivered =
          deliver(*curves_.at(key), tx_pos, rx_pos, streams_.at(key));
      const double propagation_us =
          distance_m(tx_pos, rx_pos) / kSpeedOfLightMetersPerUs;
      QueuedEvent arrival;
      arrival.time_us = now + std::llround(air_time_us + propagation_us);
      arrival.node = rx;
      arrival.rank = 1;
      arrival.seq = ++sequence_;
      arrival.delivered = delivered;
      arrival.bytes = bytes;
      arrival.source = node;
      if (arrival.time_us <= scenario_.duration_us) {
        queue_.push(std::move(arrival));
      }
    }
  }

  void append(SimTime time_us, TraceKind kind, const NodeId& node, std::string payload) {
    trace_.events.push_back({time_us, kind, node, std::move(payload)});
  }

  const Scenario& scenario_;
  std::map<NodeId, EngineNode> nodes_;
  std::map<NodeId, std::vector<NodeId>> addressees_;
  std::map<std::pair<NodeId, NodeId>, RngStream> streams_;
  std::map<std::pair<NodeId, NodeId>, const PsrCurve*> curves_;
  std::map<NodeId, std::set<SimTime>> scheduled_wakes_;
  std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, EventAfter> queue_;
  std::uint64_t sequence_ = 0;
  Trace trace_;
};

} // namespace

Trace run(const Scenario& scenario) {
  std::vector<std::string> violations = scenario.validate();
  if (!violations.empty()) {
    throw ScenarioError(std::move(violations));
  }
  Engine engine(scenario);
  return engine.run();
}

Scenario apply_parameter(Scenario scenario, const std::string& parameter, double value) {
  const auto dot = parameter.find('.');
  if (dot == std::string::npos) {
    throw UnknownParameterError("unknown parameter '" + parameter +
                                "' (expected <node>.x, <node>.y, run.duration_s or channel.*)");
  }
  const std::string head = parameter.substr(0, dot);
  const std::string field = parameter.substr(dot + 1);

  if (head == "run") {
    if (field == "duration_s") {
      scenario.duration_us = static_cast<SimTime>(std::llround(value * 1e6));
      return scenario;
    }
    throw UnknownParameterError("unknown run parameter '" + field + "'");
  }
  if (head == "channel") {
    if (!scenario.channel.is_logistic()) {
      throw UnknownParameterError("channel sweeps need the logistic model");
    }
    double p_max = scenario.channel.p_max();
    double d_mid = scenario.channel.d_mid_m();
    double steepness = scenario.channel.steepness_per_m();
    if (field == "p_max") p_max = value;
    else if (field == "d_mid_m") d_mid = value;
    else if (field == "steepness_per_m") steepness = value;
    else throw UnknownParameterError("unknown channel parameter '" + field + "'");
    scenario.channel = PsrCurve::logistic(p_max, d_mid, steepness);
    return scenario;
  }
  if (field != "x" && field != "y") {
    throw UnknownParameterError("unknown node parameter '" + field +
                                "' (expected x or y)");
  }

  Trajectory* trajectory = nullptr;
  if (scenario.controller.config.source_id == head) {
    trajectory = &scenario.controller.trajectory;
  }
  for (auto& spec : scenario.retransmitters) {
    if (spec.config.node_id == head) trajectory = &spec.trajectory;
  }
  for (auto& spec : scenario.receivers) {
    if (spec.config.node_id == head) trajectory = &spec.trajectory;
  }
  if (trajectory == nullptr) {
    throw UnknownParameterError("unknown node '" + head + "'");
  }
  if (!trajectory->is_static()) {
    throw UnknownParameterError("node '" + head + "' is moving; only static positions sweep");
  }
  if (field == "x") {
    trajectory->start_position().x = value;
  } else {
    trajectory->start_position().y = value;
  }
  return scenario;
}

std::string sweep_value_label(double value) {
  const double rounded = std::llround(value);
  if (rounded == value && std::abs(value) < 1e15) {
    return std::to_string(std::llround(value));
  }
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::vector<std::pair<double, Trace>> sweep(const Scenario& base,
                                            const std::string& parameter,
                                            std::span<const double> values) {
  std::vector<std::pair<double, Trace>> results;
  results.reserve(values.size());
  for (double value : values) {
    Scenario scenario = apply_parameter(base, parameter, value);
    scenario.seed = mix_seed(base.seed, sweep_value_label(value));
    results.emplace_back(value, run(scenario));
  }
  return results;
}

} // namespace vtl
