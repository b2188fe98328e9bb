#pragma once

#include "vtl/channel.hpp"
#include "vtl/nodes.hpp"
#include "vtl/sim_time.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vtl {

struct ControllerSpec {
  ControllerConfig config;
  Trajectory trajectory = Trajectory::fixed({0.0, 0.0});
};

struct RetransmitterSpec {
  RetransmitterConfig config;
  Trajectory trajectory = Trajectory::fixed({0.0, 0.0});
};

struct ReceiverSpec {
  ReceiverConfig config;
  Trajectory trajectory = Trajectory::fixed({0.0, 0.0});
  NodeId attach = "controller"; // node whose broadcasts this receiver hears
};

struct SweepSpec {
  std::string parameter;
  std::vector<double> values;
};

struct Scenario {
  std::string name = "scenario";
  SimTime duration_us = 0;
  std::uint64_t seed = 1;
  ControllerSpec controller;
  std::vector<RetransmitterSpec> retransmitters;
  std::vector<ReceiverSpec> receivers;
  PsrCurve channel = PsrCurve::default_curve();
  // Per-link curve overrides, keyed (tx node, rx node).
  std::map<std::pair<NodeId, NodeId>, PsrCurve> link_overrides;
  std::optional<SweepSpec> sweep; // default sweep spec for the CLI

  // Every violation, empty when runnable.
  std::vector<std::string> validate() const;
};

struct ScenarioError : std::runtime_error {
  explicit ScenarioError(std::vector<std::string> violations);

  std::vector<std::string> violations;
};

enum class TraceKind : std::uint8_t {
  Tx,
  RxOk,
  RxLost,
  RxCorrupt,
  DisplayChange,
  StateAdvance,
  SlotChange,
};

std::string_view to_string(TraceKind kind);
std::optional<TraceKind> trace_kind_from(std::string_view text);

struct TraceEvent {
  SimTime time_us = 0;
  TraceKind kind = TraceKind::Tx;
  NodeId node;
  // key=value pairs separated by ';', e.g. "state=4;tag=1;from=rtx1".
  std::string payload;
};

struct TraceParseError : std::runtime_error {
  TraceParseError(std::size_t line, const std::string& what);

  std::size_t line = 0;
};

struct Trace {
  std::vector<TraceEvent> events;

  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
  static Trace read_csv(std::istream& in);
  static Trace read_csv_file(const std::filesystem::path& path);
};

// Fields of a payload string, in order.
std::vector<std::pair<std::string, std::string>> parse_payload(std::string_view payload);

// Runs the scenario to its duration and returns the full event trace.
// Deterministic: identical scenarios (seed included) give identical traces.
// Throws ScenarioError when validation fails.
Trace run(const Scenario& scenario);

struct UnknownParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Addressable sweep parameters: "<node>.x", "<node>.y" (static nodes),
// "run.duration_s", "channel.p_max", "channel.d_mid_m",
// "channel.steepness_per_m".
Scenario apply_parameter(Scenario scenario, const std::string& parameter, double value);

// Canonical text form of a swept value (used in sub-seeds and file names).
std::string sweep_value_label(double value);

// One independent run per value; each run's seed is derived from the base
// seed and the value, so results do not depend on the order of values.
std::vector<std::pair<double, Trace>> sweep(const Scenario& base,
                                            const std::string& parameter,
                                            std::span<const double> values);

} // namespace vtl
