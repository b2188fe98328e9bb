#include "vtl/simengine.hpp"

#include "vtl/metrics.hpp"
#include "vtl/scenario_io.hpp"

#include <doctest.h>

#include <map>
#include <sstream>

using namespace vtl;

namespace {

Scenario lossless_point_to_point(SimTime duration_us) {
  Scenario scenario;
  scenario.name = "p2p";
  scenario.duration_us = duration_us;
  scenario.seed = 7;
  scenario.channel = PsrCurve::constant(1.0);
  scenario.controller.config.source_id = "ctrl";
  scenario.controller.trajectory = Trajectory::fixed({0.0, 0.0});
  ReceiverSpec receiver;
  receiver.config.node_id = "rx1";
  receiver.trajectory = Trajectory::fixed({5.0, 0.0});
  receiver.attach = "ctrl";
  scenario.receivers.push_back(receiver);
  return scenario;
}

std::map<TraceKind, int> count_kinds(const Trace& trace, const NodeId& node) {
  std::map<TraceKind, int> counts;
  for (const TraceEvent& event : trace.events) {
    if (event.node == node) ++counts[event.kind];
  }
  return counts;
}

std::string payload_field(const TraceEvent& event, const std::string& key) {
  for (const auto& [name, value] : parse_payload(event.payload)) {
    if (name == key) return value;
  }
  return "";
}

} // namespace

TEST_SUITE_BEGIN("simengine");

TEST_CASE("lossless run delivers one frame per advertising interval") {
  const Trace trace = run(lossless_point_to_point(s_to_us(1)));
  const auto counts = count_kinds(trace, "rx1");
  const int expected = static_cast<int>(s_to_us(1) / ms_to_us(50));
  CHECK(counts.at(TraceKind::RxOk) >= expected - 1);
  CHECK(counts.at(TraceKind::RxOk) <= expected + 1);
  CHECK(counts.count(TraceKind::RxLost) == 0);

  const MetricsReport report = compute_metrics(trace);
  for (SimTime interval : report.nodes.at("rx1").update_intervals_us) {
    CHECK(interval == ms_to_us(50));
  }
  CHECK(report.nodes.at("rx1").psr() == 1.0);
}

TEST_CASE("receivers decode the full cyclic state sequence") {
  Scenario scenario = lossless_point_to_point(ms_to_us(13 * 100 + 100));
  scenario.controller.config.state_period_us = ms_to_us(100);
  scenario.controller.config.advertising_interval_us = ms_to_us(20);
  const Trace trace = run(scenario);

  std::vector<int> states;
  for (const TraceEvent& event : trace.events) {
    if (event.kind == TraceKind::RxOk && event.node == "rx1") {
      const int state = std::stoi(payload_field(event, "state"));
      if (states.empty() || states.back() != state) states.push_back(state);
    }
  }
  std::vector<int> expected;
  for (int s = 1; s <= 13; ++s) expected.push_back(s);
  expected.push_back(1);
  CHECK(states == expected);
}

TEST_CASE("a dead controller-retransmitter link silences the relay") {
  Scenario scenario = lossless_point_to_point(s_to_us(4));
  RetransmitterSpec relay;
  relay.config.node_id = "rtx1";
  relay.config.controller_source_id = "ctrl";
  relay.trajectory = Trajectory::fixed({37.0, 0.0});
  scenario.retransmitters.push_back(relay);
  scenario.receivers[0].attach = "rtx1";
  scenario.link_overrides.insert_or_assign({"ctrl", "rtx1"}, PsrCurve::constant(0.0));

  const Trace trace = run(scenario);
  CHECK(count_kinds(trace, "rtx1").count(TraceKind::Tx) == 0);
  CHECK(count_kinds(trace, "rx1").count(TraceKind::RxOk) == 0);
}

TEST_CASE("relayed frames reach the receiver tagged") {
  Scenario scenario = lossless_point_to_point(s_to_us(4));
  RetransmitterSpec relay;
  relay.config.node_id = "rtx1";
  relay.config.controller_source_id = "ctrl";
  relay.config.tag = 0x2A;
  relay.trajectory = Trajectory::fixed({37.0, 0.0});
  scenario.retransmitters.push_back(relay);
  scenario.receivers[0].attach = "rtx1";

  const Trace trace = run(scenario);
  int relayed = 0;
  for (const TraceEvent& event : trace.events) {
    if (event.kind == TraceKind::RxOk && event.node == "rx1") {
      ++relayed;
      CHECK(payload_field(event, "tag") == "42"); // 0x2A
      CHECK(payload_field(event, "from") == "rtx1");
    }
  }
  CHECK(relayed > 0);
}

TEST_CASE("static 37 m link runs clean at defaults") {
  Scenario scenario = lossless_point_to_point(s_to_us(2));
  scenario.channel = PsrCurve::default_curve();
  scenario.receivers[0].trajectory = Trajectory::fixed({37.0, 0.0});
  scenario.seed = 5;
  const Trace trace = run(scenario);
  const MetricsReport report = compute_metrics(trace);
  const NodeMetrics& rx = report.nodes.at("rx1");
  CHECK(rx.psr() > 0.9);
  for (SimTime interval : rx.update_intervals_us) {
    CHECK(interval < ms_to_us(100));
  }
}

TEST_CASE("identical runs give byte-identical traces") {
  Scenario scenario = lossless_point_to_point(s_to_us(2));
  scenario.channel = PsrCurve::default_curve();
  scenario.receivers[0].trajectory = Trajectory::fixed({80.0, 0.0}); // lossy
  const std::string first = run(scenario).to_csv();
  const std::string second = run(scenario).to_csv();
  CHECK(first == second);

  scenario.seed = 8;
  CHECK(run(scenario).to_csv() != first);
}

TEST_CASE("sweep results do not depend on value order") {
  Scenario scenario = lossless_point_to_point(s_to_us(1));
  scenario.channel = PsrCurve::default_curve();

  const std::vector<double> forward = {0.0, 40.0, 80.0};
  const std::vector<double> reversed = {80.0, 0.0, 40.0};
  auto a = sweep(scenario, "rx1.x", forward);
  auto b = sweep(scenario, "rx1.x", reversed);
  REQUIRE(a.size() == 3);
  REQUIRE(b.size() == 3);
  std::map<double, std::string> by_value;
  for (auto& [value, trace] : a) by_value[value] = trace.to_csv();
  for (auto& [value, trace] : b) {
    CHECK(by_value.at(value) == trace.to_csv());
  }

  CHECK(sweep(scenario, "rx1.x", {}).empty());
  CHECK_THROWS_AS(sweep(scenario, "rx1.z", forward), UnknownParameterError);
  CHECK_THROWS_AS(sweep(scenario, "ghost.x", forward), UnknownParameterError);
}

TEST_CASE("causality and conservation hold in a lossy run") {
  Scenario scenario = lossless_point_to_point(s_to_us(5));
  scenario.channel = PsrCurve::default_curve();
  scenario.receivers[0].trajectory = Trajectory::fixed({85.0, 0.0});
  const Trace trace = run(scenario);

  SimTime last_time = 0;
  std::vector<SimTime> tx_times;
  int rx_total = 0;
  for (const TraceEvent& event : trace.events) {
    CHECK(event.time_us >= last_time); // time-ordered
    last_time = event.time_us;
    if (event.kind == TraceKind::Tx) tx_times.push_back(event.time_us);
    if (event.kind == TraceKind::RxOk || event.kind == TraceKind::RxLost ||
        event.kind == TraceKind::RxCorrupt) {
      ++rx_total;
      // each reception maps to the transmission one air time earlier
      const SimTime expected_tx = event.time_us - 104;
      CHECK(std::find(tx_times.begin(), tx_times.end(), expected_tx) != tx_times.end());
    }
  }
  const auto ctrl = count_kinds(trace, "ctrl");
  CHECK(rx_total >= ctrl.at(TraceKind::Tx) - 1);
  CHECK(rx_total <= ctrl.at(TraceKind::Tx));

  // received states form a subsequence of transmitted states
  std::vector<int> sent;
  std::vector<int> got;
  for (const TraceEvent& event : trace.events) {
    if (event.kind == TraceKind::Tx && event.node == "ctrl") {
      sent.push_back(std::stoi(payload_field(event, "state")));
    }
    if (event.kind == TraceKind::RxOk && event.node == "rx1") {
      got.push_back(std::stoi(payload_field(event, "state")));
    }
  }
  std::size_t cursor = 0;
  for (int state : got) {
    while (cursor < sent.size() && sent[cursor] != state) ++cursor;
    REQUIRE(cursor < sent.size());
    ++cursor;
  }
}

TEST_CASE("invalid scenarios are rejected with every violation listed") {
  Scenario scenario = lossless_point_to_point(0); // bad duration
  scenario.receivers[0].attach = "ghost";         // bad attachment
  scenario.receivers[0].config.node_id = "ctrl";  // duplicate id
  try {
    run(scenario);
    FAIL("expected ScenarioError");
  } catch (const ScenarioError& error) {
    CHECK(error.violations.size() >= 3);
  }
}

TEST_CASE("trace csv round trips") {
  Scenario scenario = lossless_point_to_point(ms_to_us(500));
  const Trace trace = run(scenario);
  const std::string csv = trace.to_csv();
  std::istringstream in(csv);
  const Trace parsed = Trace::read_csv(in);
  REQUIRE(parsed.events.size() == trace.events.size());
  CHECK(parsed.to_csv() == csv);

  std::istringstream bad_header("nope\n");
  CHECK_THROWS_AS(Trace::read_csv(bad_header), TraceParseError);
  std::istringstream bad_row("time_us,kind,node,payload\n12,tx\n");
  try {
    Trace::read_csv(bad_row);
    FAIL("expected TraceParseError");
  } catch (const TraceParseError& error) {
    CHECK(error.line == 2);
  }
  std::istringstream bad_kind("time_us,kind,node,payload\n12,warp,ctrl,x=1\n");
  CHECK_THROWS_AS(Trace::read_csv(bad_kind), TraceParseError);
}

TEST_CASE("scenario files parse with defaults and overrides") {
  const std::string text = R"(# demo
[run]
name = demo
duration_s = 2
seed = 99

[channel]
model = logistic
p_max = 1.0
d_mid_m = 71.5
steepness_per_m = 0.15

[controller]
id = ctrl
position = 0 0
state_period_ms = 1000
advertising_interval_ms = 25

[retransmitter]
id = rtx1
tag = 0x2A
position = 37 0

[receiver]
id = car
attach = rtx1
movement = 2
trajectory = linear 150 0 -10 0
scan_window_ms = 30
scan_interval_ms = 100

[link ctrl -> rtx1]
model = constant
psr = 1.0

[sweep]
parameter = rtx1.x
values = 0 20 40
)";
  std::istringstream in(text);
  const Scenario scenario = parse_scenario(in);
  CHECK(scenario.name == "demo");
  CHECK(scenario.duration_us == s_to_us(2));
  CHECK(scenario.seed == 99);
  CHECK(scenario.controller.config.source_id == "ctrl");
  CHECK(scenario.controller.config.advertising_interval_us == ms_to_us(25));
  REQUIRE(scenario.retransmitters.size() == 1);
  CHECK(scenario.retransmitters[0].config.tag == 0x2A);
  // slot period inherited from the controller
  CHECK(scenario.retransmitters[0].config.controller_period_us == ms_to_us(1000));
  CHECK(scenario.retransmitters[0].config.controller_source_id == "ctrl");
  REQUIRE(scenario.receivers.size() == 1);
  CHECK(scenario.receivers[0].attach == "rtx1");
  CHECK(scenario.receivers[0].config.duty_cycle() == doctest::Approx(0.3));
  CHECK_FALSE(scenario.receivers[0].trajectory.is_static());
  CHECK(scenario.link_overrides.size() == 1);
  REQUIRE(scenario.sweep.has_value());
  CHECK(scenario.sweep->values == std::vector<double>{0.0, 20.0, 40.0});
  CHECK(scenario.validate().empty());

  const Trace trace = run(scenario);
  CHECK_FALSE(trace.events.empty());
}

TEST_CASE("scenario parse errors carry line numbers") {
  std::istringstream missing_eq("[run]\nduration_s 2\n");
  try {
    parse_scenario(missing_eq);
    FAIL("expected ScenarioParseError");
  } catch (const ScenarioParseError& error) {
    CHECK(error.line == 2);
  }
  std::istringstream bad_section("[warp]\nx = 1\n");
  CHECK_THROWS_AS(parse_scenario(bad_section), ScenarioParseError);
  std::istringstream no_controller("[run]\nduration_s = 2\n");
  CHECK_THROWS_AS(parse_scenario(no_controller), ScenarioParseError);
  std::istringstream bad_key("[controller]\nid = c\nwarp = 1\n");
  CHECK_THROWS_AS(parse_scenario(bad_key), ScenarioParseError);
}

TEST_CASE("shipped scenarios load and validate") {
  for (const char* name :
       {"baseline-static.scn", "avenida-europa-sweep.scn", "quinta-del-rei-approach.scn"}) {
    const Scenario scenario =
        load_scenario(std::string(VTL_SOURCE_DIR) + "/scenarios/" + name);
    CHECK(scenario.validate().empty());
  }
}

TEST_SUITE_END();
