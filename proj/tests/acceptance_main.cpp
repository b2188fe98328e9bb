// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Argument: repository root (defaults to the working directory).

#include "vtl/metrics.hpp"
#include "vtl/scenario_io.hpp"
#include "vtl/simengine.hpp"

#include "machine_driver.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace vtl;

namespace {

namespace fs = std::filesystem;

fs::path g_root;

struct CheckFailure {
  std::string what;
};

void expect(bool condition, const std::string& what) {
  if (!condition) throw CheckFailure{what};
}

std::string fmt(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return buffer;
}

// --- criterion 1: one-frame transmission time -------------------------------

void criterion_tx_time() {
  const double time_us = tx_time_us(13, LinkTimingParams{.bitrate_bps = 1e6});
  expect(time_us == 104.0, "tx_time(13 B, 1 Mb/s) = " + fmt(time_us) + " us, want 104 exactly");
}

// --- criterion 2: effective throughput --------------------------------------

void criterion_throughput() {
  const double throughput = effective_throughput_bits_per_us(24.0, 104.0);
  expect(std::abs(throughput - 24.0 / 484.0) < 1e-12,
         "throughput " + fmt(throughput) + " != 24/484");
  expect(std::abs(throughput - 0.050) / 0.050 <= 0.01,
         "throughput " + fmt(throughput) + " not within 1% of 0.050");
}

// --- criterion 3: phase table fidelity and conflict freedom -----------------

void criterion_phase_table() {
  std::ifstream fixture(g_root / "tests/fixtures/table1_states.txt");
  expect(fixture.good(), "cannot open tests/fixtures/table1_states.txt");
  const std::vector<PhaseState> golden = phase_table_from_text(fixture);
  const auto& table = standard_phase_table();
  expect(golden.size() == 13 && table.size() == 13, "expected 13 states");
  int cells = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    expect(golden[i].state_id == table[i].state_id, "state id order differs");
    expect(golden[i].colors.size() == 16, "fixture state misses movements");
    for (const auto& [id, color] : golden[i].colors) {
      expect(table[i].color_of(id) == color,
             "state " + std::to_string(table[i].state_id) + " movement " + id.str() +
                 " differs from the fixture");
      ++cells;
    }
  }
  expect(cells == 13 * 16, "cell count");

  const ValidationReport report =
      validate_phase_table(table, standard_intersection().matrix);
  expect(report.conflict_free(),
         std::to_string(report.findings.size()) + " conflicting pairs found");
}

// --- criterion 4: payload integrity ------------------------------------------

std::uint16_t crc16_oracle(std::span<const std::uint8_t> data) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t byte : data) {
    crc ^= static_cast<std::uint16_t>(byte) << 8;
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                           : static_cast<std::uint16_t>(crc << 1);
    }
  }
  return crc;
}

void criterion_crc() {
  int detected = 0;
  for (int state = kMinStateCode; state <= kMaxStateCode; ++state) {
    const auto clean = encode_frame(state);
    for (int bit = 0; bit < 24; ++bit) {
      auto damaged = clean;
      damaged[7 + bit / 8] ^= static_cast<std::uint8_t>(1 << (bit % 8));
      if (!decode_frame(damaged).ok()) ++detected;
    }
  }
  expect(detected == 13 * 24,
         "single-bit flips detected: " + std::to_string(detected) + "/312");

  std::mt19937_64 rng(0xACCE55);
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::uint8_t> data(rng() % 96);
    for (auto& byte : data) byte = static_cast<std::uint8_t>(rng());
    expect(crc16_ccitt_false(data) == crc16_oracle(data),
           "library CRC disagrees with the oracle");
  }
  expect(crc16_oracle({reinterpret_cast<const std::uint8_t*>("123456789"), 9}) == 0x29B1,
         "oracle check-string mismatch");
}

// --- criterion 5: baseline update time ---------------------------------------

void criterion_baseline_update_time() {
  const Scenario scenario = load_scenario(g_root / "scenarios/baseline-static.scn");
  const MetricsReport report = compute_metrics(run(scenario));
  const NodeMetrics& probe = report.nodes.at("probe");
  expect(probe.update_intervals_us.size() >= 150,
         "too few update intervals: " + std::to_string(probe.update_intervals_us.size()));
  for (SimTime interval : probe.update_intervals_us) {
    expect(interval >= 45'000 && interval <= 55'000,
           "interval " + std::to_string(interval) + " us outside [45, 55] ms");
  }
}

// --- criterion 6: PSR over distance ------------------------------------------

void criterion_psr_sweep() {
  const Scenario base = load_scenario(g_root / "scenarios/avenida-europa-sweep.scn");
  expect(base.sweep.has_value(), "sweep scenario lacks its [sweep] section");
  expect(base.duration_us == s_to_us(20), "sweep points must run 20 s each");
  const auto results = sweep(base, base.sweep->parameter, base.sweep->values);
  expect(results.size() == 8, "expected 8 sweep points");
  for (const auto& [distance, trace] : results) {
    const MetricsReport report = compute_metrics(trace);
    const NodeMetrics& probe = report.nodes.at("probe");
    const double measured = probe.psr();
    const double model = base.channel.psr_at(distance);
    expect(std::abs(measured - model) <= 0.03,
           "d=" + fmt(distance) + ": measured PSR " + fmt(measured) +
               " deviates from model " + fmt(model) + " by more than 0.03");
    if (distance <= 60.0) {
      expect(measured >= 0.8,
             "d=" + fmt(distance) + ": PSR " + fmt(measured) + " below 0.8");
      const double mean_update = probe.intervals().mean_us;
      expect(probe.update_intervals_us.size() > 0, "no update intervals");
      expect(mean_update < 100'000.0,
             "d=" + fmt(distance) + ": mean update " + fmt(mean_update / 1000.0) +
                 " ms not below 100 ms");
    }
  }
}

// --- criterion 7: dedicated vs duty-cycled receiver --------------------------

void criterion_receiver_asymmetry() {
  const Scenario scenario = load_scenario(g_root / "scenarios/quinta-del-rei-approach.scn");
  const MetricsReport report = compute_metrics(run(scenario));
  const ReceiverComparison comparison =
      compare_receivers(report, "car-dedicated", "car-phone");
  expect(comparison.rx_ok_b > 0, "duty-cycled receiver got nothing");
  expect(comparison.rx_ok_ratio >= 2.5 && comparison.rx_ok_ratio <= 4.5,
         "rx_ok ratio " + fmt(comparison.rx_ok_ratio) + " (" +
             std::to_string(comparison.rx_ok_a) + "/" +
             std::to_string(comparison.rx_ok_b) + ") outside [2.5, 4.5]");
  expect(comparison.mean_interval_b_us > 100'000.0,
         "duty-cycled mean update " + fmt(comparison.mean_interval_b_us / 1000.0) +
             " ms not above 100 ms");
}

// --- criterion 8: determinism -------------------------------------------------

void criterion_determinism() {
  const Scenario scenario = load_scenario(g_root / "scenarios/baseline-static.scn");
  expect(run(scenario).to_csv() == run(scenario).to_csv(),
         "same seed gave different traces");

  Scenario sweep_base = load_scenario(g_root / "scenarios/avenida-europa-sweep.scn");
  sweep_base = apply_parameter(sweep_base, "run.duration_s", 2.0);
  const std::vector<double> forward = {0.0, 40.0, 80.0};
  const std::vector<double> reversed = {80.0, 0.0, 40.0};
  auto a = sweep(sweep_base, "probe.x", forward);
  auto b = sweep(sweep_base, "probe.x", reversed);
  for (const auto& [value, trace] : a) {
    bool matched = false;
    for (const auto& [other_value, other_trace] : b) {
      if (other_value == value) {
        expect(trace.to_csv() == other_trace.to_csv(),
               "sweep value " + fmt(value) + " depends on value order");
        matched = true;
      }
    }
    expect(matched, "sweep value missing from reordered run");
  }
}

// --- criterion 9: relay safety under fuzz -------------------------------------

void criterion_relay_fuzz() {
  RetransmitterConfig config;
  config.node_id = "rtx1";
  config.tag = 0x5C;
  config.controller_source_id = "ctrl";
  RetransmitterMachine relay(config);
  vtl::testing::MachineDriver driver(relay);

  const SimTime period = config.controller_period_us;
  std::mt19937_64 rng(0xF022);
  std::map<SimTime, std::set<int>> accepted_per_period;

  // Frames the machine must treat as acceptable: whatever decodes cleanly,
  // is untagged, comes from the controller, and lands in an observe slot.
  const auto track = [&](SimTime when, std::span<const std::uint8_t> bytes,
                         const NodeId& source) {
    const DecodeResult result = decode_frame(bytes);
    if (!result.ok() || result.frame.retransmitter_tag || source != "ctrl") return;
    if (when - (when / period) * period < period / 2) {
      accepted_per_period[when / period].insert(result.frame.state_id);
    }
  };
  const auto inject = [&](SimTime when, std::vector<std::uint8_t> bytes,
                          const NodeId& source) {
    track(when, bytes, source);
    driver.deliver(when, bytes, source);
  };

  SimTime now = 0;
  const int events = 10'000;
  for (int i = 0; i < events; ++i) {
    now += static_cast<SimTime>(rng() % ms_to_us(120));
    const int roll = static_cast<int>(rng() % 100);
    if (roll < 45) {
      inject(now, encode_frame(1 + static_cast<int>(rng() % 13)), "ctrl");
    } else if (roll < 60) {
      inject(now, encode_frame(1 + static_cast<int>(rng() % 13)), "intruder");
    } else if (roll < 75) {
      auto frame = encode_frame(1 + static_cast<int>(rng() % 13));
      frame[5 + rng() % 8] ^= static_cast<std::uint8_t>(1 + rng() % 255);
      inject(now, std::move(frame), "ctrl");
    } else if (roll < 85) {
      inject(now,
             tag_frame(encode_frame(1 + static_cast<int>(rng() % 13)),
                       static_cast<std::uint8_t>(rng())),
             "ctrl");
    } else {
      driver.advance_to(now);
    }
  }
  driver.advance_to(now + period);

  expect(!driver.transmissions().empty(), "fuzz produced no relay traffic at all");
  for (const auto& [time, transmission] : driver.transmissions()) {
    const DecodeResult result = decode_frame(transmission.bytes);
    expect(result.ok(), "relay emitted an undecodable frame");
    expect(result.frame.retransmitter_tag == config.tag,
           "relay emission missing its tag");
    const SimTime period_index = time / period;
    const bool in_broadcast_half = time - period_index * period >= period / 2;
    expect(in_broadcast_half, "relay transmitted during an observe slot");
    const auto it = accepted_per_period.find(period_index);
    expect(it != accepted_per_period.end() &&
               it->second.contains(result.frame.state_id),
           "relay emitted state " + std::to_string(result.frame.state_id) +
               " it did not receive in period " + std::to_string(period_index));
  }
}

struct Criterion {
  int number;
  std::string title;
  std::function<void()> body;
};

} // namespace

int main(int argc, char** argv) {
  g_root = argc > 1 ? fs::path(argv[1]) : fs::current_path();

  const std::vector<Criterion> criteria = {
      {1, "13-byte frame takes 104 us at 1 Mb/s", criterion_tx_time},
      {2, "effective throughput is 24/484 b/us, within 1% of 0.050", criterion_throughput},
      {3, "phase table matches the 13x16 fixture with zero conflicts", criterion_phase_table},
      {4, "payload CRC catches every single-bit flip and matches the oracle", criterion_crc},
      {5, "baseline update intervals stay within [45, 55] ms", criterion_baseline_update_time},
      {6, "swept PSR tracks the model within 3 points up to 140 m", criterion_psr_sweep},
      {7, "dedicated/duty-cycled reception ratio in [2.5, 4.5], phone above 100 ms", criterion_receiver_asymmetry},
      {8, "reruns and reordered sweeps are byte-identical", criterion_determinism},
      {9, "fuzzed relay only re-emits tagged, freshly received states", criterion_relay_fuzz},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    try {
      criterion.body();
      std::cout << "PASS criterion " << criterion.number << ": " << criterion.title
                << "\n";
    } catch (const CheckFailure& failure) {
      ++failures;
      std::cout << "FAIL criterion " << criterion.number << ": " << criterion.title
                << " -- " << failure.what << "\n";
    } catch (const std::exception& error) {
      ++failures;
      std::cout << "FAIL criterion " << criterion.number << ": " << criterion.title
                << " -- unexpected error: " << error.what() << "\n";
    }
  }
  if (failures == 0) {
    std::cout << "all " << criteria.size() << " acceptance criteria passed\n";
  } else {
    std::cout << failures << " of " << criteria.size() << " criteria failed\n";
  }
  return failures == 0 ? 0 : 1;
}
