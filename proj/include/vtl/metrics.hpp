#pragma once

#include "vtl/simengine.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace vtl {

struct IntervalStats {
  double mean_us = 0.0;
  double median_us = 0.0;
  SimTime max_us = 0;
};

struct NodeMetrics {
  NodeId node;
  std::uint64_t tx_count = 0;
  std::uint64_t rx_ok = 0;
  std::uint64_t rx_lost_channel = 0;
  std::uint64_t rx_lost_not_listening = 0;
  std::uint64_t rx_lost_filtered = 0;
  std::uint64_t rx_corrupt = 0;

  // Addressed frames: everything transmitted toward this node.
  std::uint64_t addressed() const;
  // Correctly received over addressed; frames missed while not listening
  // count as losses.
  double psr() const;

  std::vector<SimTime> update_intervals_us; // gaps between accepted frames
  IntervalStats intervals() const;
  // Secondary update-time definition: time-averaged age of the displayed
  // information between the first and last trace instant.
  double mean_info_age_us = 0.0;

  std::vector<std::pair<SimTime, std::string>> display_timeline;
};

struct TheoreticalMetrics {
  double tx_time_us = 0.0;           // 13-byte frame at the default bitrate
  double throughput_bits_per_us = 0.0;
};

struct MetricsReport {
  std::map<NodeId, NodeMetrics> nodes;
  TheoreticalMetrics theoretical;

  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
  // Human-readable digest; every number is the same formatted string that
  // appears in the CSV.
  std::string summary_text() const;
};

MetricsReport compute_metrics(const Trace& trace);

struct ReceiverComparison {
  NodeId node_a;
  NodeId node_b;
  std::uint64_t rx_ok_a = 0;
  std::uint64_t rx_ok_b = 0;
  double rx_ok_ratio = 0.0;            // a over b
  double mean_interval_a_us = 0.0;
  double mean_interval_b_us = 0.0;
  double mean_interval_diff_us = 0.0;  // a minus b
};

// Throws std::invalid_argument when a node is missing from the report.
ReceiverComparison compare_receivers(const MetricsReport& report, const NodeId& a,
                                     const NodeId& b);

} // namespace vtl
