#include "vtl/metrics.hpp"

#include "vtl/protocol.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace vtl {

namespace {

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

std::string payload_field(std::string_view payload, std::string_view key) {
  for (const auto& [name, value] : parse_payload(payload)) {
    if (name == key) return value;
  }
  return "";
}

} // namespace

std::uint64_t NodeMetrics::addressed() const {
  return rx_ok + rx_lost_channel + rx_lost_not_listening + rx_lost_filtered + rx_corrupt;
}

double NodeMetrics::psr() const {
  const std::uint64_t total = addressed();
  return total == 0 ? 0.0 : static_cast<double>(rx_ok) / static_cast<double>(total);
}

IntervalStats NodeMetrics::intervals() const {
  IntervalStats stats;
  if (update_intervals_us.empty()) return stats;
  std::vector<SimTime> sorted = update_intervals_us;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (SimTime interval : sorted) sum += static_cast<double>(interval);
  stats.mean_us = sum / static_cast<double>(sorted.size());
  const std::size_t mid = sorted.size() / 2;
  stats.median_us = sorted.size() % 2 == 1
                        ? static_cast<double>(sorted[mid])
                        : (static_cast<double>(sorted[mid - 1]) +
                           static_cast<double>(sorted[mid])) / 2.0;
  stats.max_us = sorted.back();
  return stats;
}

MetricsReport compute_metrics(const Trace& trace) {
  MetricsReport report;
  report.theoretical.tx_time_us = tx_time_us(kFrameSize);
  report.theoretical.throughput_bits_per_us =
      effective_throughput_bits_per_us(24.0, report.theoretical.tx_time_us);

  std::map<NodeId, SimTime> last_rx;
  std::map<NodeId, SimTime> first_rx;
  std::map<NodeId, double> age_integral;
  SimTime trace_end = 0;

  for (const TraceEvent& event : trace.events) {
    trace_end = std::max(trace_end, event.time_us);
    NodeMetrics& node = report.nodes[event.node];
    node.node = event.node;
    switch (event.kind) {
      case TraceKind::Tx:
        ++node.tx_count;
        break;
      case TraceKind::RxOk: {
        ++node.rx_ok;
        auto it = last_rx.find(event.node);
        if (it != last_rx.end()) {
          const SimTime gap = event.time_us - it->second;
          node.update_intervals_us.push_back(gap);
          age_integral[event.node] +=
              static_cast<double>(gap) * static_cast<double>(gap) / 2.0;
        } else {
          first_rx[event.node] = event.time_us;
        }
        last_rx[event.node] = event.time_us;
        break;
      }
      case TraceKind::RxLost: {
        const std::string reason = payload_field(event.payload, "reason");
        if (reason == "not-listening") {
          ++node.rx_lost_not_listening;
        } else if (reason == "filtered") {
          ++node.rx_lost_filtered;
        } else {
          ++node.rx_lost_channel;
        }
        break;
      }
      case TraceKind::RxCorrupt:
        ++node.rx_corrupt;
        break;
      case TraceKind::DisplayChange:
        node.display_timeline.emplace_back(event.time_us,
                                           payload_field(event.payload, "display"));
        break;
      case TraceKind::StateAdvance:
      case TraceKind::SlotChange:
        break;
    }
  }

  for (auto& [id, node] : report.nodes) {
    auto first = first_rx.find(id);
    if (first == first_rx.end()) continue;
    const SimTime last = last_rx.at(id);
    double integral = age_integral[id];
    const double tail = static_cast<double>(trace_end - last);
    integral += tail * tail / 2.0;
    const double span = static_cast<double>(trace_end - first->second);
    node.mean_info_age_us = span > 0.0 ? integral / span : 0.0;
  }
  return report;
}

void MetricsReport::write_csv(std::ostream& out) const {
  out << "# theoretical: tx_time_us=" << format_double(theoretical.tx_time_us)
      << " throughput_bits_per_us=" << format_double(theoretical.throughput_bits_per_us)
      << "\n";
  out << "node,tx_count,rx_ok,rx_lost_channel,rx_lost_not_listening,rx_lost_filtered,"
         "rx_corrupt,psr,update_count,update_mean_us,update_median_us,update_max_us,"
         "mean_info_age_us\n";
  for (const auto& [id, node] : nodes) {
    const IntervalStats stats = node.intervals();
    out << id << ',' << node.tx_count << ',' << node.rx_ok << ','
        << node.rx_lost_channel << ',' << node.rx_lost_not_listening << ','
        << node.rx_lost_filtered << ',' << node.rx_corrupt << ','
        << format_double(node.psr()) << ',' << node.update_intervals_us.size() << ','
        << format_double(stats.mean_us) << ',' << format_double(stats.median_us) << ','
        << stats.max_us << ',' << format_double(node.mean_info_age_us) << '\n';
  }
}

std::string MetricsReport::to_csv() const {
  std::ostringstream out;
  write_csv(out);
  return out.str();
}

std::string MetricsReport::summary_text() const {
  std::ostringstream out;
  out << "theoretical: one 13-byte frame takes " << format_double(theoretical.tx_time_us)
      << " us on air; effective throughput "
      << format_double(theoretical.throughput_bits_per_us) << " b/us\n";
  for (const auto& [id, node] : nodes) {
    const IntervalStats stats = node.intervals();
    out << id << ": tx=" << node.tx_count << " rx_ok=" << node.rx_ok
        << " lost(channel)=" << node.rx_lost_channel
        << " lost(not-listening)=" << node.rx_lost_not_listening
        << " lost(filtered)=" << node.rx_lost_filtered
        << " corrupt=" << node.rx_corrupt << " psr=" << format_double(node.psr())
        << "\n";
    if (!node.update_intervals_us.empty()) {
      out << "  update intervals: count=" << node.update_intervals_us.size()
          << " mean_us=" << format_double(stats.mean_us)
          << " median_us=" << format_double(stats.median_us)
          << " max_us=" << stats.max_us
          << " mean_info_age_us=" << format_double(node.mean_info_age_us) << "\n";
    }
    if (!node.display_timeline.empty()) {
      out << "  display:";
      for (const auto& [time_us, display] : node.display_timeline) {
        out << ' ' << time_us << "->" << display;
      }
      out << "\n";
    }
  }
  return out.str();
}

ReceiverComparison compare_receivers(const MetricsReport& report, const NodeId& a,
                                     const NodeId& b) {
  const auto it_a = report.nodes.find(a);
  const auto it_b = report.nodes.find(b);
  if (it_a == report.nodes.end()) {
    throw std::invalid_argument("node '" + a + "' is not in the report");
  }
  if (it_b == report.nodes.end()) {
    throw std::invalid_argument("node '" + b + "' is not in the report");
  }
  ReceiverComparison comparison;
  comparison.node_a = a;
  comparison.node_b = b;
  comparison.rx_ok_a = it_a->second.rx_ok;
  comparison.rx_ok_b = it_b->second.rx_ok;
  comparison.rx_ok_ratio =
      it_b->second.rx_ok == 0
          ? std::numeric_limits<double>::infinity()
          : static_cast<double>(it_a->second.rx_ok) /
                static_cast<double>(it_b->second.rx_ok);
  comparison.mean_interval_a_us = it_a->second.intervals().mean_us;
  comparison.mean_interval_b_us = it_b->second.intervals().mean_us;
  comparison.mean_interval_diff_us =
      comparison.mean_interval_a_us - comparison.mean_interval_b_us;
  return comparison;
}

} // namespace vtl
