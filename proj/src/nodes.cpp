#include "vtl/nodes.hpp"

#include <algorithm>
#include <stdexcept>

namespace vtl {

namespace {

SimTime floor_div(SimTime a, SimTime b) {
  SimTime q = a / b;
  if (a % b != 0 && (a < 0) != (b < 0)) --q;
  return q;
}

SimTime floor_mod(SimTime a, SimTime b) { return a - floor_div(a, b) * b; }

void throw_if_invalid(const std::vector<std::string>& violations, const char* what) {
  if (violations.empty()) return;
  std::string message = std::string(what) + " config invalid:";
  for (const std::string& violation : violations) {
    message += "\n  - " + violation;
  }
  throw std::invalid_argument(message);
}

std::shared_ptr<const Intersection> default_intersection() {
  // Non-owning handle to the library-lifetime standard intersection.
  return {std::shared_ptr<void>(), &standard_intersection()};
}

std::shared_ptr<const std::vector<PhaseState>> default_table() {
  return {std::shared_ptr<void>(), &standard_phase_table()};
}

} // namespace

std::vector<std::string> ControllerConfig::validate() const {
  std::vector<std::string> violations;
  if (state_period_us <= 0) violations.push_back("state period must be positive");
  if (advertising_interval_us <= 0) violations.push_back("advertising interval must be positive");
  if (advertising_interval_us >= state_period_us) {
    violations.push_back("advertising interval must be shorter than the state period");
  }
  if (advertising_jitter_us < 0 || advertising_jitter_us >= advertising_interval_us) {
    violations.push_back("advertising jitter must be in [0, advertising interval)");
  }
  if (!state_periods_us.empty()) {
    const std::size_t states =
        phase_table.empty() ? standard_phase_table().size() : phase_table.size();
    if (state_periods_us.size() != states) {
      violations.push_back("per-state period list must name every state once");
    }
    for (SimTime period : state_periods_us) {
      if (period <= advertising_interval_us) {
        violations.push_back("per-state periods must exceed the advertising interval");
        break;
      }
    }
  }
  const std::vector<PhaseState>& table =
      phase_table.empty() ? standard_phase_table() : phase_table;
  for (const PhaseState& state : table) {
    if (state.state_id < kMinStateCode || state.state_id > kMaxStateCode) {
      violations.push_back("state id " + std::to_string(state.state_id) +
                           " does not fit the one-byte wire code");
      break;
    }
  }
  return violations;
}

ControllerMachine::ControllerMachine(ControllerConfig config, std::uint64_t jitter_seed)
    : config_(std::move(config)), jitter_rng_(jitter_seed) {
  if (config_.phase_table.empty()) {
    config_.phase_table = standard_phase_table();
  }
  throw_if_invalid(config_.validate(), "controller");
}

int ControllerMachine::current_state_id() const {
  return config_.phase_table[state_index_].state_id;
}

SimTime ControllerMachine::dwell_us(std::size_t state_index) const {
  if (!config_.state_periods_us.empty()) {
    return config_.state_periods_us[state_index];
  }
  return config_.state_period_us;
}

SimTime ControllerMachine::jitter() {
  if (config_.advertising_jitter_us <= 0) return 0;
  return static_cast<SimTime>(jitter_rng_.next_double() *
                              static_cast<double>(config_.advertising_jitter_us));
}

StepOutput ControllerMachine::on_wake(SimTime now) {
  StepOutput out;
  if (!started_) {
    started_ = true;
    period_start_us_ = now;
    next_tx_us_ = now + jitter();
    out.events.push_back({.kind = NodeEventKind::StateAdvance,
                          .state_id = current_state_id()});
  }
  while (now >= period_start_us_ + dwell_us(state_index_)) {
    period_start_us_ += dwell_us(state_index_);
    state_index_ = (state_index_ + 1) % config_.phase_table.size();
    next_tx_us_ = period_start_us_ + jitter();
    out.events.push_back({.kind = NodeEventKind::StateAdvance,
                          .state_id = current_state_id()});
  }
  if (now >= next_tx_us_) {
    out.transmissions.push_back(
        {encode_frame(current_state_id(), config_.frame_params)});
    next_tx_us_ = now + config_.advertising_interval_us + jitter();
  }
  const SimTime period_end = period_start_us_ + dwell_us(state_index_);
  out.next_wake = std::min(next_tx_us_, period_end);
  return out;
}

StepOutput ControllerMachine::on_frame(SimTime, std::span<const std::uint8_t>,
                                       const NodeId&) {
  // The controller only talks.
  return {};
}

std::vector<std::string> RetransmitterConfig::validate() const {
  std::vector<std::string> violations;
  if (node_id == controller_source_id) {
    violations.push_back("retransmitter id must differ from the controller's");
  }
  if (controller_period_us <= 0 || controller_period_us % 2 != 0) {
    violations.push_back("controller period must be positive and divisible into two slots");
  }
  if (advertising_interval_us <= 0) {
    violations.push_back("advertising interval must be positive");
  }
  if (controller_period_us > 0 && advertising_interval_us >= controller_period_us / 2) {
    violations.push_back("advertising interval must fit inside one slot");
  }
  if (advertising_jitter_us < 0 || advertising_jitter_us >= advertising_interval_us) {
    violations.push_back("advertising jitter must be in [0, advertising interval)");
  }
  if (start_offset_us < 0) {
    violations.push_back("start offset must be nonnegative");
  }
  return violations;
}

RetransmitterMachine::RetransmitterMachine(RetransmitterConfig config,
                                           std::uint64_t jitter_seed)
    : config_(std::move(config)), jitter_rng_(jitter_seed) {
  throw_if_invalid(config_.validate(), "retransmitter");
}

SimTime RetransmitterMachine::slot_index(SimTime now) const {
  return floor_div(now - config_.start_offset_us, config_.controller_period_us / 2);
}

bool RetransmitterMachine::in_observe_slot(SimTime now) const {
  // Slots before the anchor count as off-air.
  const SimTime idx = slot_index(now);
  return idx >= 0 && idx % 2 == 0;
}

SimTime RetransmitterMachine::jitter() {
  if (config_.advertising_jitter_us <= 0) return 0;
  return static_cast<SimTime>(jitter_rng_.next_double() *
                              static_cast<double>(config_.advertising_jitter_us));
}

StepOutput RetransmitterMachine::on_wake(SimTime now) {
  StepOutput out;
  const SimTime half = config_.controller_period_us / 2;
  const SimTime idx = slot_index(now);
  if (idx != current_slot_) {
    current_slot_ = idx;
    const bool observe = in_observe_slot(now);
    if (observe) {
      // New period: whatever was stored no longer counts as received.
      message_received_ = false;
      next_tx_us_.reset();
    } else if (message_received_) {
      next_tx_us_ = config_.start_offset_us + idx * half + jitter();
    } else {
      next_tx_us_.reset();
    }
    out.events.push_back({.kind = NodeEventKind::SlotChange, .observe_slot = observe});
  }
  const SimTime slot_end = config_.start_offset_us + (idx + 1) * half;
  if (next_tx_us_ && now >= *next_tx_us_) {
    out.transmissions.push_back({tag_frame(stored_frame_, config_.tag)});
    const SimTime next = *next_tx_us_ + config_.advertising_interval_us + jitter();
    if (next < slot_end) {
      next_tx_us_ = next;
    } else {
      next_tx_us_.reset();
    }
  }
  out.next_wake = next_tx_us_ ? std::min(*next_tx_us_, slot_end) : slot_end;
  return out;
}

StepOutput RetransmitterMachine::on_frame(SimTime now,
                                          std::span<const std::uint8_t> bytes,
                                          const NodeId& source) {
  StepOutput out;
  if (!in_observe_slot(now)) {
    out.events.push_back({.kind = NodeEventKind::RxNotListening});
    return out;
  }
  const DecodeResult result = decode_frame(bytes);
  if (!result.ok()) {
    ++corrupt_count_;
    out.events.push_back({.kind = NodeEventKind::RxCorrupt});
    return out;
  }
  if (source != config_.controller_source_id || result.frame.retransmitter_tag) {
    ++filtered_count_;
    out.events.push_back({.kind = NodeEventKind::RxFiltered});
    return out;
  }
  stored_frame_.assign(bytes.begin(), bytes.end());
  message_received_ = true;
  out.events.push_back({.kind = NodeEventKind::RxAccepted,
                        .state_id = result.frame.state_id});
  return out;
}

double ReceiverConfig::duty_cycle() const {
  return static_cast<double>(scan_window_us) / static_cast<double>(scan_interval_us);
}

std::vector<std::string> ReceiverConfig::validate() const {
  std::vector<std::string> violations;
  if (staleness_timeout_us <= 0) violations.push_back("staleness timeout must be positive");
  if (scan_interval_us <= 0) violations.push_back("scan interval must be positive");
  if (scan_window_us <= 0 || scan_window_us > scan_interval_us) {
    violations.push_back("scan window must be in (0, scan interval]");
  }
  return violations;
}

ReceiverMachine::ReceiverMachine(ReceiverConfig config,
                                 std::shared_ptr<const Intersection> intersection,
                                 std::shared_ptr<const std::vector<PhaseState>> table)
    : config_(std::move(config)),
      intersection_(intersection ? std::move(intersection) : default_intersection()),
      table_(table ? std::move(table) : default_table()) {
  throw_if_invalid(config_.validate(), "receiver");
  if (!intersection_->find(config_.movement_of_interest)) {
    throw std::invalid_argument("movement of interest " +
                                config_.movement_of_interest.str() +
                                " is not part of the intersection");
  }
}

bool ReceiverMachine::listening(SimTime now) const {
  if (config_.scan_window_us >= config_.scan_interval_us) return true;
  return floor_mod(now, config_.scan_interval_us) < config_.scan_window_us;
}

const PhaseState* ReceiverMachine::phase_for(int state_id) const {
  for (const PhaseState& state : *table_) {
    if (state.state_id == state_id) return &state;
  }
  return nullptr;
}

void ReceiverMachine::set_display(DisplayState display, std::vector<NodeEvent>& events) {
  if (display_initialized_ && status_.display == display) return;
  display_initialized_ = true;
  status_.display = display;
  events.push_back({.kind = NodeEventKind::DisplayChange, .display = display});
}

StepOutput ReceiverMachine::make_output(std::vector<NodeEvent> events, SimTime now) {
  StepOutput out;
  out.events = std::move(events);
  if (status_.current_state_id &&
      now - status_.last_update_us <= config_.staleness_timeout_us) {
    // First instant at which the display would go stale.
    out.next_wake = status_.last_update_us + config_.staleness_timeout_us + 1;
  }
  return out;
}

StepOutput ReceiverMachine::on_wake(SimTime now) {
  std::vector<NodeEvent> events;
  const bool stale = !status_.current_state_id ||
                     now - status_.last_update_us > config_.staleness_timeout_us;
  if (stale) {
    set_display(DisplayState::CautionAnomaly, events);
  }
  return make_output(std::move(events), now);
}

StepOutput ReceiverMachine::on_frame(SimTime now, std::span<const std::uint8_t> bytes,
                                     const NodeId&) {
  std::vector<NodeEvent> events;
  if (!listening(now)) {
    ++status_.not_listening_count;
    events.push_back({.kind = NodeEventKind::RxNotListening});
    return make_output(std::move(events), now);
  }
  const DecodeResult result = decode_frame(bytes);
  const PhaseState* phase =
      result.ok() ? phase_for(result.frame.state_id) : nullptr;
  if (!result.ok() || phase == nullptr) {
    ++status_.corrupt_count;
    events.push_back({.kind = NodeEventKind::RxCorrupt});
    return make_output(std::move(events), now);
  }
  if (status_.current_state_id) {
    status_.update_intervals_us.push_back(now - status_.last_update_us);
  }
  status_.current_state_id = result.frame.state_id;
  status_.last_update_us = now;
  ++status_.rx_ok_count;
  events.push_back({.kind = NodeEventKind::RxAccepted,
                    .state_id = result.frame.state_id});
  set_display(display_state_for(config_.movement_of_interest, *phase,
                                intersection_->matrix, true),
              events);
  return make_output(std::move(events), now);
}

} // namespace vtl
