#pragma once

#include "vtl/channel.hpp"
#include "vtl/intersection.hpp"
#include "vtl/protocol.hpp"
#include "vtl/sim_time.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vtl {

using NodeId = std::string;

struct Transmission {
  std::vector<std::uint8_t> bytes;
};

enum class NodeEventKind : std::uint8_t {
  StateAdvance,   // controller moved to a new phase state
  SlotChange,     // retransmitter flipped observe/broadcast
  DisplayChange,  // receiver display changed
  RxAccepted,     // frame decoded and taken
  RxCorrupt,      // frame failed integrity checks, dropped
  RxNotListening, // frame arrived outside a listening window/slot
  RxFiltered,     // valid frame from an unexpected source, ignored
};

struct NodeEvent {
  NodeEventKind kind;
  int state_id = 0;               // StateAdvance, RxAccepted
  DisplayState display = DisplayState::CautionAnomaly; // DisplayChange
  bool observe_slot = false;      // SlotChange
};

struct StepOutput {
  std::vector<Transmission> transmissions;
  std::optional<SimTime> next_wake;
  std::vector<NodeEvent> events;
};

// Event-driven protocol machine. Time is always injected; a machine never
// looks at a clock. The driver delivers wakes at the times the machine asks
// for and frames as they arrive, both in nondecreasing time order.
class ProtocolMachine {
public:
  virtual ~ProtocolMachine() = default;

  virtual StepOutput on_wake(SimTime now) = 0;
  virtual StepOutput on_frame(SimTime now, std::span<const std::uint8_t> bytes,
                              const NodeId& source) = 0;
};

struct ControllerConfig {
  NodeId source_id = "controller";
  std::vector<PhaseState> phase_table;          // empty -> standard table
  SimTime state_period_us = 2'000'000;
  std::vector<SimTime> state_periods_us;        // optional per-state dwell times
  SimTime advertising_interval_us = 50'000;
  // Per-broadcast random delay in [0, jitter), accumulated along the
  // advertising train like the radio's advDelay. 0 = exact grid.
  SimTime advertising_jitter_us = 0;
  FrameParams frame_params{};

  std::vector<std::string> validate() const;
};

// Walks the phase table forever, broadcasting the current state every
// advertising interval for the state's dwell time, then advancing (the last
// state wraps to the first).
class ControllerMachine : public ProtocolMachine {
public:
  explicit ControllerMachine(ControllerConfig config, std::uint64_t jitter_seed = 0);

  StepOutput on_wake(SimTime now) override;
  StepOutput on_frame(SimTime now, std::span<const std::uint8_t> bytes,
                      const NodeId& source) override;

  int current_state_id() const;
  const ControllerConfig& config() const { return config_; }

private:
  SimTime dwell_us(std::size_t state_index) const;
  SimTime jitter();

  ControllerConfig config_;
  RngStream jitter_rng_;
  std::size_t state_index_ = 0;
  SimTime period_start_us_ = 0;
  SimTime next_tx_us_ = 0;
  bool started_ = false;
};

struct RetransmitterConfig {
  NodeId node_id = "retransmitter";
  std::uint8_t tag = 0x01;
  NodeId controller_source_id = "controller";
  SimTime controller_period_us = 2'000'000; // one phase-state dwell
  SimTime advertising_interval_us = 50'000;
  SimTime advertising_jitter_us = 0;
  SimTime start_offset_us = 0;              // slot anchor relative to t=0

  std::vector<std::string> validate() const;
};

// Alternates two half-period slots: observe (accept the controller's valid
// frames) and broadcast (re-emit the stored frame, tagged, every advertising
// interval; silent if nothing was received this period).
class RetransmitterMachine : public ProtocolMachine {
public:
  explicit RetransmitterMachine(RetransmitterConfig config,
                                std::uint64_t jitter_seed = 0);

  StepOutput on_wake(SimTime now) override;
  StepOutput on_frame(SimTime now, std::span<const std::uint8_t> bytes,
                      const NodeId& source) override;

  bool in_observe_slot(SimTime now) const;
  std::uint64_t corrupt_count() const { return corrupt_count_; }
  std::uint64_t filtered_count() const { return filtered_count_; }
  const RetransmitterConfig& config() const { return config_; }

private:
  SimTime slot_index(SimTime now) const; // half-period index since anchor
  SimTime jitter();

  RetransmitterConfig config_;
  RngStream jitter_rng_;
  SimTime current_slot_ = -1;
  bool message_received_ = false;
  std::vector<std::uint8_t> stored_frame_;
  std::optional<SimTime> next_tx_us_;
  std::uint64_t corrupt_count_ = 0;
  std::uint64_t filtered_count_ = 0;
};

struct ReceiverConfig {
  NodeId node_id = "receiver";
  MovementId movement_of_interest = MovementId::vehicle(2);
  SimTime staleness_timeout_us = 150'000;
  // Periodic listening gate anchored at t=0: listening while
  // (t mod scan_interval) < scan_window. Equal values = always listening
  // (the dedicated module); 30/100 ms models the smartphone scanner.
  SimTime scan_window_us = 100'000;
  SimTime scan_interval_us = 100'000;

  double duty_cycle() const;
  std::vector<std::string> validate() const;
};

struct ReceiverStatus {
  std::optional<int> current_state_id;
  SimTime last_update_us = 0; // meaningful once current_state_id is set
  DisplayState display = DisplayState::CautionAnomaly;
  std::vector<SimTime> update_intervals_us;
  std::uint64_t rx_ok_count = 0;
  std::uint64_t corrupt_count = 0;
  std::uint64_t not_listening_count = 0;
};

// Renders the virtual light for one movement from the received state
// stream; goes to the caution display when updates stop arriving.
class ReceiverMachine : public ProtocolMachine {
public:
  ReceiverMachine(ReceiverConfig config,
                  std::shared_ptr<const Intersection> intersection = nullptr,
                  std::shared_ptr<const std::vector<PhaseState>> table = nullptr);

  StepOutput on_wake(SimTime now) override;
  StepOutput on_frame(SimTime now, std::span<const std::uint8_t> bytes,
                      const NodeId& source) override;

  bool listening(SimTime now) const;
  const ReceiverStatus& status() const { return status_; }
  const ReceiverConfig& config() const { return config_; }

private:
  StepOutput make_output(std::vector<NodeEvent> events, SimTime now);
  const PhaseState* phase_for(int state_id) const;
  void set_display(DisplayState display, std::vector<NodeEvent>& events);

  ReceiverConfig config_;
  std::shared_ptr<const Intersection> intersection_;
  std::shared_ptr<const std::vector<PhaseState>> table_;
  ReceiverStatus status_;
  bool display_initialized_ = false;
};

} // namespace vtl
