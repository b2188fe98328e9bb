#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vtl {

enum class SignalColor : std::uint8_t { Red, Green, Yellow };

std::string_view to_string(SignalColor color);
std::optional<SignalColor> signal_color_from(std::string_view text);

enum class MovementKind : std::uint8_t {
  VehicleThrough,
  VehicleLeft,
  VehicleRightPermitted,
  Pedestrian,
};

// Compass legs of the junction. The major street runs north-south.
enum class Leg : std::uint8_t { North, East, South, West };

// Direction of travel for vehicle movements.
enum class Approach : std::uint8_t {
  NorthToSouth,
  SouthToNorth,
  EastToWest,
  WestToEast,
};

std::string_view to_string(Approach approach);

// Identifier of one movement: a plain number for vehicles ("2"),
// a P-prefixed number for pedestrian crossings ("P2").
class MovementId {
public:
  constexpr MovementId() = default;

  static constexpr MovementId vehicle(int number) { return MovementId(number, false); }
  static constexpr MovementId pedestrian(int number) { return MovementId(number, true); }

  static std::optional<MovementId> parse(std::string_view text);

  constexpr bool is_pedestrian() const { return pedestrian_; }
  constexpr int number() const { return number_; }

  std::string str() const;

  friend constexpr auto operator<=>(const MovementId&, const MovementId&) = default;

private:
  constexpr MovementId(int number, bool pedestrian)
      : number_(number), pedestrian_(pedestrian) {}

  int number_ = 0;
  bool pedestrian_ = false;
};

struct Movement {
  MovementId id;
  MovementKind kind = MovementKind::VehicleThrough;
  std::optional<Approach> approach; // vehicles only
  // Vehicles: legs the path enters and leaves by. Pedestrians: both are
  // the leg the crosswalk spans.
  Leg entry_leg = Leg::North;
  Leg exit_leg = Leg::North;

  bool major_street() const;
};

enum class Relation : std::uint8_t { Compatible, Conflict, Yield };

std::string_view to_string(Relation relation);

// Pairwise movement relations. Compatible and conflict are symmetric;
// a yield pair is reported as Yield in both argument orders, with
// yields_to() giving the direction.
class ConflictMatrix {
public:
  explicit ConflictMatrix(std::vector<MovementId> movements);

  const std::vector<MovementId>& movements() const { return movements_; }
  bool knows(MovementId id) const;

  Relation relation(MovementId a, MovementId b) const;
  // True when `a` must give way to `b`.
  bool yields_to(MovementId a, MovementId b) const;
  std::vector<MovementId> yield_targets(MovementId a) const;

  void set_conflict(MovementId a, MovementId b);
  void set_yield(MovementId yielding, MovementId priority);

private:
  std::size_t index_of(MovementId id) const; // throws on unknown id

  std::vector<MovementId> movements_;
  // Row-major over movement indices: relation of (row, col).
  std::vector<Relation> relation_;
  std::vector<bool> yields_;
};

struct Intersection {
  std::vector<Movement> movements; // phase-table column order
  ConflictMatrix matrix;

  const Movement* find(MovementId id) const;
};

// The 4-way junction of the standard scheme: 12 vehicle movements,
// 4 pedestrian crossings, and the authored conflict/yield relations.
const Intersection& standard_intersection();
Intersection build_standard_intersection();

struct PhaseState {
  int state_id = 0;
  std::map<MovementId, SignalColor> colors; // total over the intersection

  SignalColor color_of(MovementId id) const; // throws std::out_of_range
};

// The 13-state signal plan, cell-for-cell; cycles 1 -> 13 -> 1.
const std::vector<PhaseState>& standard_phase_table();

struct MalformedTableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConflictFinding {
  int state_id = 0;
  MovementId a;
  MovementId b;
  SignalColor color_a = SignalColor::Red;
  SignalColor color_b = SignalColor::Red;
};

struct ValidationReport {
  std::vector<ConflictFinding> findings;

  bool conflict_free() const { return findings.empty(); }
};

// Scans every state for pairs of hard-conflicting movements that are both
// non-red (yellow counts as non-red). Unknown or missing movement ids
// raise MalformedTableError.
ValidationReport validate_phase_table(const std::vector<PhaseState>& table,
                                      const ConflictMatrix& matrix);

enum class DisplayState : std::uint8_t {
  Red,
  Green,
  Yellow,
  GreenYieldCrosswalk,
  CautionAnomaly,
};

std::string_view to_string(DisplayState display);

// What a user device shows for one movement under one phase. With the
// link down everything collapses to the caution display.
DisplayState display_state_for(MovementId movement, const PhaseState& phase,
                               const ConflictMatrix& matrix, bool link_ok);

// Plain-text matrix exchange format: '#' comments, a header line naming the
// movement columns, then one "state_id color..." row per state (R/G/Y).
std::string phase_table_to_text(const std::vector<PhaseState>& table,
                                const std::vector<MovementId>& columns);
std::vector<PhaseState> phase_table_from_text(std::istream& in);
std::vector<PhaseState> phase_table_from_text(const std::string& text);

} // namespace vtl
