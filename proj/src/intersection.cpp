#include "vtl/intersection.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <sstream>

namespace vtl {

namespace {

// Column order of the standard table: the four crossings, then the vehicle
// movements grouped per approach (left, through, right).
const std::vector<MovementId>& table_columns() {
  static const std::vector<MovementId> columns = {
      MovementId::pedestrian(2),  MovementId::pedestrian(4),
      MovementId::pedestrian(6),  MovementId::pedestrian(8),
      MovementId::vehicle(5),     MovementId::vehicle(2),
      MovementId::vehicle(12),    MovementId::vehicle(1),
      MovementId::vehicle(6),     MovementId::vehicle(16),
      MovementId::vehicle(7),     MovementId::vehicle(4),
      MovementId::vehicle(14),    MovementId::vehicle(3),
      MovementId::vehicle(8),     MovementId::vehicle(18),
  };
  return columns;
}

// The 13 signal states, one 16-character row each in table_columns() order.
constexpr std::array<const char*, 13> kStateRows = {
    "RRRRGRRGRRRRRRRR", // 1: both major-street lefts protected
    "RRRRYRRGRRRRRRRR", // 2
    "RRGRRRRGGGRRRRRR", // 3: full northbound release, west crosswalk walks
    "RRGRRRRYGGRRRRRR", // 4
    "GRGRGGGRGGRRRRRR", // 5: both major throughs, permitted turns, crosswalks
    "GRGRRYYRYYRRRRRR", // 6
    "RRRRRRRRRRGRRGRR", // 7: both minor-street lefts
    "RRRRRRRRRRYRRGRR", // 8
    "RRRRRRRRRRRRRGGG", // 9: full eastbound release
    "RRRRRRRRRRRRRYGG", // 10
    "RRRRRRRRRRRGGRGG", // 11: both minor throughs and rights
    "RGRGRRRRRRRGGRGG", // 12: minor throughs with crosswalks
    "RGRGRRRRRRRYYRYY", // 13
};

struct VehicleDef {
  int number;
  MovementKind kind;
  Approach approach;
  Leg entry;
  Leg exit;
};

constexpr std::array<VehicleDef, 12> kVehicles = {{
    {1, MovementKind::VehicleLeft, Approach::SouthToNorth, Leg::South, Leg::West},
    {2, MovementKind::VehicleThrough, Approach::NorthToSouth, Leg::North, Leg::South},
    {3, MovementKind::VehicleLeft, Approach::WestToEast, Leg::West, Leg::North},
    {4, MovementKind::VehicleThrough, Approach::EastToWest, Leg::East, Leg::West},
    {5, MovementKind::VehicleLeft, Approach::NorthToSouth, Leg::North, Leg::East},
    {6, MovementKind::VehicleThrough, Approach::SouthToNorth, Leg::South, Leg::North},
    {7, MovementKind::VehicleLeft, Approach::EastToWest, Leg::East, Leg::South},
    {8, MovementKind::VehicleThrough, Approach::WestToEast, Leg::West, Leg::East},
    {12, MovementKind::VehicleRightPermitted, Approach::NorthToSouth, Leg::North, Leg::West},
    {14, MovementKind::VehicleRightPermitted, Approach::EastToWest, Leg::East, Leg::North},
    {16, MovementKind::VehicleRightPermitted, Approach::SouthToNorth, Leg::South, Leg::East},
    {18, MovementKind::VehicleRightPermitted, Approach::WestToEast, Leg::West, Leg::South},
}};

// Crosswalk leg per pedestrian movement. Table co-green patterns pin which
// turns each crossing shares a state with; this is the geometry that makes
// those patterns consistent (P2 spans the east leg, walking with the
// north-south throughs, and so on).
constexpr std::array<std::pair<int, Leg>, 4> kCrossings = {{
    {2, Leg::East},
    {4, Leg::North},
    {6, Leg::West},
    {8, Leg::South},
}};

// Hard conflicts between vehicle movements: crossing paths, plus a turn
// merging into a leg a through movement feeds.
constexpr std::array<std::pair<int, int>, 20> kVehicleConflicts = {{
    {1, 3}, {1, 4}, {1, 7}, {1, 8},
    {2, 3}, {2, 4}, {2, 7}, {2, 8}, {2, 18},
    {3, 5}, {3, 6},
    {4, 5}, {4, 6}, {4, 12},
    {5, 7}, {5, 8},
    {6, 7}, {6, 8}, {6, 14},
    {8, 16},
}};

// Permitted movements: each left yields to the opposing through.
constexpr std::array<std::pair<int, int>, 4> kLeftYields = {{
    {1, 2}, {5, 6}, {3, 4}, {7, 8},
}};

SignalColor color_from_char(char c) {
  switch (c) {
    case 'R': return SignalColor::Red;
    case 'G': return SignalColor::Green;
    case 'Y': return SignalColor::Yellow;
    default: throw MalformedTableError(std::string("unknown color code '") + c + "'");
  }
}

char color_to_char(SignalColor color) {
  switch (color) {
    case SignalColor::Red: return 'R';
    case SignalColor::Green: return 'G';
    case SignalColor::Yellow: return 'Y';
  }
  return '?';
}

} // namespace

std::string_view to_string(SignalColor color) {
  switch (color) {
    case SignalColor::Red: return "red";
    case SignalColor::Green: return "green";
    case SignalColor::Yellow: return "yellow";
  }
  return "?";
}

std::optional<SignalColor> signal_color_from(std::string_view text) {
  if (text == "red" || text == "R") return SignalColor::Red;
  if (text == "green" || text == "G") return SignalColor::Green;
  if (text == "yellow" || text == "Y") return SignalColor::Yellow;
  return std::nullopt;
}

std::string_view to_string(Approach approach) {
  switch (approach) {
    case Approach::NorthToSouth: return "N->S";
    case Approach::SouthToNorth: return "S->N";
    case Approach::EastToWest: return "E->W";
    case Approach::WestToEast: return "W->E";
  }
  return "?";
}

std::optional<MovementId> MovementId::parse(std::string_view text) {
  bool pedestrian = false;
  if (!text.empty() && (text.front() == 'P' || text.front() == 'p')) {
    pedestrian = true;
    text.remove_prefix(1);
  }
  int number = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), number);
  if (ec != std::errc{} || ptr != text.data() + text.size() || number <= 0) {
    return std::nullopt;
  }
  return pedestrian ? MovementId::pedestrian(number) : MovementId::vehicle(number);
}

std::string MovementId::str() const {
  return pedestrian_ ? "P" + std::to_string(number_) : std::to_string(number_);
}

bool Movement::major_street() const {
  return approach == Approach::NorthToSouth || approach == Approach::SouthToNorth;
}

ConflictMatrix::ConflictMatrix(std::vector<MovementId> movements)
    : movements_(std::move(movements)),
      relation_(movements_.size() * movements_.size(), Relation::Compatible),
      yields_(movements_.size() * movements_.size(), false) {}

bool ConflictMatrix::knows(MovementId id) const {
  return std::find(movements_.begin(), movements_.end(), id) != movements_.end();
}

std::size_t ConflictMatrix::index_of(MovementId id) const {
  auto it = std::find(movements_.begin(), movements_.end(), id);
  if (it == movements_.end()) {
    throw std::out_of_range("unknown movement id " + id.str());
  }
  return static_cast<std::size_t>(it - movements_.begin());
}

Relation ConflictMatrix::relation(MovementId a, MovementId b) const {
  return relation_[index_of(a) * movements_.size() + index_of(b)];
}

bool ConflictMatrix::yields_to(MovementId a, MovementId b) const {
  return yields_[index_of(a) * movements_.size() + index_of(b)];
}

std::vector<MovementId> ConflictMatrix::yield_targets(MovementId a) const {
  std::vector<MovementId> targets;
  const std::size_t row = index_of(a);
  for (std::size_t col = 0; col < movements_.size(); ++col) {
    if (yields_[row * movements_.size() + col]) {
      targets.push_back(movements_[col]);
    }
  }
  return targets;
}

void ConflictMatrix::set_conflict(MovementId a, MovementId b) {
  const std::size_t i = index_of(a);
  const std::size_t j = index_of(b);
  relation_[i * movements_.size() + j] = Relation::Conflict;
  relation_[j * movements_.size() + i] = Relation::Conflict;
}

void ConflictMatrix::set_yield(MovementId yielding, MovementId priority) {
  const std::size_t i = index_of(yielding);
  const std::size_t j = index_of(priority);
  relation_[i * movements_.size() + j] = Relation::Yield;
  relation_[j * movements_.size() + i] = Relation::Yield;
  yields_[i * movements_.size() + j] = true;
}

std::string_view to_string(Relation relation) {
  switch (relation) {
    case Relation::Compatible: return "compatible";
    case Relation::Conflict: return "conflict";
    case Relation::Yield: return "yield";
  }
  return "?";
}

const Movement* Intersection::find(MovementId id) const {
  for (const Movement& movement : movements) {
    if (movement.id == id) return &movement;
  }
  return nullptr;
}

Intersection build_standard_intersection() {
  std::vector<Movement> movements;
  movements.reserve(table_columns().size());
  for (MovementId id : table_columns()) {
    if (id.is_pedestrian()) {
      Leg leg = Leg::North;
      for (auto [number, crossing_leg] : kCrossings) {
        if (number == id.number()) leg = crossing_leg;
      }
      movements.push_back({id, MovementKind::Pedestrian, std::nullopt, leg, leg});
    } else {
      for (const VehicleDef& def : kVehicles) {
        if (def.number == id.number()) {
          movements.push_back({id, def.kind, def.approach, def.entry, def.exit});
        }
      }
    }
  }

  ConflictMatrix matrix(table_columns());
  for (auto [a, b] : kVehicleConflicts) {
    matrix.set_conflict(MovementId::vehicle(a), MovementId::vehicle(b));
  }
  for (auto [yielding, priority] : kLeftYields) {
    matrix.set_yield(MovementId::vehicle(yielding), MovementId::vehicle(priority));
  }

  // Vehicle/crosswalk relations follow from the legs: anything entering over
  // a crosswalk conflicts with it, a through leaving over one conflicts too,
  // and a turn leaving over one is permitted but yields.
  for (const Movement& movement : movements) {
    if (movement.kind == MovementKind::Pedestrian) continue;
    for (auto [number, leg] : kCrossings) {
      const MovementId crossing = MovementId::pedestrian(number);
      if (movement.entry_leg == leg) {
        matrix.set_conflict(movement.id, crossing);
      } else if (movement.exit_leg == leg) {
        if (movement.kind == MovementKind::VehicleThrough) {
          matrix.set_conflict(movement.id, crossing);
        } else {
          matrix.set_yield(movement.id, crossing);
        }
      }
    }
  }

  return Intersection{std::move(movements), std::move(matrix)};
}

const Intersection& standard_intersection() {
  static const Intersection intersection = build_standard_intersection();
  return intersection;
}

SignalColor PhaseState::color_of(MovementId id) const {
  auto it = colors.find(id);
  if (it == colors.end()) {
    throw std::out_of_range("movement " + id.str() + " not in state " +
                            std::to_string(state_id));
  }
  return it->second;
}

const std::vector<PhaseState>& standard_phase_table() {
  static const std::vector<PhaseState> table = [] {
    std::vector<PhaseState> states;
    states.reserve(kStateRows.size());
    for (std::size_t row = 0; row < kStateRows.size(); ++row) {
      PhaseState state;
      state.state_id = static_cast<int>(row) + 1;
      const char* cells = kStateRows[row];
      for (std::size_t col = 0; col < table_columns().size(); ++col) {
        state.colors[table_columns()[col]] = color_from_char(cells[col]);
      }
      states.push_back(std::move(state));
    }
    return states;
  }();
  return table;
}

ValidationReport validate_phase_table(const std::vector<PhaseState>& table,
                                      const ConflictMatrix& matrix) {
  if (table.empty()) {
    throw MalformedTableError("phase table is empty");
  }
  const auto& movements = matrix.movements();
  for (const PhaseState& state : table) {
    for (const auto& [id, color] : state.colors) {
      (void)color;
      if (!matrix.knows(id)) {
        throw MalformedTableError("state " + std::to_string(state.state_id) +
                                  " colors unknown movement " + id.str());
      }
    }
    for (MovementId id : movements) {
      if (!state.colors.contains(id)) {
        throw MalformedTableError("state " + std::to_string(state.state_id) +
                                  " missing movement " + id.str());
      }
    }
  }

  ValidationReport report;
  for (const PhaseState& state : table) {
    for (std::size_t i = 0; i < movements.size(); ++i) {
      const SignalColor color_a = state.color_of(movements[i]);
      if (color_a == SignalColor::Red) continue;
      for (std::size_t j = i + 1; j < movements.size(); ++j) {
        const SignalColor color_b = state.color_of(movements[j]);
        if (color_b == SignalColor::Red) continue;
        if (matrix.relation(movements[i], movements[j]) == Relation::Conflict) {
          report.findings.push_back(
              {state.state_id, movements[i], movements[j], color_a, color_b});
        }
      }
    }
  }
  return report;
}

std::string_view to_string(DisplayState display) {
  switch (display) {
    case DisplayState::Red: return "red";
    case DisplayState::Green: return "green";
    case DisplayState::Yellow: return "yellow";
    case DisplayState::GreenYieldCrosswalk: return "green-yield-crosswalk";
    case DisplayState::CautionAnomaly: return "caution-anomaly";
  }
  return "?";
}

DisplayState display_state_for(MovementId movement, const PhaseState& phase,
                               const ConflictMatrix& matrix, bool link_ok) {
  if (!link_ok) {
    return DisplayState::CautionAnomaly;
  }
  const SignalColor color = phase.color_of(movement); // throws on unknown id
  switch (color) {
    case SignalColor::Red:
      return DisplayState::Red;
    case SignalColor::Yellow:
      return DisplayState::Yellow;
    case SignalColor::Green:
      for (MovementId target : matrix.yield_targets(movement)) {
        if (target.is_pedestrian() &&
            phase.color_of(target) == SignalColor::Green) {
          return DisplayState::GreenYieldCrosswalk;
        }
      }
      return DisplayState::Green;
  }
  return DisplayState::Red;
}

std::string phase_table_to_text(const std::vector<PhaseState>& table,
                                const std::vector<MovementId>& columns) {
  std::ostringstream out;
  out << "# phase table: one row per state, colors R/G/Y per movement column\n";
  out << "state";
  for (MovementId id : columns) {
    out << ' ' << id.str();
  }
  out << '\n';
  for (const PhaseState& state : table) {
    out << state.state_id;
    for (MovementId id : columns) {
      out << ' ' << color_to_char(state.color_of(id));
    }
    out << '\n';
  }
  return out.str();
}

std::vector<PhaseState> phase_table_from_text(std::istream& in) {
  std::vector<MovementId> columns;
  std::vector<PhaseState> table;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue; // blank line

    if (!header_seen) {
      if (first != "state") {
        throw MalformedTableError("line " + std::to_string(line_no) +
                                  ": expected header starting with 'state'");
      }
      std::string name;
      while (fields >> name) {
        auto id = MovementId::parse(name);
        if (!id) {
          throw MalformedTableError("line " + std::to_string(line_no) +
                                    ": bad movement id '" + name + "'");
        }
        columns.push_back(*id);
      }
      if (columns.empty()) {
        throw MalformedTableError("header names no movement columns");
      }
      header_seen = true;
      continue;
    }

    PhaseState state;
    try {
      state.state_id = std::stoi(first);
    } catch (const std::exception&) {
      throw MalformedTableError("line " + std::to_string(line_no) +
                                ": bad state id '" + first + "'");
    }
    std::string cell;
    std::size_t col = 0;
    while (fields >> cell) {
      if (col >= columns.size()) {
        throw MalformedTableError("line " + std::to_string(line_no) +
                                  ": more colors than columns");
      }
      auto color = signal_color_from(cell);
      if (!color) {
        throw MalformedTableError("line " + std::to_string(line_no) +
                                  ": bad color code '" + cell + "'");
      }
      state.colors[columns[col]] = *color;
      ++col;
    }
    if (col != columns.size()) {
      throw MalformedTableError("line " + std::to_string(line_no) +
                                ": row has " + std::to_string(col) + " colors, expected " +
                                std::to_string(columns.size()));
    }
    table.push_back(std::move(state));
  }
  if (!header_seen || table.empty()) {
    throw MalformedTableError("phase table text has no states");
  }
  return table;
}

std::vector<PhaseState> phase_table_from_text(const std::string& text) {
  std::istringstream in(text);
  return phase_table_from_text(in);
}

} // namespace vtl
