#include "vtl/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace vtl {

namespace {

struct Line {
  std::size_t number = 0;
  std::string text;
};

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ScenarioParseError(line, what);
}

double to_double(const Line& line, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) fail(line.number, "bad number '" + value + "'");
    return parsed;
  } catch (const ScenarioParseError&) {
    throw;
  } catch (const std::exception&) {
    fail(line.number, "bad number '" + value + "'");
  }
}

std::uint64_t to_u64(const Line& line, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::uint64_t parsed = std::stoull(value, &used, 0);
    if (used != value.size()) fail(line.number, "bad integer '" + value + "'");
    return parsed;
  } catch (const ScenarioParseError&) {
    throw;
  } catch (const std::exception&) {
    fail(line.number, "bad integer '" + value + "'");
  }
}

SimTime ms_value_to_us(const Line& line, const std::string& value) {
  return static_cast<SimTime>(std::llround(to_double(line, value) * 1000.0));
}

std::vector<std::string> split_words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> words;
  std::string word;
  while (in >> word) words.push_back(word);
  return words;
}

Trajectory parse_trajectory(const Line& line, const std::string& value) {
  const std::vector<std::string> words = split_words(value);
  if (words.empty()) fail(line.number, "empty trajectory");
  if (words[0] == "linear") {
    if (words.size() != 5 && words.size() != 6) {
      fail(line.number, "trajectory = linear x0 y0 vx vy [start_s]");
    }
    const Position start{to_double(line, words[1]), to_double(line, words[2])};
    const double vx = to_double(line, words[3]);
    const double vy = to_double(line, words[4]);
    SimTime start_time = 0;
    if (words.size() == 6) {
      start_time = static_cast<SimTime>(std::llround(to_double(line, words[5]) * 1e6));
    }
    if (start_time > 0) {
      fail(line.number, "scenario trajectories must start at or before t=0");
    }
    return Trajectory::linear(start, vx, vy, start_time);
  }
  fail(line.number, "unknown trajectory kind '" + words[0] + "'");
}

Position parse_position(const Line& line, const std::string& value) {
  const std::vector<std::string> words = split_words(value);
  if (words.size() != 2) fail(line.number, "position = x y");
  return {to_double(line, words[0]), to_double(line, words[1])};
}

// One parsed [section] with its key/value lines.
struct Section {
  std::size_t line = 0;
  std::string name;       // e.g. "receiver", "link"
  std::string argument;   // remainder of the header, e.g. "ctrl -> rtx1"
  std::vector<std::pair<Line, std::pair<std::string, std::string>>> entries;
};

class CurveBuilder {
public:
  void set(const Line& line, const std::string& key, const std::string& value,
           const std::filesystem::path& base_dir) {
    if (key == "model") {
      model_ = value;
    } else if (key == "p_max") {
      p_max_ = to_double(line, value);
    } else if (key == "d_mid_m") {
      d_mid_ = to_double(line, value);
    } else if (key == "steepness_per_m") {
      steepness_ = to_double(line, value);
    } else if (key == "psr") {
      psr_ = to_double(line, value);
    } else if (key == "file") {
      file_ = base_dir / value;
    } else {
      fail(line.number, "unknown channel key '" + key + "'");
    }
    line_ = line.number;
  }

  PsrCurve build() const {
    try {
      if (model_ == "logistic") return PsrCurve::logistic(p_max_, d_mid_, steepness_);
      if (model_ == "constant") return PsrCurve::constant(psr_);
      if (model_ == "table") return PsrCurve::from_table_file(file_);
    } catch (const std::exception& error) {
      fail(line_, std::string("channel: ") + error.what());
    }
    fail(line_, "unknown channel model '" + model_ + "'");
  }

private:
  std::string model_ = "logistic";
  double p_max_ = 1.0;
  double d_mid_ = 71.5;
  double steepness_ = 0.15;
  double psr_ = 1.0;
  std::filesystem::path file_;
  std::size_t line_ = 0;
};

std::vector<PhaseState> load_phase_table_file(const Line& line,
                                              const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(line.number, "cannot open phase table file " + path.string());
  try {
    return phase_table_from_text(in);
  } catch (const MalformedTableError& error) {
    fail(line.number, std::string("phase table: ") + error.what());
  }
}

} // namespace

ScenarioParseError::ScenarioParseError(std::size_t line_no, const std::string& what)
    : std::runtime_error("scenario line " + std::to_string(line_no) + ": " + what),
      line(line_no) {}

Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir) {
  std::vector<Section> sections;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string text = trim(raw);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') fail(line_no, "unterminated section header");
      const std::string header = trim(text.substr(1, text.size() - 2));
      const auto space = header.find_first_of(" \t");
      Section section;
      section.line = line_no;
      section.name = space == std::string::npos ? header : header.substr(0, space);
      section.argument = space == std::string::npos ? "" : trim(header.substr(space));
      sections.push_back(std::move(section));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
    if (sections.empty()) fail(line_no, "key/value outside any [section]");
    sections.back().entries.push_back(
        {{line_no, text},
         {trim(text.substr(0, eq)), trim(text.substr(eq + 1))}});
  }

  Scenario scenario;
  scenario.duration_us = s_to_us(10);
  bool controller_seen = false;
  std::optional<SimTime> controller_period;
  // Retransmitter periods default to the controller's; resolve at the end.
  std::vector<std::size_t> retransmitters_without_period;

  for (const Section& section : sections) {
    if (section.name == "run") {
      for (const auto& [line, kv] : section.entries) {
        const auto& [key, value] = kv;
        if (key == "name") scenario.name = value;
        else if (key == "duration_s") {
          scenario.duration_us = static_cast<SimTime>(std::llround(to_double(line, value) * 1e6));
        } else if (key == "seed") {
          scenario.seed = to_u64(line, value);
        } else {
          fail(line.number, "unknown run key '" + key + "'");
        }
      }
    } else if (section.name == "channel") {
      CurveBuilder builder;
      for (const auto& [line, kv] : section.entries) {
        builder.set(line, kv.first, kv.second, base_dir);
      }
      scenario.channel = builder.build();
    } else if (section.name == "link") {
      const std::string& spec = section.argument;
      const auto arrow = spec.find("->");
      if (arrow == std::string::npos) {
        fail(section.line, "link header is [link <tx> -> <rx>]");
      }
      const NodeId tx = trim(spec.substr(0, arrow));
      const NodeId rx = trim(spec.substr(arrow + 2));
      if (tx.empty() || rx.empty()) {
        fail(section.line, "link header is [link <tx> -> <rx>]");
      }
      CurveBuilder builder;
      for (const auto& [line, kv] : section.entries) {
        builder.set(line, kv.first, kv.second, base_dir);
      }
      scenario.link_overrides.insert_or_assign({tx, rx}, builder.build());
    } else if (section.name == "controller") {
      if (controller_seen) fail(section.line, "only one [controller] section is allowed");
      controller_seen = true;
      ControllerSpec& spec = scenario.controller;
      for (const auto& [line, kv] : section.entries) {
        const auto& [key, value] = kv;
        if (key == "id") spec.config.source_id = value;
        else if (key == "position") spec.trajectory = Trajectory::fixed(parse_position(line, value));
        else if (key == "trajectory") spec.trajectory = parse_trajectory(line, value);
        else if (key == "state_period_ms") spec.config.state_period_us = ms_value_to_us(line, value);
        else if (key == "advertising_interval_ms") spec.config.advertising_interval_us = ms_value_to_us(line, value);
        else if (key == "advertising_jitter_ms") spec.config.advertising_jitter_us = ms_value_to_us(line, value);
        else if (key == "state_periods_ms") {
          spec.config.state_periods_us.clear();
          for (const std::string& word : split_words(value)) {
            spec.config.state_periods_us.push_back(ms_value_to_us(line, word));
          }
        } else if (key == "phase_table") {
          spec.config.phase_table = load_phase_table_file(line, base_dir / value);
        } else {
          fail(line.number, "unknown controller key '" + key + "'");
        }
      }
      controller_period = spec.config.state_period_us;
    } else if (section.name == "retransmitter") {
      RetransmitterSpec spec;
      bool period_given = false;
      for (const auto& [line, kv] : section.entries) {
        const auto& [key, value] = kv;
        if (key == "id") spec.config.node_id = value;
        else if (key == "tag") spec.config.tag = static_cast<std::uint8_t>(to_u64(line, value));
        else if (key == "listens_to") spec.config.controller_source_id = value;
        else if (key == "position") spec.trajectory = Trajectory::fixed(parse_position(line, value));
        else if (key == "trajectory") spec.trajectory = parse_trajectory(line, value);
        else if (key == "controller_period_ms") {
          spec.config.controller_period_us = ms_value_to_us(line, value);
          period_given = true;
        } else if (key == "advertising_interval_ms") spec.config.advertising_interval_us = ms_value_to_us(line, value);
        else if (key == "advertising_jitter_ms") spec.config.advertising_jitter_us = ms_value_to_us(line, value);
        else if (key == "start_offset_ms") spec.config.start_offset_us = ms_value_to_us(line, value);
        else fail(line.number, "unknown retransmitter key '" + key + "'");
      }
      if (!period_given) {
        retransmitters_without_period.push_back(scenario.retransmitters.size());
      }
      scenario.retransmitters.push_back(std::move(spec));
    } else if (section.name == "receiver") {
      ReceiverSpec spec;
      for (const auto& [line, kv] : section.entries) {
        const auto& [key, value] = kv;
        if (key == "id") spec.config.node_id = value;
        else if (key == "attach") spec.attach = value;
        else if (key == "movement") {
          const auto id = MovementId::parse(value);
          if (!id) fail(line.number, "bad movement id '" + value + "'");
          spec.config.movement_of_interest = *id;
        }
        else if (key == "position") spec.trajectory = Trajectory::fixed(parse_position(line, value));
        else if (key == "trajectory") spec.trajectory = parse_trajectory(line, value);
        else if (key == "scan_window_ms") spec.config.scan_window_us = ms_value_to_us(line, value);
        else if (key == "scan_interval_ms") spec.config.scan_interval_us = ms_value_to_us(line, value);
        else if (key == "duty_cycle") {
          if (to_double(line, value) != 1.0) {
            fail(line.number, "duty_cycle accepts only the shorthand 1.0; "
                              "set scan_window_ms/scan_interval_ms otherwise");
          }
          spec.config.scan_window_us = spec.config.scan_interval_us;
        }
        else if (key == "staleness_timeout_ms") spec.config.staleness_timeout_us = ms_value_to_us(line, value);
        else fail(line.number, "unknown receiver key '" + key + "'");
      }
      scenario.receivers.push_back(std::move(spec));
    } else if (section.name == "sweep") {
      SweepSpec sweep_spec;
      for (const auto& [line, kv] : section.entries) {
        const auto& [key, value] = kv;
        if (key == "parameter") sweep_spec.parameter = value;
        else if (key == "values") {
          for (const std::string& word : split_words(value)) {
            sweep_spec.values.push_back(to_double(line, word));
          }
        } else {
          fail(line.number, "unknown sweep key '" + key + "'");
        }
      }
      if (sweep_spec.parameter.empty()) fail(section.line, "sweep needs a parameter");
      scenario.sweep = std::move(sweep_spec);
    } else {
      fail(section.line, "unknown section [" + section.name + "]");
    }
  }

  if (!controller_seen) {
    throw ScenarioParseError(line_no, "scenario has no [controller] section");
  }
  for (std::size_t index : retransmitters_without_period) {
    scenario.retransmitters[index].config.controller_period_us = *controller_period;
  }
  for (auto& spec : scenario.retransmitters) {
    if (spec.config.controller_source_id == "controller" &&
        scenario.controller.config.source_id != "controller") {
      spec.config.controller_source_id = scenario.controller.config.source_id;
    }
  }
  return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open scenario file " + path.string());
  }
  Scenario scenario = parse_scenario(in, path.parent_path().empty()
                                             ? std::filesystem::path(".")
                                             : path.parent_path());
  if (scenario.name == "scenario") {
    scenario.name = path.stem().string();
  }
  return scenario;
}

} // namespace vtl
