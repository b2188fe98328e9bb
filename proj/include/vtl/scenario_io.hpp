#pragma once

#include "vtl/simengine.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace vtl {

struct ScenarioParseError : std::runtime_error {
  ScenarioParseError(std::size_t line, const std::string& what);

  std::size_t line = 0;
};

// Parses the sectioned scenario text format (see docs/formats.md).
// `base_dir` anchors relative paths referenced by the scenario (PSR tables,
// phase tables).
Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);

} // namespace vtl
