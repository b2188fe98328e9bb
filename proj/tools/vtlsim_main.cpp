#include "vtl/metrics.hpp"
#include "vtl/scenario_io.hpp"
#include "vtl/simengine.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

namespace fs = std::filesystem;

// Exit codes beyond CLI11's own usage errors.
constexpr int kExitOk = 0;
constexpr int kExitMissingInput = 3;
constexpr int kExitInvalidScenario = 4;
constexpr int kExitUnwritableOutput = 5;
constexpr int kExitMalformedTrace = 6;
constexpr int kExitUnknownName = 7;

constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  3  input file missing or unreadable\n"
    "  4  scenario invalid (parse or validation failure)\n"
    "  5  output directory not writable\n"
    "  6  trace CSV malformed\n"
    "  7  unknown node or sweep parameter\n";

struct Failure {
  int code;
  std::string message;
};

vtl::Scenario load_or_fail(const fs::path& path, std::optional<std::uint64_t> seed) {
  if (!fs::exists(path)) {
    throw Failure{kExitMissingInput, "scenario file not found: " + path.string()};
  }
  vtl::Scenario scenario;
  try {
    scenario = vtl::load_scenario(path);
  } catch (const vtl::ScenarioParseError& error) {
    throw Failure{kExitInvalidScenario, error.what()};
  } catch (const std::exception& error) {
    throw Failure{kExitMissingInput, error.what()};
  }
  if (seed) {
    scenario.seed = *seed;
  }
  const auto violations = scenario.validate();
  if (!violations.empty()) {
    std::string message = "scenario " + path.string() + " is invalid:";
    for (const auto& violation : violations) message += "\n  - " + violation;
    throw Failure{kExitInvalidScenario, message};
  }
  return scenario;
}

void ensure_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Failure{kExitUnwritableOutput, "cannot create output directory " + dir.string()};
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Failure{kExitUnwritableOutput, "cannot write " + path.string()};
  }
  out << content;
  if (!out) {
    throw Failure{kExitUnwritableOutput, "write failed for " + path.string()};
  }
}

vtl::Trace read_trace_or_fail(const fs::path& path) {
  if (!fs::exists(path)) {
    throw Failure{kExitMissingInput, "trace file not found: " + path.string()};
  }
  try {
    return vtl::Trace::read_csv_file(path);
  } catch (const vtl::TraceParseError& error) {
    throw Failure{kExitMalformedTrace, error.what()};
  } catch (const std::exception& error) {
    throw Failure{kExitMissingInput, error.what()};
  }
}

vtl::SweepSpec parse_sweep_flag(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 >= text.size()) {
    throw Failure{kExitUnknownName, "--sweep expects <parameter>=<v1,v2,...>"};
  }
  vtl::SweepSpec spec;
  spec.parameter = text.substr(0, eq);
  std::string values = text.substr(eq + 1);
  std::size_t start = 0;
  while (start <= values.size()) {
    std::size_t end = values.find(',', start);
    if (end == std::string::npos) end = values.size();
    const std::string word = values.substr(start, end - start);
    if (!word.empty()) {
      try {
        spec.values.push_back(std::stod(word));
      } catch (const std::exception&) {
        throw Failure{kExitUnknownName, "bad sweep value '" + word + "'"};
      }
    }
    if (end == values.size()) break;
    start = end + 1;
  }
  return spec;
}

int run_command(const fs::path& scenario_path, const fs::path& out_dir,
                std::optional<std::uint64_t> seed) {
  const vtl::Scenario scenario = load_or_fail(scenario_path, seed);
  ensure_output_dir(out_dir);
  const vtl::Trace trace = vtl::run(scenario);
  const vtl::MetricsReport report = vtl::compute_metrics(trace);
  write_file(out_dir / "trace.csv", trace.to_csv());
  write_file(out_dir / "metrics.csv", report.to_csv());
  write_file(out_dir / "summary.txt", report.summary_text());
  std::cout << report.summary_text();
  std::cout << "wrote " << (out_dir / "trace.csv").string() << ", metrics.csv, summary.txt\n";
  return kExitOk;
}

bool position_parameter(const std::string& parameter) {
  return parameter.size() > 2 &&
         (parameter.ends_with(".x") || parameter.ends_with(".y"));
}

int sweep_command(const fs::path& scenario_path, const fs::path& out_dir,
                  std::optional<std::uint64_t> seed,
                  const std::string& sweep_flag) {
  vtl::Scenario scenario = load_or_fail(scenario_path, seed);
  vtl::SweepSpec spec;
  if (!sweep_flag.empty()) {
    spec = parse_sweep_flag(sweep_flag);
  } else if (scenario.sweep) {
    spec = *scenario.sweep;
  } else {
    throw Failure{kExitUnknownName,
                  "no sweep given: pass --sweep or add a [sweep] section"};
  }
  if (spec.values.empty()) {
    throw Failure{kExitUnknownName, "sweep has no values"};
  }
  ensure_output_dir(out_dir);

  std::vector<std::pair<double, vtl::Trace>> results;
  try {
    results = vtl::sweep(scenario, spec.parameter, spec.values);
  } catch (const vtl::UnknownParameterError& error) {
    throw Failure{kExitUnknownName, error.what()};
  }

  std::ostringstream summary;
  summary << "parameter,value,node,psr,rx_ok,addressed,update_count,"
             "update_mean_us,update_median_us,update_max_us\n";
  for (const auto& [value, trace] : results) {
    const std::string label = vtl::sweep_value_label(value);
    const fs::path trace_path =
        out_dir / ("trace_" + spec.parameter + "_" + label + ".csv");
    write_file(trace_path, trace.to_csv());
    const vtl::MetricsReport report = vtl::compute_metrics(trace);
    for (const auto& [node, metrics] : report.nodes) {
      if (metrics.addressed() == 0) continue; // pure transmitters
      const vtl::IntervalStats stats = metrics.intervals();
      char psr_text[32];
      std::snprintf(psr_text, sizeof(psr_text), "%.6f", metrics.psr());
      summary << spec.parameter << ',' << label << ',' << node << ',' << psr_text
              << ',' << metrics.rx_ok << ',' << metrics.addressed() << ','
              << metrics.update_intervals_us.size() << ',' << stats.mean_us << ','
              << stats.median_us << ',' << stats.max_us << '\n';
    }
  }
  const std::string summary_name =
      position_parameter(spec.parameter) ? "psr_vs_distance.csv" : "sweep_summary.csv";
  write_file(out_dir / summary_name, summary.str());
  std::cout << "wrote " << results.size() << " trace files and " << summary_name
            << " under " << out_dir.string() << "\n";
  return kExitOk;
}

int metrics_command(const fs::path& trace_path, const fs::path& out_dir) {
  const vtl::Trace trace = read_trace_or_fail(trace_path);
  const vtl::MetricsReport report = vtl::compute_metrics(trace);
  ensure_output_dir(out_dir);
  write_file(out_dir / "metrics.csv", report.to_csv());
  write_file(out_dir / "summary.txt", report.summary_text());
  std::cout << report.summary_text();
  return kExitOk;
}

int compare_command(const fs::path& trace_path, const std::string& node_a,
                    const std::string& node_b) {
  const vtl::Trace trace = read_trace_or_fail(trace_path);
  const vtl::MetricsReport report = vtl::compute_metrics(trace);
  vtl::ReceiverComparison comparison;
  try {
    comparison = vtl::compare_receivers(report, node_a, node_b);
  } catch (const std::invalid_argument& error) {
    throw Failure{kExitUnknownName, error.what()};
  }
  std::cout << "rx_ok: " << comparison.node_a << "=" << comparison.rx_ok_a << " "
            << comparison.node_b << "=" << comparison.rx_ok_b
            << " ratio=" << comparison.rx_ok_ratio << "\n";
  std::cout << "mean update interval (us): " << comparison.node_a << "="
            << comparison.mean_interval_a_us << " " << comparison.node_b << "="
            << comparison.mean_interval_b_us
            << " diff=" << comparison.mean_interval_diff_us << "\n";
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"vtlsim - virtual traffic light protocol simulator"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  std::string trace_path;
  std::string sweep_flag;
  std::string node_a;
  std::string node_b;
  std::optional<std::uint64_t> seed;

  CLI::App* cmd_run = app.add_subcommand("run", "run a scenario and write trace + metrics");
  cmd_run->add_option("--scenario", scenario_path, "scenario file")->required();
  cmd_run->add_option("--out", out_dir, "output directory");
  cmd_run->add_option("--seed", seed, "override the scenario seed");

  CLI::App* cmd_sweep = app.add_subcommand("sweep", "run one trace per parameter value");
  cmd_sweep->add_option("--scenario", scenario_path, "scenario file")->required();
  cmd_sweep->add_option("--out", out_dir, "output directory");
  cmd_sweep->add_option("--seed", seed, "override the scenario seed");
  cmd_sweep->add_option("--sweep", sweep_flag,
                        "<parameter>=<v1,v2,...> (defaults to the scenario's [sweep])");

  CLI::App* cmd_metrics = app.add_subcommand("metrics", "recompute metrics from a trace CSV");
  cmd_metrics->add_option("--trace", trace_path, "trace CSV file")->required();
  cmd_metrics->add_option("--out", out_dir, "output directory");

  CLI::App* cmd_compare = app.add_subcommand("compare", "compare two receivers in a trace");
  cmd_compare->add_option("--trace", trace_path, "trace CSV file")->required();
  cmd_compare->add_option("--node-a", node_a, "first node id")->required();
  cmd_compare->add_option("--node-b", node_b, "second node id")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      return run_command(scenario_path, out_dir, seed);
    }
    if (cmd_sweep->parsed()) {
      return sweep_command(scenario_path, out_dir, seed, sweep_flag);
    }
    if (cmd_metrics->parsed()) {
      return metrics_command(trace_path, out_dir);
    }
    if (cmd_compare->parsed()) {
      return compare_command(trace_path, node_a, node_b);
    }
  } catch (const Failure& failure) {
    std::cerr << "error: " << failure.message << "\n";
    return failure.code;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return kExitOk;
}
