#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rumourlab/lattice.hpp"

namespace rumourlab {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Subcommand { exact, simulate, scan, diagnose, continuum };

std::string to_string(Subcommand s);
Subcommand parse_subcommand(std::string_view text);

// Everything that determines a run's output. Worker count is deliberately
// absent: results do not depend on it.
struct ExperimentSpec {
  Subcommand subcommand = Subcommand::exact;

  // lattice / exact
  int dimension = 1;
  Model model = Model::firework;
  std::string dist = "pareto:alpha=4";
  std::vector<double> p{0.5};
  unsigned k = 2;
  std::int64_t n = 100;
  std::int64_t cushion = 10;
  std::uint64_t trials = 1000;
  std::vector<Site> sites;
  bool include_initiators = false;
  std::uint64_t seed = 0;

  // exact
  std::vector<std::string> methods{"dp"};
  bool allow_paper_formula_divergence = false;

  // scan
  std::string param = "p";  // p | beta | lambda
  std::vector<double> grid;
  std::string stat;  // empty: default for the parameter

  // diagnose
  std::int64_t i_min = 1;
  std::int64_t i_max = 1024;

  // continuum
  std::string law = "pareto:alpha=4";
  double window_t = 1000.0;
  double resolution = 1.0;
  std::vector<double> lambda{1.0};

  // outputs
  std::string out;  // path prefix; empty writes CSV/JSON to stdout
  bool csv = false;
  bool json = false;
  bool svg = false;
  bool timing = false;

  bool operator==(const ExperimentSpec&) const = default;
};

nlohmann::ordered_json to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const nlohmann::ordered_json& j);

// Rejects inconsistent combinations before any work is done.
void validate(const ExperimentSpec& spec);

// Table cell. NaN doubles compare equal to each other.
struct Cell {
  std::variant<std::int64_t, double, std::string> value;

  Cell() = default;
  Cell(std::int64_t v) : value(v) {}
  Cell(double v) : value(v) {}
  Cell(std::string v) : value(std::move(v)) {}

  bool operator==(const Cell& other) const;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::string version{kToolVersion};
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::uint64_t clamp_count = 0;
  std::optional<double> wall_time_ms;  // set only with spec.timing
  std::vector<std::string> divergences;

  bool operator==(const ExperimentResult&) const = default;
};

ExperimentResult run_exact(const ExperimentSpec& spec);
ExperimentResult run_simulate(const ExperimentSpec& spec, unsigned workers = 1);
ExperimentResult run_scan(const ExperimentSpec& spec, unsigned workers = 1);
ExperimentResult run_diagnose(const ExperimentSpec& spec);
ExperimentResult run_continuum(const ExperimentSpec& spec, unsigned workers = 1);

/// Validates, dispatches on spec.subcommand and fills wall_time_ms when
/// requested.
ExperimentResult run(const ExperimentSpec& spec, unsigned workers = 1);

/// True when any divergence other than a printed-formula one is present, or
/// a printed-formula one is present without the allow flag.
bool divergence_is_fatal(const ExperimentResult& result);

// "1,2,3" in 1D, "2,2;3,1" in 2D.
std::vector<Site> parse_sites(std::string_view text, int dimension);
std::vector<double> parse_double_list(std::string_view text);

}  // namespace rumourlab
