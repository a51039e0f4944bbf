// rumourlab: exact probabilities, lattice simulation, scans, series
// diagnostics and continuum coverage from the command line.
//
// Exit codes: 0 success, 2 parse/validation, 3 numeric divergence, 4 I/O.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "rumourlab/error.hpp"
#include "rumourlab/experiment.hpp"
#include "rumourlab/format.hpp"
#include "rumourlab/report.hpp"

using namespace rumourlab;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

bool uses_randomness(const ExperimentSpec& s) {
  switch (s.subcommand) {
    case Subcommand::simulate:
    case Subcommand::continuum: return true;
    case Subcommand::scan: return s.stat != "growthRatio";
    default: return false;
  }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, bool strict, bool needed) {
  if (flag) return *flag;
  if (const char* env = std::getenv("RUMOURLAB_SEED")) {
    std::uint64_t seed = 0;
    if (!parse_u64(env, seed)) throw ParseError(std::string("RUMOURLAB_SEED is not a u64: '") + env + "'");
    return seed;
  }
  if (!needed) return 0;
  if (strict) throw ValidationError("--strict: no --seed given and RUMOURLAB_SEED unset");
  std::random_device rd;
  const std::uint64_t seed = (std::uint64_t{rd()} << 32) ^ rd();
  std::cerr << "rumourlab: no seed given, using --seed " << seed << "\n";
  return seed;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read '" + path + "'");
  nlohmann::ordered_json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
  // Accept either a bare spec or a full result with its spec echo.
  return spec_from_json(j.contains("spec") ? j.at("spec") : j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sceptic rumour propagation and k-fold coverage experiments"};
  app.set_version_flag("--version", std::string(kToolVersion));

  ExperimentSpec spec;
  std::string command, model = "firework", p_list = "0.5", sites, methods = "dp", grid, lambdas = "1";
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  bool strict = false;
  std::string from_spec;

  app.add_option("command", command, "exact | simulate | scan | diagnose | continuum")
      ->required()
      ->check(CLI::IsMember({"exact", "simulate", "scan", "diagnose", "continuum"}));
  app.add_option("--dim", spec.dimension, "Lattice / space dimension")->check(CLI::IsMember({1, 2}));
  app.add_option("--model", model, "firework | reverse")->check(CLI::IsMember({"firework", "reverse"}));
  app.add_option("--dist", spec.dist, "Radius law, e.g. pareto:alpha=4, trunc:geom:q=0.5:cap=6");
  app.add_option("--p", p_list, "Activation probability (comma list)");
  app.add_option("--k", spec.k, "Scepticism threshold");
  app.add_option("--n", spec.n, "Reported window per axis");
  app.add_option("--cushion", spec.cushion, "Reverse-model oversampling factor");
  app.add_option("--trials", spec.trials, "Monte Carlo trials");
  app.add_option("--sites", sites, "Sites: 1,2,3 (1D) or 2,2;3,1 (2D)");
  app.add_flag("--initiators", spec.include_initiators, "Add the two always-open initiator sites");
  app.add_option("--seed", seed, "Base seed (fallback: RUMOURLAB_SEED)");
  app.add_option("--workers", workers, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
  app.add_option("--method", methods, "exact: dp,closedForm,paperEq11,oracle (comma list)");
  app.add_flag("--allow-paper-formula-divergence", spec.allow_paper_formula_divergence,
               "Do not fail when paperEq11 disagrees with dp");
  app.add_option("--param", spec.param, "scan parameter: p | beta | lambda");
  app.add_option("--grid", grid, "scan grid (comma list)");
  app.add_option("--stat", spec.stat, "scan statistic: depth | coveredFraction | diagonalCovered | growthRatio");
  app.add_option("--imin", spec.i_min, "diagnose / growthRatio: first i");
  app.add_option("--imax", spec.i_max, "diagnose / growthRatio: last i");
  app.add_option("--law", spec.law, "Continuum radius law: pareto:alpha= | power:beta= | const:r=");
  app.add_option("--window-t", spec.window_t, "Continuum window side T");
  app.add_option("--resolution", spec.resolution, "Continuum 2D pixel side");
  app.add_option("--lambda", lambdas, "Continuum intensities (comma list)");
  app.add_option("--out", spec.out, "Output path prefix (.csv/.json/.svg appended)");
  app.add_flag("--csv", spec.csv, "Write CSV (default when no format is chosen)");
  app.add_flag("--json", spec.json, "Write JSON");
  app.add_flag("--svg", spec.svg, "Write an SVG plot (needs --out)");
  app.add_flag("--timing", spec.timing, "Record wall time in the JSON output");
  app.add_flag("--strict", strict, "Require an explicit seed");
  app.add_option("--from-spec", from_spec, "Rerun the spec echoed in a JSON result");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (!from_spec.empty()) {
      spec = load_spec(from_spec);
      spec.subcommand = parse_subcommand(command);
    } else {
      spec.subcommand = parse_subcommand(command);
      spec.model = parse_model(model);
      spec.p = parse_double_list(p_list);
      spec.sites = parse_sites(sites, spec.dimension);
      spec.methods.clear();
      for (const auto& m : CLI::detail::split(methods, ',')) spec.methods.push_back(m);
      if (!grid.empty()) spec.grid = parse_double_list(grid);
      spec.lambda = parse_double_list(lambdas);
      spec.seed = resolve_seed(seed, strict, uses_randomness(spec));
    }

    const ExperimentResult result = run(spec, workers);
    emit_outputs(result);
    for (const auto& d : result.divergences) std::cerr << "divergence: " << d << "\n";
    if (divergence_is_fatal(result)) return kExitDivergence;
    return 0;
  } catch (const IoError& e) {
    std::cerr << "rumourlab: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericDivergenceError& e) {
    std::cerr << "rumourlab: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const DivisionByZeroError& e) {
    std::cerr << "rumourlab: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const Error& e) {
    std::cerr << "rumourlab: " << e.what() << "\n";
    return kExitValidation;
  }
}
