#include "rumourlab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "rumourlab/continuum.hpp"
#include "rumourlab/error.hpp"
#include "rumourlab/exact.hpp"
#include "rumourlab/format.hpp"
#include "rumourlab/parallel.hpp"

namespace rumourlab {

namespace {

using json = nlohmann::ordered_json;

constexpr double kMethodTolerance = 1e-9;
constexpr std::string_view kPaperMethod = "paperEq11";

const std::vector<std::string> kMethods{"dp", "closedForm", kPaperMethod.data(), "oracle"};

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos == std::string_view::npos ? text.npos : pos - start));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

LatticeConfig lattice_config(const ExperimentSpec& spec, double p) {
  LatticeConfig c;
  c.dimension = spec.dimension;
  c.model = spec.model;
  c.p = p;
  c.k = spec.k;
  c.n = spec.n;
  c.cushion = spec.cushion;
  c.include_initiators = spec.include_initiators;
  c.dist = parse_distribution(spec.dist);
  c.seed = spec.seed;
  return c;
}

ContinuumConfig continuum_config(const ExperimentSpec& spec) {
  ContinuumConfig c;
  c.dimension = spec.dimension;
  c.window_t = spec.window_t;
  c.law = parse_continuous_law(spec.law);
  c.k = spec.k;
  c.resolution = spec.resolution;
  c.seed = spec.seed;
  return c;
}

struct LatticeSummary {
  MeanSummary depth;     // last under-covered depth / n
  MeanSummary covered;   // fraction of reported sites reaching k
  MeanSummary diagonal;  // 2D only
  std::uint64_t clamped = 0;
};

// Trial t uses derive_seed(seed, t) whatever the other parameters are, so
// grids over p are coupled.
LatticeSummary lattice_summary(const LatticeConfig& config, std::uint64_t trials, unsigned workers) {
  config.validate();
  (void)config.simulated_extent();
  std::vector<double> depth(trials), covered(trials), diagonal(trials);
  std::vector<std::uint64_t> clamped(trials);
  parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    const CoverageField field = coverage_field(Realization(trial_config(config, t)));
    depth[t] = static_cast<double>(under_covered_depth(field, config.k)) / static_cast<double>(config.n);
    covered[t] = 1.0 - under_covered_fraction(field, config.k, 1);
    diagonal[t] = config.dimension == 2 ? diagonal_covered_fraction(field, config.k) : nan();
    clamped[t] = field.clamped;
  });
  LatticeSummary s;
  s.depth = summarize_mean(depth);
  s.covered = summarize_mean(covered);
  if (config.dimension == 2) s.diagonal = summarize_mean(diagonal);
  for (auto c : clamped) s.clamped += c;
  return s;
}

void append_summary(std::vector<Cell>& row, const MeanSummary& m) {
  row.emplace_back(m.mean);
  row.emplace_back(m.ci.low);
  row.emplace_back(m.ci.high);
}

ExperimentResult start(const ExperimentSpec& spec, std::vector<std::string> columns) {
  ExperimentResult r;
  r.spec = spec;
  r.columns = std::move(columns);
  return r;
}

}  // namespace

std::string to_string(Subcommand s) {
  switch (s) {
    case Subcommand::exact: return "exact";
    case Subcommand::simulate: return "simulate";
    case Subcommand::scan: return "scan";
    case Subcommand::diagnose: return "diagnose";
    case Subcommand::continuum: return "continuum";
  }
  return "exact";
}

Subcommand parse_subcommand(std::string_view text) {
  for (auto s : {Subcommand::exact, Subcommand::simulate, Subcommand::scan, Subcommand::diagnose,
                 Subcommand::continuum})
    if (text == to_string(s)) return s;
  throw ParseError("unknown subcommand '" + std::string(text) + "'");
}

bool Cell::operator==(const Cell& other) const {
  if (value.index() != other.value.index()) return false;
  if (const auto* a = std::get_if<double>(&value)) {
    const double b = std::get<double>(other.value);
    return (std::isnan(*a) && std::isnan(b)) || *a == b;
  }
  return value == other.value;
}

json to_json(const ExperimentSpec& s) {
  json sites = json::array();
  for (const Site& site : s.sites) sites.push_back(json::array({site.x, site.y}));
  return json{
      {"subcommand", to_string(s.subcommand)},
      {"dim", s.dimension},
      {"model", to_string(s.model)},
      {"dist", s.dist},
      {"p", s.p},
      {"k", s.k},
      {"n", s.n},
      {"cushion", s.cushion},
      {"trials", s.trials},
      {"sites", sites},
      {"initiators", s.include_initiators},
      {"seed", s.seed},
      {"methods", s.methods},
      {"allowPaperFormulaDivergence", s.allow_paper_formula_divergence},
      {"param", s.param},
      {"grid", s.grid},
      {"stat", s.stat},
      {"iMin", s.i_min},
      {"iMax", s.i_max},
      {"law", s.law},
      {"windowT", s.window_t},
      {"resolution", s.resolution},
      {"lambda", s.lambda},
      {"out", s.out},
      {"csv", s.csv},
      {"json", s.json},
      {"svg", s.svg},
      {"timing", s.timing},
  };
}

ExperimentSpec spec_from_json(const json& j) {
  try {
    ExperimentSpec s;
    s.subcommand = parse_subcommand(j.at("subcommand").get<std::string>());
    s.dimension = j.at("dim").get<int>();
    s.model = parse_model(j.at("model").get<std::string>());
    s.dist = j.at("dist").get<std::string>();
    s.p = j.at("p").get<std::vector<double>>();
    s.k = j.at("k").get<unsigned>();
    s.n = j.at("n").get<std::int64_t>();
    s.cushion = j.at("cushion").get<std::int64_t>();
    s.trials = j.at("trials").get<std::uint64_t>();
    s.sites.clear();
    for (const auto& site : j.at("sites")) s.sites.push_back({site.at(0).get<std::int64_t>(), site.at(1).get<std::int64_t>()});
    s.include_initiators = j.at("initiators").get<bool>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.methods = j.at("methods").get<std::vector<std::string>>();
    s.allow_paper_formula_divergence = j.at("allowPaperFormulaDivergence").get<bool>();
    s.param = j.at("param").get<std::string>();
    s.grid = j.at("grid").get<std::vector<double>>();
    s.stat = j.at("stat").get<std::string>();
    s.i_min = j.at("iMin").get<std::int64_t>();
    s.i_max = j.at("iMax").get<std::int64_t>();
    s.law = j.at("law").get<std::string>();
    s.window_t = j.at("windowT").get<double>();
    s.resolution = j.at("resolution").get<double>();
    s.lambda = j.at("lambda").get<std::vector<double>>();
    s.out = j.at("out").get<std::string>();
    s.csv = j.at("csv").get<bool>();
    s.json = j.at("json").get<bool>();
    s.svg = j.at("svg").get<bool>();
    s.timing = j.at("timing").get<bool>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("spec JSON: ") + e.what());
  }
}

void validate(const ExperimentSpec& s) {
  if (s.dimension != 1 && s.dimension != 2) throw ValidationError("--dim must be 1 or 2");
  (void)parse_distribution(s.dist);
  for (double p : s.p)
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("--p values must lie in [0,1], got " + format_double(p));
  if (s.svg && s.out.empty()) throw ValidationError("--svg needs --out");

  switch (s.subcommand) {
    case Subcommand::exact:
      if (s.sites.empty()) throw ValidationError("exact needs --sites");
      if (s.p.empty()) throw ValidationError("exact needs --p");
      if (s.methods.empty()) throw ValidationError("exact needs at least one --method");
      for (const auto& m : s.methods) {
        if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end())
          throw ValidationError("unknown --method '" + m + "' (dp, closedForm, paperEq11, oracle)");
        if (m == "closedForm" && s.dimension != 1) throw ValidationError("closedForm is 1D only");
        if (m == kPaperMethod && s.dimension != 2) throw ValidationError("paperEq11 is 2D only");
      }
      break;
    case Subcommand::simulate:
      if (s.p.empty()) throw ValidationError("simulate needs --p");
      if (s.trials == 0) throw ValidationError("--trials must be >= 1");
      break;
    case Subcommand::scan:
      if (s.grid.empty()) throw ValidationError("scan needs a non-empty --grid");
      if (s.param != "p" && s.param != "beta" && s.param != "lambda")
        throw ValidationError("--param must be p, beta or lambda");
      if (s.trials == 0) throw ValidationError("--trials must be >= 1");
      if (s.param == "lambda") {
        (void)parse_continuous_law(s.law);
        if (!s.stat.empty() && s.stat != "lastGap" && s.stat != "deficit")
          throw ValidationError("lambda scans report lastGap (1D) or deficit (2D)");
      } else {
        if (s.param == "p" && s.p.size() > 1) throw ValidationError("scan over p takes its values from --grid");
        if (s.param == "beta" && s.p.size() != 1) throw ValidationError("scan over beta needs a single --p");
        const std::string& st = s.stat;
        if (!st.empty() && st != "depth" && st != "coveredFraction" && st != "diagonalCovered" && st != "growthRatio")
          throw ValidationError("--stat must be depth, coveredFraction, diagonalCovered or growthRatio");
        if (st == "diagonalCovered" && s.dimension != 2) throw ValidationError("diagonalCovered is 2D only");
        if (st == "growthRatio" && s.dimension != 1) throw ValidationError("growthRatio is 1D only");
      }
      break;
    case Subcommand::diagnose:
      if (s.dimension != 1) throw ValidationError("diagnose is 1D only");
      if (s.p.empty()) throw ValidationError("diagnose needs --p");
      if (!(s.i_min >= 1 && s.i_min < s.i_max)) throw ValidationError("diagnose needs 1 <= --imin < --imax");
      break;
    case Subcommand::continuum:
      (void)parse_continuous_law(s.law);
      if (s.lambda.empty()) throw ValidationError("continuum needs --lambda");
      if (s.trials == 0) throw ValidationError("--trials must be >= 1");
      break;
  }
}

ExperimentResult run_exact(const ExperimentSpec& spec) {
  std::vector<std::string> cols = spec.dimension == 1 ? std::vector<std::string>{"i", "p", "k", "prob", "method"}
                                                      : std::vector<std::string>{"i", "j", "p", "k", "prob", "method"};
  ExperimentResult r = start(spec, std::move(cols));
  const TailDistribution dist = parse_distribution(spec.dist);
  for (const Site& site : spec.sites) {
    for (double p : spec.p) {
      ExactQuery q;
      q.dimension = spec.dimension;
      q.site = spec.dimension == 1 ? Site{site.x, 0} : site;
      q.p = p;
      q.k = spec.k;
      q.dist = dist;
      q.include_initiators = spec.include_initiators;
      q.validate();
      const double reference = undercovered_prob(q);
      for (const std::string& method : spec.methods) {
        double prob = reference;
        if (method == "closedForm") prob = undercovered_prob_1d_closed_form(q);
        else if (method == kPaperMethod) prob = undercovered_prob_2d_unweighted(q);
        else if (method == "oracle") prob = enumeration_oracle(q);

        std::vector<Cell> row{Cell(q.site.x)};
        if (spec.dimension == 2) row.emplace_back(q.site.y);
        row.emplace_back(p);
        row.emplace_back(static_cast<std::int64_t>(spec.k));
        row.emplace_back(prob);
        row.emplace_back(method);
        r.rows.push_back(std::move(row));

        if (!(std::abs(prob - reference) <= kMethodTolerance)) {
          std::string where = "i=" + std::to_string(q.site.x);
          if (spec.dimension == 2) where += " j=" + std::to_string(q.site.y);
          r.divergences.push_back(method + ": " + where + " p=" + format_double(p) + " gives " + format_double(prob) +
                                  " but dp gives " + format_double(reference));
        }
      }
    }
  }
  return r;
}

ExperimentResult run_simulate(const ExperimentSpec& spec, unsigned workers) {
  if (!spec.sites.empty()) {
    std::vector<std::string> cols{"x"};
    if (spec.dimension == 2) cols.emplace_back("y");
    for (const char* c : {"p", "k", "trials", "underCovered", "freqUnderCovered", "ciLow", "ciHigh"}) cols.emplace_back(c);
    ExperimentResult r = start(spec, std::move(cols));
    for (double p : spec.p) {
      LatticeConfig config = lattice_config(spec, p);
      std::vector<Site> sites = spec.sites;
      if (spec.dimension == 1)
        for (Site& s : sites) s.y = 0;
      for (const SiteEstimate& e : estimate_under_coverage(config, sites, spec.trials, workers)) {
        std::vector<Cell> row{Cell(e.site.x)};
        if (spec.dimension == 2) row.emplace_back(e.site.y);
        row.emplace_back(p);
        row.emplace_back(static_cast<std::int64_t>(spec.k));
        row.emplace_back(static_cast<std::int64_t>(e.trials));
        row.emplace_back(static_cast<std::int64_t>(e.under_covered));
        row.emplace_back(e.frequency);
        row.emplace_back(e.ci.low);
        row.emplace_back(e.ci.high);
        r.rows.push_back(std::move(row));
      }
    }
    return r;
  }

  std::vector<std::string> cols{"p", "k", "n", "trials", "depth", "depthCiLow", "depthCiHigh",
                                "coveredFraction", "coveredCiLow", "coveredCiHigh"};
  if (spec.dimension == 2)
    for (const char* c : {"diagonalCovered", "diagonalCiLow", "diagonalCiHigh"}) cols.emplace_back(c);
  ExperimentResult r = start(spec, std::move(cols));
  for (double p : spec.p) {
    const LatticeSummary s = lattice_summary(lattice_config(spec, p), spec.trials, workers);
    std::vector<Cell> row{Cell(p), Cell(static_cast<std::int64_t>(spec.k)), Cell(spec.n),
                          Cell(static_cast<std::int64_t>(spec.trials))};
    append_summary(row, s.depth);
    append_summary(row, s.covered);
    if (spec.dimension == 2) append_summary(row, s.diagonal);
    r.rows.push_back(std::move(row));
    r.clamp_count += s.clamped;
  }
  return r;
}

ExperimentResult run_scan(const ExperimentSpec& spec, unsigned workers) {
  if (spec.grid.empty()) throw ValidationError("scan needs a non-empty --grid");
  ExperimentResult r = start(spec, {"param", "value", "stat", "mean", "ciLow", "ciHigh", "trials"});
  auto add = [&](double value, const std::string& stat, const MeanSummary& m, std::uint64_t trials) {
    std::vector<Cell> row{Cell(spec.param), Cell(value), Cell(stat)};
    append_summary(row, m);
    row.emplace_back(static_cast<std::int64_t>(trials));
    r.rows.push_back(std::move(row));
  };

  if (spec.param == "lambda") {
    const std::string stat = spec.dimension == 1 ? "lastGap" : "deficit";
    for (const LambdaSummary& s : scan_lambda(continuum_config(spec), spec.grid, spec.trials, workers))
      add(s.lambda, stat, s.statistic, spec.trials);
    return r;
  }

  const std::string stat =
      !spec.stat.empty() ? spec.stat : (spec.param == "beta" ? "coveredFraction" : "depth");
  for (double value : spec.grid) {
    const double p = spec.param == "p" ? value : spec.p.front();
    if (stat == "growthRatio") {
      const SeriesDiagnostics d = series_diagnostics(p, parse_distribution(spec.dist), spec.k, spec.i_min, spec.i_max);
      MeanSummary m;
      m.mean = d.growth_ratio;
      m.ci = {nan(), nan()};
      add(value, stat, m, 0);
      continue;
    }
    LatticeConfig config = lattice_config(spec, p);
    if (spec.param == "beta") config.dist = TailDistribution::power(value);
    const LatticeSummary s = lattice_summary(config, spec.trials, workers);
    r.clamp_count += s.clamped;
    add(value, stat, stat == "depth" ? s.depth : stat == "coveredFraction" ? s.covered : s.diagonal, spec.trials);
  }
  return r;
}

ExperimentResult run_diagnose(const ExperimentSpec& spec) {
  ExperimentResult r = start(spec, {"p", "k", "n", "partialSum", "growthRatio", "decayExponent"});
  const TailDistribution dist = parse_distribution(spec.dist);
  std::vector<std::int64_t> checkpoints;
  for (std::int64_t n = spec.i_max; n >= spec.i_min; n /= 2) {
    checkpoints.push_back(n);
    if (n == 1) break;
  }
  std::reverse(checkpoints.begin(), checkpoints.end());
  for (double p : spec.p) {
    const SeriesDiagnostics d = series_diagnostics(p, dist, spec.k, spec.i_min, spec.i_max);
    for (std::int64_t n : checkpoints) {
      const std::int64_t half = n / 2;
      const bool has_half = half >= spec.i_min && half < n;
      r.rows.push_back({Cell(p), Cell(static_cast<std::int64_t>(spec.k)), Cell(n), Cell(d.partial_sum(n)),
                        Cell(has_half ? d.growth_ratio_at(half) : nan()),
                        Cell(has_half ? d.decay_exponent_over(half, n) : nan())});
    }
  }
  return r;
}

ExperimentResult run_continuum(const ExperimentSpec& spec, unsigned workers) {
  ExperimentResult r = start(spec, {"lambda", "stat", "mean", "ciLow", "ciHigh", "trials"});
  const std::string stat = spec.dimension == 1 ? "lastGap" : "deficit";
  for (const LambdaSummary& s : scan_lambda(continuum_config(spec), spec.lambda, spec.trials, workers)) {
    std::vector<Cell> row{Cell(s.lambda), Cell(stat)};
    append_summary(row, s.statistic);
    row.emplace_back(static_cast<std::int64_t>(spec.trials));
    r.rows.push_back(std::move(row));
  }
  return r;
}

ExperimentResult run(const ExperimentSpec& spec, unsigned workers) {
  validate(spec);
  const auto begin = std::chrono::steady_clock::now();
  ExperimentResult r;
  switch (spec.subcommand) {
    case Subcommand::exact: r = run_exact(spec); break;
    case Subcommand::simulate: r = run_simulate(spec, workers); break;
    case Subcommand::scan: r = run_scan(spec, workers); break;
    case Subcommand::diagnose: r = run_diagnose(spec); break;
    case Subcommand::continuum: r = run_continuum(spec, workers); break;
  }
  if (spec.timing)
    r.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - begin).count();
  return r;
}

bool divergence_is_fatal(const ExperimentResult& result) {
  for (const std::string& d : result.divergences) {
    const bool printed_formula = d.starts_with(kPaperMethod);
    if (!printed_formula || !result.spec.allow_paper_formula_divergence) return true;
  }
  return false;
}

std::vector<Site> parse_sites(std::string_view text, int dimension) {
  std::vector<Site> sites;
  if (text.empty()) return sites;
  if (dimension == 1) {
    for (const std::string& tok : split(text, ',')) {
      std::int64_t x = 0;
      if (!parse_i64(tok, x)) throw ParseError("--sites: bad site '" + tok + "'");
      sites.push_back({x, 0});
    }
    return sites;
  }
  for (const std::string& pair : split(text, ';')) {
    const auto xy = split(pair, ',');
    std::int64_t x = 0, y = 0;
    if (xy.size() != 2 || !parse_i64(xy[0], x) || !parse_i64(xy[1], y))
      throw ParseError("--sites: bad 2D site '" + pair + "' (expected x,y)");
    sites.push_back({x, y});
  }
  return sites;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  for (const std::string& tok : split(text, ',')) {
    double v = 0;
    if (!parse_double(tok, v)) throw ParseError("bad number '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace rumourlab
