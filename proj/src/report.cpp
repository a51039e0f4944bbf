#include "rumourlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rumourlab/error.hpp"
#include "rumourlab/format.hpp"

namespace rumourlab {

namespace {

using json = nlohmann::ordered_json;

std::string cell_text(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c.value)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c.value)) return format_double(*d);
  return std::get<std::string>(c.value);
}

json cell_json(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c.value)) return *i;
  if (const auto* d = std::get_if<double>(&c.value)) return std::isfinite(*d) ? json(*d) : json(nullptr);
  return std::get<std::string>(c.value);
}

Cell cell_from_json(const json& j) {
  if (j.is_null()) return Cell(std::numeric_limits<double>::quiet_NaN());
  if (j.is_number_integer()) return Cell(j.get<std::int64_t>());
  if (j.is_number_float()) return Cell(j.get<double>());
  if (j.is_string()) return Cell(j.get<std::string>());
  throw ParseError("result JSON: unexpected cell " + j.dump());
}

std::optional<double> numeric(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c.value)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&c.value)) {
    if (std::isfinite(*d)) return *d;
  }
  return std::nullopt;
}

struct PlotChoice {
  std::string x;
  std::string y;
  std::vector<std::string> series_keys;  // rows sharing the first row's values form the series
};

PlotChoice plot_choice(const ExperimentResult& r) {
  const bool has = [&] {
    return std::find(r.columns.begin(), r.columns.end(), "freqUnderCovered") != r.columns.end();
  }();
  switch (r.spec.subcommand) {
    case Subcommand::exact:
      return {"i", "prob", r.spec.dimension == 2 ? std::vector<std::string>{"p", "method", "j"}
                                                 : std::vector<std::string>{"p", "method"}};
    case Subcommand::simulate:
      if (has) return {"x", "freqUnderCovered", {"p"}};
      return {"p", "depth", {}};
    case Subcommand::scan: return {"value", "mean", {}};
    case Subcommand::diagnose: return {"n", "partialSum", {"p"}};
    case Subcommand::continuum: return {"lambda", "mean", {}};
  }
  return {};
}

std::ptrdiff_t column_index(const ExperimentResult& r, const std::string& name) {
  const auto it = std::find(r.columns.begin(), r.columns.end(), name);
  return it == r.columns.end() ? -1 : it - r.columns.begin();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << content;
  f.close();
  if (!f) throw IoError("failed writing '" + path + "'");
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string to_csv(const ExperimentResult& result) {
  std::string out;
  for (std::size_t c = 0; c < result.columns.size(); ++c) {
    if (c) out += ',';
    out += result.columns[c];
  }
  out += '\n';
  for (const auto& row : result.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += cell_text(row[c]);
    }
    out += '\n';
  }
  return out;
}

json to_json(const ExperimentResult& result) {
  json rows = json::array();
  for (const auto& row : result.rows) {
    json obj = json::object();
    for (std::size_t c = 0; c < row.size() && c < result.columns.size(); ++c) obj[result.columns[c]] = cell_json(row[c]);
    rows.push_back(std::move(obj));
  }
  return json{
      {"spec", to_json(result.spec)},
      {"version", result.version},
      {"columns", result.columns},
      {"rows", std::move(rows)},
      {"clampCount", result.clamp_count},
      {"wallTimeMs", result.wall_time_ms ? json(*result.wall_time_ms) : json(nullptr)},
      {"divergences", result.divergences},
  };
}

std::string to_json_text(const ExperimentResult& result) { return to_json(result).dump(2) + "\n"; }

ExperimentResult result_from_json(const json& j) {
  try {
    ExperimentResult r;
    r.spec = spec_from_json(j.at("spec"));
    r.version = j.at("version").get<std::string>();
    r.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& obj : j.at("rows")) {
      std::vector<Cell> row;
      for (const auto& col : r.columns) row.push_back(cell_from_json(obj.at(col)));
      r.rows.push_back(std::move(row));
    }
    r.clamp_count = j.at("clampCount").get<std::uint64_t>();
    if (!j.at("wallTimeMs").is_null()) r.wall_time_ms = j.at("wallTimeMs").get<double>();
    r.divergences = j.at("divergences").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("result JSON: ") + e.what());
  }
}

std::string to_svg(const ExperimentResult& result) {
  const PlotChoice choice = plot_choice(result);
  const auto xi = column_index(result, choice.x);
  const auto yi = column_index(result, choice.y);

  std::vector<std::pair<double, double>> pts;
  if (xi >= 0 && yi >= 0 && !result.rows.empty()) {
    const auto& first = result.rows.front();
    for (const auto& row : result.rows) {
      bool same = true;
      for (const auto& key : choice.series_keys) {
        const auto ki = column_index(result, key);
        if (ki >= 0 && !(row[static_cast<std::size_t>(ki)] == first[static_cast<std::size_t>(ki)])) same = false;
      }
      const auto x = numeric(row[static_cast<std::size_t>(xi)]);
      const auto y = numeric(row[static_cast<std::size_t>(yi)]);
      if (same && x && y) pts.emplace_back(*x, *y);
    }
  }

  constexpr double W = 640, H = 400, L = 70, R = 20, T = 20, B = 70;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!pts.empty()) {
    x0 = x1 = pts.front().first;
    y0 = y1 = pts.front().second;
    for (auto [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    if (x1 == x0) { x0 -= 0.5; x1 += 0.5; }
    if (y1 == y0) { y0 -= 0.5; y1 += 0.5; }
  }
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  auto num = [](double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = x0 + (x1 - x0) * t / 4.0;
    const double fy = y0 + (y1 - y0) * t / 4.0;
    svg << "<text x=\"" << num(sx(fx)) << "\" y=\"" << H - B + 16 << "\" font-size=\"11\" text-anchor=\"middle\">"
        << num(fx) << "</text>\n";
    svg << "<text x=\"" << L - 6 << "\" y=\"" << num(sy(fy) + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
        << num(fy) << "</text>\n";
  }
  svg << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - B + 34 << "\" font-size=\"12\" text-anchor=\"middle\">"
      << escape_xml(choice.x) << "</text>\n";
  if (!pts.empty()) {
    svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) svg << (i ? " " : "") << num(sx(pts[i].first)) << ',' << num(sy(pts[i].second));
    svg << "\"/>\n";
    for (auto [x, y] : pts)
      svg << "<circle cx=\"" << num(sx(x)) << "\" cy=\"" << num(sy(y)) << "\" r=\"3\" fill=\"steelblue\"/>\n";
  }
  std::string caption = choice.y + " vs " + choice.x + " (" + to_string(result.spec.subcommand);
  if (result.spec.subcommand == Subcommand::scan && !result.rows.empty() && column_index(result, "stat") >= 0)
    caption += ", statistic " + cell_text(result.rows.front()[static_cast<std::size_t>(column_index(result, "stat"))]);
  caption += ")";
  svg << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" font-size=\"13\" text-anchor=\"middle\">"
      << escape_xml(caption) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void emit_outputs(const ExperimentResult& result) {
  const ExperimentSpec& s = result.spec;
  const bool csv = s.csv || (!s.json && !s.svg);
  if (s.out.empty()) {
    if (csv) std::cout << to_csv(result);
    if (s.json) std::cout << to_json_text(result);
    if (s.svg) throw IoError("--svg needs --out");
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing to stdout");
    return;
  }
  if (csv) write_file(s.out + ".csv", to_csv(result));
  if (s.json) write_file(s.out + ".json", to_json_text(result));
  if (s.svg) write_file(s.out + ".svg", to_svg(result));
}

}  // namespace rumourlab
