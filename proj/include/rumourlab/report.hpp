#pragma once

#include <string>

#include "json.hpp"
#include "rumourlab/experiment.hpp"

namespace rumourlab {

// CSV with the subcommand's fixed header line.
std::string to_csv(const ExperimentResult& result);

// {spec, version, columns, rows, clampCount, wallTimeMs, divergences}; rows are
// objects keyed by column name, NaN encoded as null.
nlohmann::ordered_json to_json(const ExperimentResult& result);
std::string to_json_text(const ExperimentResult& result);
ExperimentResult result_from_json(const nlohmann::ordered_json& j);

// Single-series line plot of the subcommand's main statistic.
std::string to_svg(const ExperimentResult& result);

// Writes <out>.csv / .json / .svg as selected by the spec. Without an output
// prefix CSV and JSON go to stdout. Throws IoError naming the path.
void emit_outputs(const ExperimentResult& result);

}  // namespace rumourlab
