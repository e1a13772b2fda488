#pragma once

#include <filesystem>
#include <vector>

#include "json.hpp"

#include "fplap/config.hpp"
#include "fplap/ordermethod.hpp"

namespace fplap {

using json = nlohmann::ordered_json;

std::string version_string();

/// Common report header: command, version, resolved config, conventions.
json report_header(const RunConfig& cfg);

json to_json(const EigenPair& eig);
json to_json(const SolveReport& rep);
json to_json(const VerifyReport& vr);
json to_json(const SweepEntry& e);
json to_json(const SweepResult& sr);

void write_json(const std::filesystem::path& path, const json& j);

/// Columns x,u with a header line.
void write_solution_csv(const std::filesystem::path& path, const DiscreteFunction& u);

/// Reads a solution.csv on (a, b); N is the row count. Throws MeshMismatch if
/// the x column is not the uniform interior grid, Io/ParseError on bad files.
DiscreteFunction read_solution_csv(const std::filesystem::path& path, double a, double b);

/// lambda,succeeded,iterations,energy,sup_norm,residual (grid entries only).
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sr);

/// Two whitespace-separated columns, no header.
void write_plot(const std::filesystem::path& path, const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fplap
