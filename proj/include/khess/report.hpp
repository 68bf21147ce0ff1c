#pragma once

#include "khess/estimates.hpp"
#include "khess/radial.hpp"
#include "khess/rigidity.hpp"
#include "khess/solver.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace khess {

using Json = nlohmann::ordered_json;

/// Shortest decimal that round-trips; "nan"/"inf" spelled out.
std::string format_number(double x);

Json to_json(const Point& p, int dim);
Json to_json(const SolveReport& r);
Json to_json(const SuiteResult& r);
Json to_json(const GrowthSuiteResult& r);
Json to_json(const EstimateReport& r, int dim);
Json to_json(const RigidityTrace& r);

struct CsvColumn {
    std::string name;
    std::string description;
};

struct CsvTable {
    std::vector<CsvColumn> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::string render() const;
    /// Sidecar description of the columns.
    Json schema() const;
};

CsvTable solve_table(const SolveReport& r);
CsvTable suite_table(const std::vector<SuiteResult>& suites);
/// One row per (quantity, level); `flag` is "partial" when that level did not solve.
CsvTable refinement_table(const std::vector<EstimateReport>& reports, int dim);
/// Columns R, sup_lap, osc, exponent (so far) and flag.
CsvTable rigidity_table(const RigidityTrace& trace);
CsvTable profile_table(const RadialProfile& profile);

}  // namespace khess
