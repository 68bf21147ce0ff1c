#include "khess/report.hpp"

#include "khess/error.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace khess {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

Json to_json(const Point& p, int dim) {
    Json a = Json::array();
    for (int i = 0; i < dim; ++i) a.push_back(p[i]);
    return a;
}

Json to_json(const SolveReport& r) {
    return Json{{"iterations", r.iterations},
                {"final_residual", r.final_residual},
                {"converged", r.converged},
                {"admissibility_violations", r.admissibility_violations},
                {"continuation_stages", r.continuation_stages},
                {"damping_history", r.damping_history},
                {"residual_history", r.residual_history},
                {"iterate_cone_margin", r.iterate_cone_margin}};
}

namespace {

Json witness_json(const std::optional<Witness>& w) {
    if (!w) return nullptr;
    return Json{{"lambda", w->lam}, {"slice", w->slice}, {"gap", w->gap}, {"scale", w->scale}, {"detail", w->detail}};
}

}  // namespace

Json to_json(const SuiteResult& r) {
    return Json{{"name", r.name},         {"samples", r.samples},   {"checks", r.checks},
                {"violations", r.violations}, {"worst_relative_gap", r.worst}, {"witness", witness_json(r.witness)}};
}

Json to_json(const GrowthSuiteResult& r) {
    return Json{{"n", r.n},
                {"mu", r.mu},
                {"samples", r.samples},
                {"lower_violations", r.lower_violations},
                {"upper_max_ratio", r.max_ratio},
                {"upper_calibrated", r.calibrated},
                {"witness", witness_json(r.witness)}};
}

Json to_json(const EstimateReport& r, int dim) {
    Json levels = Json::array();
    for (const auto& l : r.levels)
        levels.push_back(Json{{"resolution", l.resolution},
                              {"solved", l.solved},
                              {"max", l.max},
                              {"argmax", to_json(l.argmax, dim)},
                              {"iterations", l.iterations},
                              {"residual", l.residual}});
    return Json{{"quantity", r.quantity}, {"config", r.domain},   {"levels", levels},
                {"verdict", r.bounded},   {"slack", r.slack},     {"partial", r.partial}};
}

Json to_json(const RigidityTrace& r) {
    Json levels = Json::array();
    for (const auto& l : r.levels)
        levels.push_back(Json{{"R", l.R},
                              {"solved", l.solved},
                              {"spacing", l.spacing},
                              {"nodes", l.nodes},
                              {"inner_nodes", l.inner_nodes},
                              {"sup_lap", l.sup_lap},
                              {"osc", l.osc},
                              {"interior_bound", l.interior_bound},
                              {"max_inner_v", l.max_inner_v},
                              {"iterations", l.iterations},
                              {"residual", l.residual},
                              {"in_fit", l.in_fit}});
    return Json{{"candidate", r.candidate}, {"n", r.dim},           {"k", r.k},
                {"resolution", r.resolution}, {"beta", r.beta},     {"levels", levels},
                {"exponent", r.exponent},   {"partial", r.partial}};
}

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw DomainError("CsvTable: row width does not match the header");
    rows.push_back(std::move(row));
}

std::string CsvTable::render() const {
    std::ostringstream os;
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c].name;
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
        os << '\n';
    }
    return os.str();
}

Json CsvTable::schema() const {
    Json cols = Json::array();
    for (const auto& c : columns) cols.push_back(Json{{"name", c.name}, {"description", c.description}});
    return Json{{"columns", cols}};
}

CsvTable solve_table(const SolveReport& r) {
    CsvTable t;
    t.columns = {{"step", "index into the residual history (0 is the initial guess of each Newton run)"},
                 {"residual", "max-norm nodal residual"}};
    for (std::size_t i = 0; i < r.residual_history.size(); ++i)
        t.add_row({std::to_string(i), format_number(r.residual_history[i])});
    return t;
}

CsvTable suite_table(const std::vector<SuiteResult>& suites) {
    CsvTable t;
    t.columns = {{"suite", "inequality and configuration"},
                 {"samples", "random spectra drawn"},
                 {"checks", "inequality evaluations"},
                 {"violations", "checks with gap below -rel*scale"},
                 {"worst_relative_gap", "min gap/scale"}};
    for (const auto& s : suites)
        t.add_row({s.name, std::to_string(s.samples), std::to_string(s.checks), std::to_string(s.violations),
                   format_number(s.worst)});
    return t;
}

CsvTable refinement_table(const std::vector<EstimateReport>& reports, int dim) {
    static const char* axis[] = {"x", "y", "z"};
    CsvTable t;
    t.columns = {{"quantity", "estimate quantity tag"}, {"resolution", "grid points per axis"},
                 {"max", "grid maximum over active nodes"}};
    for (int a = 0; a < dim; ++a) t.columns.push_back({std::string("argmax_") + axis[a], "location of the maximum"});
    t.columns.push_back({"flag", "empty, or 'partial' when the solve failed at this level"});
    for (const auto& r : reports)
        for (const auto& l : r.levels) {
            std::vector<std::string> row{r.quantity, std::to_string(l.resolution), format_number(l.max)};
            for (int a = 0; a < dim; ++a) row.push_back(format_number(l.argmax[a]));
            row.push_back(l.solved ? "" : "partial");
            t.add_row(std::move(row));
        }
    return t;
}

CsvTable rigidity_table(const RigidityTrace& trace) {
    CsvTable t;
    t.columns = {{"R", "rescaling radius"},
                 {"sup_lap", "sup |Laplacian| over the inner region"},
                 {"osc", "max over Hessian entries of (max - min) on the inner region"},
                 {"exponent", "log-log slope of osc against R over the fitted levels so far"},
                 {"flag", "empty, 'partial' when the solve failed, 'noise' when osc is below the fit floor"}};
    for (const auto& l : trace.levels)
        t.add_row({format_number(l.R), format_number(l.sup_lap), format_number(l.osc),
                   format_number(l.exponent_so_far), !l.solved ? "partial" : (l.in_fit ? "" : "noise")});
    return t;
}

CsvTable profile_table(const RadialProfile& profile) {
    CsvTable t;
    t.columns = {{"r", "radius"}, {"u", "profile value"}, {"du", "profile slope u'(r)"}};
    for (std::size_t i = 0; i < profile.r().size(); ++i)
        t.add_row({format_number(profile.r()[i]), format_number(profile.u()[i]), format_number(profile.slope()[i])});
    return t;
}

}  // namespace khess
