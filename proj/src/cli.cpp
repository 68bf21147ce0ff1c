#include "khess/cli.hpp"

#include "khess/cone.hpp"
#include "khess/error.hpp"
#include "khess/sampling.hpp"
#include "khess/symfun.hpp"

#include <CLI11.hpp>

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace khess {

namespace {

struct OutputFile {
    std::string name;
    std::string content;
};

struct Outcome {
    int status = kExitOk;
    Json report;
    std::vector<OutputFile> files;
};

const std::map<std::string, Json>& defaults_table() {
    static const std::map<std::string, Json> table = [] {
        std::map<std::string, Json> t;
        t["solve"] = Json{{"n", 2},      {"k", 2},        {"f", "1"},       {"res", 65},    {"low", 0.0},
                          {"high", 1.0}, {"tol", 1e-10},  {"max-iter", 100}, {"seed", 0},    {"out", "."}};
        t["verify-lemmas"] = Json{{"n", 3},          {"k", 2},           {"l", 1},
                                  {"samples", 10000}, {"deltas", {0.1, 0.01}}, {"rel", 1e-10},
                                  {"shift-rel", 1e-12}, {"newton-rel", 1e-12}, {"seed", 0},
                                  {"out", "."}};
        t["pogorelov"] = Json{{"n", 2},          {"k", 2},
                              {"f", "1"},        {"levels", {33, 65, 129, 257}},
                              {"betas", {1.0, 2.0, 4.0, 8.0}}, {"eps", 0.05},
                              {"a", 0.5},        {"tol", 1e-8},
                              {"max-iter", 100}, {"seed", 0},
                              {"out", "."}};
        t["rigidity"] = Json{{"n", 2},          {"k", 2},        {"candidate", "perturbed"},
                             {"amplitude", 0.1}, {"schedule", {2.0, 4.0, 8.0, 16.0}},
                             {"res", 129},      {"beta", 1.0},   {"tol", 1e-9},
                             {"noise-floor", 1e-9}, {"osc-flat", 1e-6}, {"exponent-max", -1.5},
                             {"seed", 0},       {"out", "."}};
        t["oracle-radial"] = Json{{"n", 3},   {"k", 2},       {"f", "1"},   {"R", 1.0},
                                  {"mesh", 64}, {"rel", 1e-10}, {"seed", 0}, {"out", "."}};
        return t;
    }();
    return table;
}

bool same_kind(const Json& def, const Json& v) {
    if (def.is_number_float()) return v.is_number();
    if (def.is_number_integer()) return v.is_number_integer();
    if (def.is_string()) return v.is_string();
    if (def.is_array()) {
        if (!v.is_array() || v.empty()) return false;
        for (const auto& e : v)
            if (!same_kind(def.front(), e)) return false;
        return true;
    }
    return false;
}

Json parse_scalar(const Json& def, const std::string& raw, const std::string& key) {
    const char* s = raw.c_str();
    char* end = nullptr;
    errno = 0;
    if (def.is_string()) return raw;
    if (def.is_number_float()) {
        const double v = std::strtod(s, &end);
        if (end == s || *end != '\0' || errno == ERANGE || !std::isfinite(v))
            throw ConfigError("--" + key + ": expected a number, got '" + raw + "'");
        return v;
    }
    if (key == "seed") {
        const unsigned long long v = std::strtoull(s, &end, 10);
        if (end == s || *end != '\0' || errno == ERANGE || raw.front() == '-')
            throw ConfigError("--seed: expected a nonnegative integer, got '" + raw + "'");
        return static_cast<std::uint64_t>(v);
    }
    const long long v = std::strtoll(s, &end, 10);
    if (end == s || *end != '\0' || errno == ERANGE)
        throw ConfigError("--" + key + ": expected an integer, got '" + raw + "'");
    return v;
}

Json parse_flag(const Json& def, const std::string& raw, const std::string& key) {
    if (!def.is_array()) return parse_scalar(def, raw, key);
    Json arr = Json::array();
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) arr.push_back(parse_scalar(def.front(), item, key));
    if (arr.empty()) throw ConfigError("--" + key + ": expected a comma-separated list");
    return arr;
}

void merge(Json& params, const Json& src, const char* origin) {
    if (!src.is_object()) throw ConfigError(std::string(origin) + ": expected a JSON object");
    for (auto it = src.begin(); it != src.end(); ++it) {
        if (it.key() == "command") continue;
        if (!params.contains(it.key())) throw ConfigError(std::string(origin) + ": unknown key '" + it.key() + "'");
        if (!same_kind(params[it.key()], it.value()))
            throw ConfigError(std::string(origin) + ": wrong type for '" + it.key() + "'");
        params[it.key()] = it.value();
    }
}

// Typed accessors used after validation.
int geti(const Json& p, const char* key) { return p.at(key).get<int>(); }
double getd(const Json& p, const char* key) { return p.at(key).get<double>(); }
std::string gets(const Json& p, const char* key) { return p.at(key).get<std::string>(); }

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

struct ParsedRhs {
    RhsSpec rhs;
    std::string name;
};

ParsedRhs parse_rhs(const std::string& f, bool allow_sine) {
    if (f == "sine") {
        require(allow_sine, "f: 'sine' is only available for grid commands");
        return {RhsSpec::position(
                    [](const Point& x) {
                        return 1.0 + 0.5 * std::sin(std::numbers::pi * x[0]) * std::sin(std::numbers::pi * x[1]);
                    },
                    1.5),
                "1+0.5sin(pi x)sin(pi y)"};
    }
    char* end = nullptr;
    const double c = std::strtod(f.c_str(), &end);
    require(end != f.c_str() && *end == '\0' && std::isfinite(c) && c > 0.0,
            "f: expected a positive constant or 'sine', got '" + f + "'");
    return {RhsSpec::constant(c), f};
}

void validate_common(const Json& p, int nmin, int nmax) {
    const int n = geti(p, "n"), k = geti(p, "k");
    require(n >= nmin && n <= nmax, "n must lie in " + std::to_string(nmin) + ".." + std::to_string(nmax));
    require(k >= 1 && k <= n, "k must satisfy 1 <= k <= n");
    require(!gets(p, "out").empty(), "out must not be empty");
}

void validate(const std::string& command, const Json& p) {
    auto positive = [&](const char* key) { require(getd(p, key) > 0.0, std::string(key) + " must be positive"); };
    if (command == "solve") {
        validate_common(p, 2, 3);
        require(geti(p, "res") >= 5, "res must be at least 5");
        require(getd(p, "high") > getd(p, "low"), "high must exceed low");
        positive("tol");
        require(geti(p, "max-iter") >= 1, "max-iter must be positive");
        parse_rhs(gets(p, "f"), true);
    } else if (command == "verify-lemmas") {
        validate_common(p, 2, 6);
        const int l = geti(p, "l");
        require(l >= 0 && l < geti(p, "k"), "l must satisfy 0 <= l < k");
        require(geti(p, "samples") >= 1, "samples must be positive");
        for (const auto& d : p.at("deltas")) require(d.get<double>() > 0.0 && d.get<double>() < 1.0, "deltas must lie in (0, 1)");
        positive("rel");
        positive("shift-rel");
        positive("newton-rel");
    } else if (command == "pogorelov") {
        validate_common(p, 2, 3);
        int prev = 0;
        for (const auto& r : p.at("levels")) {
            require(r.get<int>() >= 5 && r.get<int>() > prev, "levels must be increasing and at least 5");
            prev = r.get<int>();
        }
        for (const auto& b : p.at("betas")) require(b.get<double>() >= 0.0, "betas must be nonnegative");
        require(getd(p, "eps") >= 0.0 && getd(p, "a") >= 0.0, "eps and a must be nonnegative");
        positive("tol");
        require(geti(p, "max-iter") >= 1, "max-iter must be positive");
        parse_rhs(gets(p, "f"), true);
    } else if (command == "rigidity") {
        validate_common(p, 2, 3);
        const std::string c = gets(p, "candidate");
        require(c == "quadratic" || c == "perturbed", "candidate must be 'quadratic' or 'perturbed'");
        double prev = 0.0;
        for (const auto& r : p.at("schedule")) {
            require(r.get<double>() > prev, "schedule must be positive and increasing");
            prev = r.get<double>();
        }
        require(geti(p, "res") >= 5, "res must be at least 5");
        require(getd(p, "beta") >= 0.0, "beta must be nonnegative");
        require(std::abs(getd(p, "amplitude")) < 0.5, "amplitude must be below 0.5 in magnitude");
        positive("tol");
        positive("noise-floor");
        positive("osc-flat");
    } else if (command == "oracle-radial") {
        validate_common(p, 1, 6);
        positive("R");
        require(geti(p, "mesh") >= 2, "mesh must be at least 2");
        positive("rel");
        parse_rhs(gets(p, "f"), false);
    }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// The output directory is left out so reports do not depend on where they land.
Json header(const RunConfig& cfg) {
    Json params = cfg.params;
    params.erase("out");
    return Json{{"command", cfg.command}, {"seed", cfg.seed()}, {"config", params}};
}

void add_table(Outcome& o, const std::string& stem, const CsvTable& t) {
    o.files.push_back({stem + ".csv", t.render()});
    o.files.push_back({stem + ".columns.json", dump(t.schema())});
}

Outcome run_solve(const RunConfig& cfg, const std::string& stem) {
    const Json& p = cfg.params;
    const int n = geti(p, "n"), k = geti(p, "k");
    const ParsedRhs f = parse_rhs(gets(p, "f"), true);
    const GridDomain g = GridDomain::cube(n, getd(p, "low"), getd(p, "high"), geti(p, "res"));
    SolveOptions opts;
    opts.k = k;
    opts.tol = getd(p, "tol");
    opts.max_iter = geti(p, "max-iter");

    Outcome o;
    o.report = header(cfg);
    try {
        const SolveResult res = solve(initial_guess(g, f.rhs, k), f.rhs, opts);
        const BracketCheck br = bracketing_check(res.field, f.rhs, k);
        const ShiftFieldCheck sh = shift_field_check(res.field, k, f.rhs.sup_f);
        double margin = 0.0;
        for (double m : res.report.iterate_cone_margin) margin = std::min(margin, m);
        const bool admissible = res.report.iterate_cone_margin.empty() || res.report.iterate_cone_margin.back() >= -opts.cone_tol;
        o.report["report"] = to_json(res.report);
        o.report["checks"] = Json{{"bracketing", {{"above_zero", br.above_zero}, {"below_barrier", br.below_barrier}, {"passed", br.passed()}}},
                                  {"shift", {{"K0", sh.K0}, {"checked", sh.checked}, {"skipped", sh.skipped},
                                             {"min_eigenvalue", sh.checked ? sh.min_eigenvalue : 0.0}, {"passed", sh.passed}}},
                                  {"admissible", admissible}};
        std::ostringstream field;
        write_field(field, res.field);
        o.files.push_back({stem + ".field", field.str()});
        add_table(o, stem, solve_table(res.report));
        if (!(br.passed() && sh.passed && admissible)) o.status = kExitPropertyFailure;
    } catch (const SolveError& e) {
        o.report["report"] = to_json(e.report());
        o.report["error"] = e.what();
        add_table(o, stem, solve_table(e.report()));
        o.status = kExitNonconvergence;
    }
    return o;
}

Outcome run_verify(const RunConfig& cfg, const std::string& stem) {
    const Json& p = cfg.params;
    const int n = geti(p, "n"), k = geti(p, "k"), l = geti(p, "l");
    const auto samples = static_cast<std::size_t>(geti(p, "samples"));
    const double rel = getd(p, "rel");
    const std::uint64_t seed = cfg.seed();
    std::uint64_t stream = 0;
    auto next_seed = [&] { return mix_seed(seed, stream++); };

    Outcome o;
    std::vector<SuiteResult> suites;
    Json observations = Json::array();
    bool failed = false;

    suites.push_back(concavity_suite(n, k, l, 0.0, samples, next_seed(), rel));
    failed |= !suites.back().passed();
    std::vector<double> deltas = p.at("deltas").get<std::vector<double>>();
    const double smallest = *std::min_element(deltas.begin(), deltas.end());
    for (double d : deltas) {
        suites.push_back(concavity_suite(n, k, l, d, samples, next_seed(), rel));
        if (suites.back().passed()) continue;
        // The second form is claimed only for sufficiently small δ.
        if (d == smallest)
            failed = true;
        else
            observations.push_back(suites.back().name + ": violations at this delta (threshold observation)");
    }
    if (k >= 2) {
        suites.push_back(shifted_suite(n, k, samples, next_seed(), getd(p, "shift-rel")));
        failed |= !suites.back().passed();
    }
    if (n >= 4) {
        suites.push_back(newton_suite(n, samples, next_seed(), getd(p, "newton-rel")));
        failed |= !suites.back().passed();
    }
    Json growth = Json::array();
    for (int mu = 2; mu + 2 <= n; ++mu) {
        const GrowthSuiteResult g = growth_claims_suite(n, mu, samples, next_seed());
        failed |= g.lower_violations > 0;
        growth.push_back(to_json(g));
    }

    o.report = header(cfg);
    Json js = Json::array();
    for (const auto& s : suites) js.push_back(to_json(s));
    o.report["suites"] = js;
    o.report["growth_claims"] = growth;
    o.report["observations"] = observations;
    o.report["passed"] = !failed;
    add_table(o, stem, suite_table(suites));
    o.status = failed ? kExitPropertyFailure : kExitOk;
    return o;
}

Outcome run_pogorelov(const RunConfig& cfg, const std::string& stem) {
    const Json& p = cfg.params;
    const ParsedRhs f = parse_rhs(gets(p, "f"), true);
    BoxProblem problem;
    problem.dim = geti(p, "n");
    problem.k = geti(p, "k");
    problem.rhs = f.rhs;
    problem.rhs_name = f.name;
    problem.tol = getd(p, "tol");
    problem.max_iter = geti(p, "max-iter");
    std::vector<QuantitySpec> quantities{QuantitySpec::theorem2()};
    for (const auto& b : p.at("betas"))
        quantities.push_back(QuantitySpec::pogorelov({b.get<double>(), getd(p, "eps"), getd(p, "a"), 2, 0.0}));
    const auto reports = refinement_scan(problem, quantities, p.at("levels").get<std::vector<int>>());

    Outcome o;
    o.report = header(cfg);
    Json arr = Json::array();
    bool partial = false, bounded = true;
    for (const auto& r : reports) {
        arr.push_back(to_json(r, problem.dim));
        partial |= r.partial;
        bounded &= r.bounded;
    }
    o.report["reports"] = arr;
    add_table(o, stem, refinement_table(reports, problem.dim));
    o.status = partial ? kExitNonconvergence : (bounded ? kExitOk : kExitPropertyFailure);
    return o;
}

Outcome run_rigidity(const RunConfig& cfg, const std::string& stem) {
    const Json& p = cfg.params;
    const int n = geti(p, "n"), k = geti(p, "k");
    const bool quadratic = gets(p, "candidate") == "quadratic";
    const EntireCandidate cand = quadratic ? EntireCandidate::quadratic(n, k)
                                           : EntireCandidate::perturbed_quadratic(n, k, getd(p, "amplitude"));
    RigidityOptions opts;
    opts.k = k;
    opts.schedule = p.at("schedule").get<std::vector<double>>();
    opts.resolution = geti(p, "res");
    opts.beta = getd(p, "beta");
    opts.tol = getd(p, "tol");
    opts.noise_floor = getd(p, "noise-floor");
    opts.seed = cfg.seed();

    Outcome o;
    o.report = header(cfg);
    try {
        const RigidityTrace trace = rigidity_experiment(cand, opts);
        bool ok = true;
        if (quadratic) {
            for (const auto& l : trace.levels) ok &= l.osc <= getd(p, "osc-flat");
        } else {
            ok = trace.exponent <= getd(p, "exponent-max");  // false for NaN
        }
        o.report["trace"] = to_json(trace);
        o.report["passed"] = ok;
        add_table(o, stem, rigidity_table(trace));
        o.status = trace.partial ? kExitNonconvergence : (ok ? kExitOk : kExitPropertyFailure);
    } catch (const GrowthViolation& e) {
        o.report["error"] = e.what();
        o.report["passed"] = false;
        o.status = kExitPropertyFailure;
    }
    return o;
}

Outcome run_radial(const RunConfig& cfg, const std::string& stem) {
    const Json& p = cfg.params;
    const int n = geti(p, "n"), k = geti(p, "k");
    const double R = getd(p, "R");
    const double f = parse_rhs(gets(p, "f"), false).rhs({}, 0.0, {});
    const RadialProfile prof = solve_radial(R, n, k, f, geti(p, "mesh"));
    // Least-squares fit of u = c(r² − R²)/2.
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < prof.r().size(); ++i) {
        const double q = 0.5 * (prof.r()[i] * prof.r()[i] - R * R);
        num += q * prof.u()[i];
        den += q * q;
    }
    const double fitted = num / den;
    const double exact = radial_coefficient(n, k, f);
    const double err = std::abs(fitted - exact) / exact;

    Outcome o;
    o.report = header(cfg);
    o.report["coefficient_fit"] = fitted;
    o.report["coefficient_exact"] = exact;
    o.report["relative_error"] = err;
    o.report["u0"] = prof(0.0);
    o.report["passed"] = err <= getd(p, "rel");
    add_table(o, stem, profile_table(prof));
    o.status = err <= getd(p, "rel") ? kExitOk : kExitPropertyFailure;
    return o;
}

}  // namespace

std::uint64_t RunConfig::seed() const { return params.at("seed").get<std::uint64_t>(); }
std::string RunConfig::out_dir() const { return params.at("out").get<std::string>(); }

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, _] : defaults_table()) v.push_back(name);
        return v;
    }();
    return names;
}

Json command_defaults(const std::string& command) {
    const auto it = defaults_table().find(command);
    if (it == defaults_table().end()) throw ConfigError("unknown command '" + command + "'");
    return it->second;
}

RunConfig resolve_config(const std::string& command, const Json& file_params, const Json& overrides) {
    RunConfig cfg{command, command_defaults(command)};
    if (!file_params.is_null()) merge(cfg.params, file_params, "config file");
    if (!overrides.is_null()) merge(cfg.params, overrides, "flags");
    try {
        if (cfg.params.at("seed").is_number_integer() && cfg.params.at("seed").get<long long>() < 0 &&
            !cfg.params.at("seed").is_number_unsigned())
            throw ConfigError("seed must be nonnegative");
        validate(command, cfg.params);
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("invalid parameter value: ") + e.what());
    }
    return cfg;
}

RunConfig parse_command_line(int argc, const char* const* argv) {
    CLI::App app{"k-Hessian solver and estimate harness", "khess"};
    std::string config_path;
    std::map<std::string, std::map<std::string, std::string>> raw;
    std::map<std::string, std::vector<std::pair<std::string, CLI::Option*>>> options;
    app.add_option("--config", config_path, "JSON config; flags override its values");
    std::string top_out, top_seed;
    auto* top_out_opt = app.add_option("--out", top_out, "output directory");
    auto* top_seed_opt = app.add_option("--seed", top_seed, "random seed");
    app.require_subcommand(0, 1);
    for (const auto& name : command_names()) {
        static const std::map<std::string, std::string> about{
            {"solve", "solve sigma_k(D^2 u) = f on a box with zero boundary data"},
            {"verify-lemmas", "randomized inequality suites on cone spectra"},
            {"pogorelov", "refinement scans of the interior second-derivative quantities"},
            {"rigidity", "rescaled sublevel-set experiment for an entire candidate"},
            {"oracle-radial", "radial profile of the ball problem and its quadratic fit"}};
        auto* sub = app.add_subcommand(name, about.at(name));
        sub->add_option("--config", config_path, "JSON config; flags override its values");
        const Json defaults = command_defaults(name);
        for (auto it = defaults.begin(); it != defaults.end(); ++it) {
            std::string& slot = raw[name][it.key()];
            auto* opt = sub->add_option("--" + it.key(), slot, "default " + it.value().dump());
            options[name].push_back({it.key(), opt});
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        RunConfig help{"help", Json{{"text", subs.empty() ? app.help() : subs.front()->help()}}};
        return help;
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }

    Json file_params;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot read config file '" + config_path + "'");
        try {
            file_params = Json::parse(in);
        } catch (const Json::exception& e) {
            throw ConfigError("malformed config file: " + std::string(e.what()));
        }
        if (!file_params.is_object()) throw ConfigError("config file must hold a JSON object");
    }

    std::string command;
    const auto subs = app.get_subcommands();
    if (!subs.empty())
        command = subs.front()->get_name();
    else if (file_params.is_object() && file_params.contains("command") && file_params["command"].is_string())
        command = file_params["command"].get<std::string>();
    else
        throw ConfigError("no command given; expected one of: solve, verify-lemmas, pogorelov, rigidity, oracle-radial");
    if (file_params.is_object() && file_params.contains("command") &&
        (!file_params["command"].is_string() || file_params["command"].get<std::string>() != command))
        throw ConfigError("config file command does not match '" + command + "'");

    const Json defaults = command_defaults(command);
    Json overrides = Json::object();
    if (top_out_opt->count() > 0) overrides["out"] = top_out;
    if (top_seed_opt->count() > 0) overrides["seed"] = parse_flag(defaults.at("seed"), top_seed, "seed");
    for (const auto& [key, opt] : options[command])
        if (opt->count() > 0) overrides[key] = parse_flag(defaults.at(key), raw[command][key], key);
    return resolve_config(command, file_params, overrides);
}

int run(const RunConfig& cfg, std::ostream& log) {
    const std::string stem = cfg.command + "-" + std::to_string(cfg.seed());
    Outcome o;
    try {
        if (cfg.command == "solve")
            o = run_solve(cfg, stem);
        else if (cfg.command == "verify-lemmas")
            o = run_verify(cfg, stem);
        else if (cfg.command == "pogorelov")
            o = run_pogorelov(cfg, stem);
        else if (cfg.command == "rigidity")
            o = run_rigidity(cfg, stem);
        else if (cfg.command == "oracle-radial")
            o = run_radial(cfg, stem);
        else
            throw ConfigError("unknown command '" + cfg.command + "'");
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DomainError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    o.report["exit_status"] = o.status;
    o.files.insert(o.files.begin(), {stem + ".json", dump(o.report)});

    namespace fs = std::filesystem;
    const fs::path dir(cfg.out_dir());
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        log << "i/o error: cannot create output directory '" << dir.string() << "'\n";
        return kExitIo;
    }
    for (const auto& f : o.files) {
        std::ofstream out(dir / f.name, std::ios::binary | std::ios::trunc);
        out << f.content;
        out.flush();
        if (!out) {
            log << "i/o error: cannot write '" << (dir / f.name).string() << "'\n";
            return kExitIo;
        }
        log << "wrote " << (dir / f.name).string() << "\n";
    }
    log << cfg.command << ": exit " << o.status << "\n";
    return o.status;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = parse_command_line(argc, argv);
    } catch (const ConfigError& e) {
        err << "khess: " << e.what() << "\n";
        return kExitConfig;
    }
    if (cfg.command == "help") {
        out << cfg.params.at("text").get<std::string>();
        return kExitOk;
    }
    return run(cfg, out);
}

}  // namespace khess
