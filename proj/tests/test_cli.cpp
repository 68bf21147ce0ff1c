#include "khess/cli.hpp"
#include "khess/report.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace khess;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("khess-test-" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(std::vector<std::string> args, std::string* err_text = nullptr) {
    args.insert(args.begin(), "khess");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    if (err_text) *err_text = err.str();
    return code;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

std::size_t count_files(const fs::path& dir) {
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
    return n;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("number formatting") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(2.0) == "2");
    CHECK(format_number(-1e-300) == "-1e-300");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(-INFINITY) == "-inf");
    const double x = 0.1 + 0.2;
    CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("refinement table rows and flags") {
    EstimateReport r;
    r.quantity = "theorem2";
    for (int res : {33, 65, 129, 257}) r.levels.push_back({res, res != 257, 0.5, {0.5, 0.5, 0}, 3, 1e-9});
    const CsvTable t = refinement_table({r}, 2);
    CHECK(t.rows.size() == 4);
    CHECK(t.columns.back().name == "flag");
    CHECK(t.rows[3].back() == "partial");
    CHECK(t.rows[0].back().empty());
    const std::string csv = t.render();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(t.schema()["columns"].size() == t.columns.size());

    CsvTable bad;
    bad.columns = {{"a", ""}, {"b", ""}};
    CHECK_THROWS(bad.add_row({"1"}));
}

TEST_CASE("rigidity table flags") {
    RigidityTrace tr;
    RigidityLevel solved, noise, failed;
    solved.solved = noise.solved = true;
    solved.in_fit = true;
    tr.levels = {solved, noise, failed};
    const CsvTable t = rigidity_table(tr);
    CHECK(t.rows[0].back().empty());
    CHECK(t.rows[1].back() == "noise");
    CHECK(t.rows[2].back() == "partial");
}

}

TEST_SUITE("cli") {

TEST_CASE("lemma verification run") {
    TempDir d("verify");
    CHECK(run_cli({"verify-lemmas", "--n", "3", "--k", "2", "--l", "1", "--samples", "10000", "--seed", "7", "--out",
                   d.path.string()}) == kExitOk);
    const Json j = Json::parse(slurp(d.path / "verify-lemmas-7.json"));
    CHECK(j["passed"] == true);
    for (const auto& s : j["suites"]) CHECK(s["violations"] == 0);
    CHECK(fs::exists(d.path / "verify-lemmas-7.csv"));
    CHECK(fs::exists(d.path / "verify-lemmas-7.columns.json"));
}

TEST_CASE("radial oracle run") {
    TempDir d("radial");
    CHECK(run_cli({"oracle-radial", "--n", "3", "--k", "2", "--f", "1", "--R", "1", "--out", d.path.string()}) == kExitOk);
    const Json j = Json::parse(slurp(d.path / "oracle-radial-0.json"));
    CHECK(j["coefficient_fit"].get<double>() == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-10));
    CHECK(j["relative_error"].get<double>() <= 1e-10);
}

TEST_CASE("solve run writes the field") {
    TempDir d("solve");
    CHECK(run_cli({"solve", "--n", "2", "--k", "2", "--res", "17", "--f", "sine", "--out", d.path.string()}) == kExitOk);
    const Json j = Json::parse(slurp(d.path / "solve-0.json"));
    CHECK(j["report"]["converged"] == true);
    CHECK(j["checks"]["shift"]["passed"] == true);
    CHECK(fs::exists(d.path / "solve-0.field"));
}

TEST_CASE("configuration errors write nothing") {
    TempDir d("config");
    const fs::path cfg = d.path / "bad.json";
    std::ofstream(cfg) << "{ \"n\": 3, ";
    const fs::path out = d.path / "out";
    fs::create_directories(out);
    std::string err;
    CHECK(run_cli({"verify-lemmas", "--config", cfg.string(), "--out", out.string()}, &err) == kExitConfig);
    CHECK_FALSE(err.empty());
    CHECK(run_cli({"verify-lemmas", "--bogus", "1", "--out", out.string()}) == kExitConfig);
    CHECK(run_cli({"verify-lemmas", "--n", "three", "--out", out.string()}) == kExitConfig);
    CHECK(run_cli({"no-such-command"}) == kExitConfig);
    CHECK(run_cli({"verify-lemmas", "--k", "5", "--n", "3", "--out", out.string()}) == kExitConfig);
    CHECK(count_files(out) == 0);

    std::ofstream(d.path / "typed.json") << R"({"command": "verify-lemmas", "samples": "many"})";
    CHECK(run_cli({"verify-lemmas", "--config", (d.path / "typed.json").string(), "--out", out.string()}) == kExitConfig);
    CHECK(count_files(out) == 0);
}

TEST_CASE("config file with flag overrides") {
    TempDir d("override");
    std::ofstream(d.path / "cfg.json") << R"({"command": "verify-lemmas", "n": 4, "k": 3, "l": 2, "samples": 500, "seed": 3})";
    CHECK(run_cli({"verify-lemmas", "--config", (d.path / "cfg.json").string(), "--seed", "5", "--out", d.path.string()}) ==
          kExitOk);
    const Json j = Json::parse(slurp(d.path / "verify-lemmas-5.json"));
    CHECK(j["config"]["n"] == 4);
    CHECK(j["config"]["samples"] == 500);
}

TEST_CASE("unwritable output directory") {
    CHECK(run_cli({"oracle-radial", "--out", "/proc/khess-no-such-dir"}) == kExitIo);
}

TEST_CASE("byte-identical output under a fixed seed") {
    TempDir a("det-a"), b("det-b");
    for (const auto* d : {&a, &b})
        REQUIRE(run_cli({"verify-lemmas", "--n", "5", "--k", "3", "--l", "1", "--samples", "2000", "--seed", "9", "--out",
                         d->path.string()}) == kExitOk);
    for (const char* f : {"verify-lemmas-9.json", "verify-lemmas-9.csv", "verify-lemmas-9.columns.json"})
        CHECK(slurp(a.path / f) == slurp(b.path / f));
}

}
