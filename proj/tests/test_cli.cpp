#include "sispatch/cli/commands.hpp"
#include "sispatch/cli/parallel.hpp"
#include "sispatch/error.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

using namespace sispatch;
using namespace sispatch::cli;

namespace {

const std::string kData = SISPATCH_TEST_DATA;

std::string error_message(const std::string& text)
{
    try {
        parse_scenario(text);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigError);
        return e.what();
    }
    FAIL("expected a ConfigError");
    return {};
}

std::string csv(const ResultTable& t)
{
    std::ostringstream s;
    t.write_csv(s);
    return s.str();
}

// Only the tail of stdout matters; exit status is decoded from system().
int run_cli(const std::string& args)
{
    const std::string cmd = std::string(SISPATCH_CLI_BINARY) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

const std::string kMinimal = R"({"connectivity": {"matrix": [[0, 1], [1, 0]]}, "beta": [2, 0.5], "gamma": [1, 1]})";

} // namespace

TEST_CASE("scenario: minimal document and defaults")
{
    const Scenario sc = parse_scenario(kMinimal);
    CHECK(sc.L.size() == 2);
    CHECK(sc.params.dS == 1.0);
    CHECK(sc.params.dI == 1.0);
    CHECK(sc.params.N == 1.0);
    CHECK_FALSE(sc.sweep.has_value());
    CHECK(std::abs(sc.alpha[0] - 0.5) <= 1e-15);
    CHECK(sc.config_hash.size() == 16);
    CHECK(parse_scenario(kMinimal).config_hash == sc.config_hash);
    CHECK(parse_scenario(R"({"connectivity": {"matrix": [[0, 1], [1, 0]]}, "beta": [2, 0.5], "gamma": [1, 2]})")
              .config_hash != sc.config_hash);
}

TEST_CASE("scenario: syntax errors carry line and column")
{
    std::ifstream in(kData + "/bad_syntax.json");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string msg = error_message(buf.str());
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column") != std::string::npos);
    CHECK(error_message("{\"beta\": }").find("line 1, column 10") != std::string::npos);
}

TEST_CASE("scenario: field errors name the field")
{
    CHECK(error_message(R"({"beta": [1], "gamma": [1]})").find("connectivity: missing") != std::string::npos);
    CHECK(error_message(R"({"connectivity": {"matrix": [[0, 1], [1]]}, "beta": [1, 1], "gamma": [1, 1]})")
              .find("connectivity.matrix[1]") != std::string::npos);
    CHECK(error_message(R"({"connectivity": {"matrix": [[0, 1], [1, 0]]}, "beta": [1, -1], "gamma": [1, 1]})")
              .find("beta[1]: must be >= 0") != std::string::npos);
    CHECK(error_message(R"({"connectivity": {"matrix": [[0, 1], [1, 0]]}, "beta": [1, 1], "gamma": [1]})")
              .find("gamma:") != std::string::npos);
    CHECK(error_message(R"({"connectivity": {"matrix": [[0, 1], [1, 0]]}, "beta": [1, "x"], "gamma": [1, 1]})")
              .find("beta[1]: expected a number") != std::string::npos);
    CHECK(error_message(
              R"({"connectivity": {"matrix": [[0, 1], [1, 0]]}, "beta": [1, 1], "gamma": [1, 1], "dS": 0})")
              .find("dS: must be positive") != std::string::npos);
    CHECK(error_message(R"({"connectivity": {"matrix": [[0, 1], [1, 0]]}, "beta": [1, 1], "gamma": [1, 1],
                             "sweep": {"parameter": "N", "grid": "linear", "from": 1, "to": 2, "points": 3}})")
              .find("sweep.parameter") != std::string::npos);
    CHECK(error_message(R"({"connectivity": {"matrix": [[0, 1], [1, 0]]}, "beta": [1, 1], "gamma": [1, 1],
                             "sweep": {"parameter": "dI", "grid": "geometric", "from": 0, "to": 2, "points": 3}})")
              .find("sweep: geometric grid needs positive endpoints") != std::string::npos);
}

TEST_CASE("scenario: graph validation runs at load time")
{
    try {
        load_scenario(kData + "/disconnected.json");
        FAIL("expected NotIrreducible");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotIrreducible);
    }
    CHECK_THROWS_AS(load_scenario(kData + "/does_not_exist.json"), Error);
}

TEST_CASE("grid parsing")
{
    const Grid g = parse_grid("1e-3:1e3:7:geometric");
    const Vector v = g.values();
    REQUIRE(v.size() == 7);
    CHECK(v.front() == 1e-3);
    CHECK(v.back() == 1e3);
    for (std::size_t i = 1; i < v.size(); ++i) {
        CHECK(v[i] / v[i - 1] == doctest::Approx(10.0).epsilon(1e-12));
    }
    const Vector lin = parse_grid("0:1:5:linear").values();
    CHECK(lin == Vector{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(parse_grid("2:3:1:linear").values() == Vector{2.0});
    for (const char* bad : {"1:2:3", "1:2:0:linear", "a:2:3:linear", "0:1:3:geometric", "1:2:3:log", "1:2:3.5:linear"}) {
        CHECK_THROWS_AS(parse_grid(bad), Error);
    }
}

TEST_CASE("result table")
{
    ResultTable t({{"a"}, {"b", true}});
    t.add_provenance("hello");
    t.add_row({1.0, NAN});
    t.add_row({0.1, INFINITY});
    CHECK_THROWS_AS(t.add_row({NAN, 1.0}), Error);
    CHECK_THROWS_AS(t.add_row({1.0}), Error);
    CHECK(csv(t) == "# hello\n# nullable: b\na,b\n1,nan\n0.10000000000000001,inf\n");
    CHECK(t.column_index("b") == 1);
    CHECK(format_number(-INFINITY) == "-inf");
}

TEST_CASE("parallel_map keeps order and reports the first failure")
{
    const auto sq = parallel_map(100, [](std::size_t i) { return i * i; }, 4);
    for (std::size_t i = 0; i < sq.size(); ++i) {
        CHECK(sq[i] == i * i);
    }
    try {
        parallel_map(
            50,
            [](std::size_t i) {
                if (i == 7 || i == 30) {
                    throw std::runtime_error(std::to_string(i));
                }
                return i;
            },
            4);
        FAIL("expected a throw");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "7");
    }
}

TEST_CASE("validate")
{
    std::ostringstream out;
    std::ostringstream log;
    CHECK(cmd_validate(load_scenario(kData + "/tie.json"), out, log) == 0);
    CHECK(out.str().find("patches: 3") != std::string::npos);
    CHECK(out.str().find("ties: {2}") != std::string::npos);
    CHECK(out.str().find("A3 H- and H+ nonempty, no ties: no") != std::string::npos);
    CHECK(out.str().find("symmetric: yes") != std::string::npos);
    CHECK(log.str().find("warning") != std::string::npos);

    std::ostringstream out2;
    std::ostringstream log2;
    CHECK(cmd_validate(load_scenario(kData + "/star.json"), out2, log2) == 0);
    CHECK(out2.str().find("A3 H- and H+ nonempty, no ties: yes") != std::string::npos);
    CHECK(log2.str().empty());
}

TEST_CASE("r0 sweep")
{
    const Scenario sc = load_scenario(kData + "/star.json");
    const ResultTable t = cmd_r0(sc, {});
    const auto& rows = t.rows();
    REQUIRE(rows.size() == 9 + 2);
    for (std::size_t i = 1; i < 9; ++i) {
        CHECK(rows[i][1] < rows[i - 1][1]);
        CHECK(rows[i][0] > rows[i - 1][0]);
    }
    CHECK(rows[9][0] == 0.0);
    CHECK(rows[9][1] == doctest::Approx(4.0));
    CHECK(std::isinf(rows[10][0]));
    CHECK(rows[10][1] == doctest::Approx(0.8));
    CHECK(rows[10][2] == doctest::Approx(-3.0 / 7.0));

    CommandOptions opt;
    opt.grid = parse_grid("0.5:2:4:linear");
    CHECK(cmd_r0(sc, opt).rows().size() == 4 + 2);

    const ResultTable prop = cmd_r0(load_scenario(kData + "/proportional.json"), {});
    for (const auto& r : prop.rows()) {
        CHECK(std::abs(r[1] - 2.0) <= 1e-10);
    }
}

TEST_CASE("profile sweep")
{
    const Scenario sc = load_scenario(kData + "/star.json");
    const ResultTable t = cmd_profile(sc, {});
    const std::size_t status = t.column_index("status");
    const std::size_t h2 = t.column_index("h_2");
    const std::size_t s1 = t.column_index("Sstar_1");
    int ok = 0;
    for (const auto& r : t.rows()) {
        CHECK(std::abs(r[h2] - 3.0 / 7.0) <= 1e-12);
        CHECK(r[t.column_index("dI_star_star")] == doctest::Approx(0.548584).epsilon(1e-5));
        if (r[status] == 0.0) {
            ++ok;
            double total = 0.0;
            for (std::size_t j = 0; j < 4; ++j) {
                total += r[s1 + j];
            }
            CHECK(std::abs(total - 100.0) <= 1e-9 * 100.0);
            CHECK(r[t.column_index("Jplus_2")] == 1.0);
            CHECK(r[t.column_index("Jplus_3")] == 0.0);
        } else {
            CHECK(r[status] == 2.0);
            CHECK(r[0] > 8.0);
            CHECK(std::isnan(r[s1]));
        }
    }
    CHECK(ok >= 6);
}

TEST_CASE("output is byte-identical across runs and thread counts")
{
    const Scenario sc = load_scenario(kData + "/star.json");
    CommandOptions one;
    one.threads = 1;
    CommandOptions many;
    many.threads = 8;
    const std::string a = csv(cmd_profile(sc, one));
    CHECK(a == csv(cmd_profile(sc, many)));
    CHECK(a == csv(cmd_profile(sc, one)));
    CHECK(csv(cmd_r0(sc, one)) == csv(cmd_r0(sc, many)));
    CHECK(a.find("# sispatch 0.1.0") == 0);
}

TEST_CASE("equilibrium")
{
    const Scenario sc = load_scenario(kData + "/star.json");
    std::ostringstream log;
    CommandOptions opt;
    opt.grid = parse_grid("0.1:3:4:geometric");
    const ResultTable t = cmd_equilibrium(sc, opt, log);
    REQUIRE(t.rows().size() == 4);
    for (const auto& r : t.rows()) {
        CHECK(std::abs(r[t.column_index("total")] - 100.0) <= 1e-9 * 100.0);
        CHECK(r[t.column_index("residual")] <= 1e-9 * 100.0);
    }

    std::ostringstream log2;
    try {
        cmd_equilibrium(load_scenario(kData + "/subthreshold.json"), {}, log2);
        FAIL("expected SubThreshold");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SubThreshold);
    }
    CHECK(log2.str().find("R0 = ") != std::string::npos);
}

TEST_CASE("simulate")
{
    const Scenario sc = load_scenario(kData + "/star.json");
    for (const char* init : {"dfe", "dfe-perturbed", "uniform"}) {
        CommandOptions opt;
        opt.t_end = 20.0;
        opt.stride = 2.0;
        opt.initial = init;
        std::ostringstream log;
        const ResultTable t = cmd_simulate(sc, opt, log);
        CHECK(t.rows().size() == 11);
        for (const auto& r : t.rows()) {
            CHECK(std::abs(r[t.column_index("total")] - 100.0) <= 1e-8 * 100.0);
        }
        CHECK_FALSE(log.str().empty());
    }
    CommandOptions bad;
    bad.initial = "config";
    std::ostringstream log;
    CHECK_THROWS_AS(cmd_simulate(sc, bad, log), Error);
}

TEST_CASE("star example report and bundle")
{
    const auto dir = std::filesystem::temp_directory_path() / "sispatch_star_bundle_test";
    std::filesystem::remove_all(dir);
    std::ostringstream out;
    CHECK(cmd_star_example(out, dir.string(), 3.0, 2) == 0);
    const std::string report = out.str();
    CHECK(report.find("dI* = 8.476") != std::string::npos);
    CHECK(report.find("dI** = 0.54858") != std::string::npos);
    for (const char* f : {"r0.csv", "profile.csv", "equilibrium.csv"}) {
        CHECK(std::filesystem::exists(dir / f));
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("command-line exit codes")
{
    CHECK(run_cli("--version") == 0);
    CHECK(run_cli("validate --config " + kData + "/star.json") == 0);
    CHECK(run_cli("validate --config " + kData + "/tie.json") == 0);
    CHECK(run_cli("validate --config " + kData + "/disconnected.json") == 2);
    CHECK(run_cli("validate --config " + kData + "/bad_syntax.json") == 2);
    CHECK(run_cli("r0 --config " + kData + "/star.json --grid 1:2:0:linear") == 2);
    CHECK(run_cli("equilibrium --config " + kData + "/subthreshold.json") == 4);
    CHECK(run_cli("profile --config " + kData + "/tie.json") != 0);
    CHECK(run_cli("r0 --config " + kData + "/star.json") == 0);
}
