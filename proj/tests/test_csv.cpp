#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

#include "kinuq/csv.hpp"
#include "kinuq/presets.hpp"

namespace csv = kinuq::csv;
namespace preset = kinuq::preset;
using kinuq::MomentRecord;
using kinuq::MomentSeries;

namespace {

std::string tmp_path(const std::string& name) {
    return std::string("/tmp/kinuq_test_") + name;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in),
            std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("format_number keeps 15 significant digits") {
    // short decimal literals come back bit-exact
    for (double x : {0.1, -2.5e-17, 6.02214076e23, 0.0, -1.0, 0.5}) {
        const double back = std::stod(csv::format_number(x));
        REQUIRE(back == x);
    }
    // arbitrary doubles round-trip to within the printed precision
    for (double x : {1.0 / 3.0, std::exp(1.0), kinuq::kPi * 1e10}) {
        const double back = std::stod(csv::format_number(x));
        REQUIRE(std::abs(back - x) <= 1e-14 * std::abs(x));
    }
    REQUIRE(csv::format_number(1.0) == "1");
    REQUIRE(csv::format_number(0.5) == "0.5");
}

TEST_CASE("moment series round-trips through a file") {
    MomentSeries s;
    for (int i = 0; i < 4; ++i) {
        MomentRecord r;
        r.time = 0.25 * i;
        r.mass = 1.0;
        r.mean = std::exp(-r.time) / 3.0;
        r.energy = 1.0 / (1.0 + i);
        r.stderr_mean = 1e-3 * i;
        r.stderr_energy = 2e-3 * i;
        s.push(r);
    }
    const auto path = tmp_path("moments.csv");
    csv::write_moments(path, s, true);
    const auto tab = csv::read_table(path);
    REQUIRE(tab.header ==
            std::vector<std::string>{"t", "mass", "mean", "energy",
                                     "stderr_mean", "stderr_energy"});
    REQUIRE(tab.rows.size() == 4);
    auto close = [](double a, double b) {
        return std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(b));
    };
    for (std::size_t i = 0; i < 4; ++i) {
        REQUIRE(tab.rows[i][tab.column("t")] == s[i].time); // short decimals
        REQUIRE(close(tab.rows[i][tab.column("mean")], s[i].mean));
        REQUIRE(close(tab.rows[i][tab.column("stderr_energy")],
                      s[i].stderr_energy));
    }
    REQUIRE_THROWS_AS(tab.column("no_such_column"), csv::MissingData);

    csv::write_moments(path, s, false);
    REQUIRE(csv::read_table(path).header.size() == 4);
    std::remove(path.c_str());
}

TEST_CASE("read_table parses subnormal and special cells") {
    const auto path = tmp_path("subnormal.csv");
    // tail densities routinely underflow past 1e-308; they must come back as
    // the subnormal value, not as a parse error
    std::ofstream(path) << "v,f\n0.5,3.39599309556742e-313\n1,inf\n";
    const auto tab = csv::read_table(path);
    REQUIRE(tab.rows[0][1] > 0.0);
    REQUIRE(tab.rows[0][1] < 1e-308);
    REQUIRE(std::isinf(tab.rows[1][1]));

    std::ofstream(path, std::ios::trunc) << "v,f\n0.5,12abc\n";
    REQUIRE_THROWS_AS(csv::read_table(path), csv::MissingData);
    std::ofstream(path, std::ios::trunc) << "v,f\n0.5,\n";
    REQUIRE_THROWS_AS(csv::read_table(path), csv::MissingData);
    std::remove(path.c_str());
}

TEST_CASE("read_table rejects unusable input") {
    REQUIRE_THROWS_AS(csv::read_table("/tmp/kinuq_no_such_file.csv"),
                      csv::MissingData);

    const auto path = tmp_path("bad.csv");
    std::ofstream(path) << "a,b\n1,2\n3\n";
    REQUIRE_THROWS_AS(csv::read_table(path), csv::MissingData);

    std::ofstream(path, std::ios::trunc) << "";
    REQUIRE_THROWS_AS(csv::read_table(path), csv::MissingData);

    std::ofstream(path, std::ios::trunc) << "a,b\n";
    REQUIRE_THROWS_AS(csv::read_table(path), csv::MissingData);
    std::remove(path.c_str());
}

TEST_CASE("options parse typed values") {
    preset::RunOptions o;
    o.set("model", "consensus");
    o.set("q0", "0.5");
    o.set("lambda", "0.3");
    o.set("domain", "-2.5:4");
    o.set("particles", "100000");
    o.set("seed", "42");
    o.set("threads", "3");
    REQUIRE(o.model == "consensus");
    REQUIRE(o.q0 == 0.5);
    REQUIRE(o.lambda == 0.3);
    REQUIRE(o.domain_lo == -2.5);
    REQUIRE(o.domain_hi == 4.0);
    REQUIRE(o.particles == 100000u);
    REQUIRE(o.seed == 42u);
    REQUIRE(o.threads == 3u);
    REQUIRE_FALSE(o.dt.has_value());

    REQUIRE_THROWS_AS(o.set("q0", "zero"), preset::ConfigError);
    REQUIRE_THROWS_AS(o.set("domain", "1:"), preset::ConfigError);
    REQUIRE_THROWS_AS(o.set("domain", "3:1"), preset::ConfigError);
    REQUIRE_THROWS_AS(o.set("domain", "1"), preset::ConfigError);
    REQUIRE_THROWS_AS(o.set("particles", "-5"), preset::ConfigError);
    REQUIRE_THROWS_AS(o.set("banana", "1"), preset::ConfigError);
}

TEST_CASE("config files allow comments and reject junk") {
    const auto path = tmp_path("run.cfg");
    std::ofstream(path) << "# a comment line\n"
                           "model = kac   # trailing comment\n"
                           "\n"
                           "  t-final = 2.5\n"
                           "nodes=11\n";
    const auto o = preset::load_config_file(path);
    REQUIRE(o.model == "kac");
    REQUIRE(o.t_final == 2.5);
    REQUIRE(o.nodes == 11u);

    std::ofstream(path, std::ios::trunc) << "model kac\n";
    try {
        preset::load_config_file(path);
        FAIL("missing '=' must raise");
    } catch (const preset::ConfigError& e) {
        REQUIRE(std::string(e.what()).find(":1:") != std::string::npos);
    }
    std::remove(path.c_str());

    REQUIRE_THROWS_AS(preset::load_config_file("/tmp/kinuq_no_such.cfg"),
                      preset::ConfigError);
}

TEST_CASE("command line wins over the config file") {
    preset::RunOptions base;
    base.model = "kac";
    base.dt = 0.01;
    base.seed = 1;
    preset::RunOptions top;
    top.dt = 0.001;
    top.particles = 500;
    const auto merged = preset::merge(base, top);
    REQUIRE(merged.model == "kac");      // untouched by top
    REQUIRE(merged.dt == 0.001);         // overridden
    REQUIRE(merged.particles == 500u);   // added
    REQUIRE(merged.seed == 1u);
}

TEST_CASE("report rows score observations") {
    REQUIRE(preset::rel_row("x", 1.02, 1.0, 0.05).pass);
    REQUIRE_FALSE(preset::rel_row("x", 1.10, 1.0, 0.05).pass);
    REQUIRE_FALSE(preset::rel_row("x", std::nan(""), 1.0, 0.05).pass);
    REQUIRE_FALSE(
        preset::rel_row("x", std::numeric_limits<double>::infinity(), 1.0, 0.5)
            .pass);
    REQUIRE(preset::abs_row("x", 0.003, 0.0, 0.01).pass);
    REQUIRE_FALSE(preset::abs_row("x", 0.03, 0.0, 0.01).pass);
    REQUIRE(preset::at_least("x", 0.5, 0.3).pass);
    REQUIRE_FALSE(preset::at_least("x", 0.2, 0.3).pass);
    REQUIRE(preset::at_most("x", 0.2, 0.3).pass);
    REQUIRE_FALSE(preset::at_most("x", 0.5, 0.3).pass);
    REQUIRE(preset::bool_row("x", true).pass);
    REQUIRE_FALSE(preset::bool_row("x", false).pass);

    std::vector<preset::ReportRow> rows{preset::at_least("a", 1.0, 0.0),
                                        preset::bool_row("b", true)};
    REQUIRE(preset::all_pass(rows));
    rows.push_back(preset::abs_row("c", 9.0, 0.0, 1.0));
    REQUIRE_FALSE(preset::all_pass(rows));
}

TEST_CASE("reports list each row and an overall verdict") {
    const auto path = tmp_path("report.txt");
    std::vector<preset::ReportRow> rows{
        preset::rel_row("energy", 0.101, 0.1, 0.05),
        preset::at_most("residual", 2e-13, 1e-12)};
    preset::write_report(path, "steady-state check", rows);
    auto text = slurp(path);
    REQUIRE(text.find("steady-state check") != std::string::npos);
    REQUIRE(text.find("PASS  energy") != std::string::npos);
    REQUIRE(text.find("PASS  residual") != std::string::npos);
    REQUIRE(text.find("overall: PASS") != std::string::npos);

    rows.push_back(preset::bool_row("converged", false));
    preset::write_report(path, "steady-state check", rows);
    text = slurp(path);
    REQUIRE(text.find("FAIL  converged") != std::string::npos);
    REQUIRE(text.find("overall: FAIL") != std::string::npos);
    std::remove(path.c_str());
}
