#include <doctest.h>

#include <cmath>
#include <sstream>

#include "maser/errors.hpp"
#include "maser/sweep.hpp"
#include "maser/units.hpp"

using namespace maser;

namespace {

SweepConfig cfg_from(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string csv(const SweepResultGrid& g) {
    std::ostringstream out;
    g.write_csv(out);
    return out.str();
}

PointRecord ok_record(double n, double w) {
    PointRecord r;
    r.occupation = n;
    r.linewidth_hz = w;
    r.emission_offset_hz = 0.0;
    r.residual = 0.0;
    return r;
}

SweepResultGrid synthetic_grid(const std::vector<PointRecord>& records, std::size_t rows, std::size_t cols) {
    SweepResultGrid g;
    g.axes = {{"pump.frequency_ghz", 12.6, 12.8, rows, false}, {"pump.amplitude_mhz", 100.0, 400.0, cols, true}};
    auto a = g.axes[0].values(), b = g.axes[1].values();
    for (double x : a)
        for (double y : b) g.coordinates.push_back({x, y});
    g.records = records;
    return g;
}

const char* small_sweep =
    "transmon.frequency_ghz = 6.963\n"
    "axis.1 = pump.frequency_ghz 12.68 12.70 3\n"
    "axis.2 = pump.amplitude_mhz 175 700 2 geometric\n";

}  // namespace

TEST_CASE("config parser accepts the documented syntax") {
    auto cfg = cfg_from(
        "# comment line\n"
        "snail.flux = 0.25   # trailing comment\n"
        "axis.1 = transmon.frequency_ghz 6.9 7.0 5\n"
        "axis.2 = pump.amplitude_mhz 100 800 4 geometric\n"
        "pump.rule = loose\n"
        "solver.arnoldi_nev = 6\n"
        "run.threads = 2\n"
        "output.path = out.csv\n");
    CHECK(cfg.params.at("snail.flux") == 0.25);
    REQUIRE(cfg.axes.size() == 2);
    CHECK(cfg.axes[1].geometric);
    CHECK(cfg.pump_rule == PumpRule::Loose);
    CHECK(cfg.solver.arnoldi_nev == 6);
    CHECK(cfg.solver.method == GapMethod::Sectors);
    CHECK(cfg.threads == 2);
    CHECK(cfg.output_path == "out.csv");
    CHECK(cfg.params.size() == parameter_registry().size());
}

TEST_CASE("config parser rejects malformed input") {
    for (const char* bad : {"snail.flux 0.2\n", "snail.flux = 0.2\nsnail.flux = 0.3\n", "bogus.key = 1\n",
                            "snail.flux = abc\n", "snail.flux =\n", "cutoff.snail = 2.5\n", "cutoff.cavity = 0\n",
                            "axis.2 = snail.flux 0 1 3\n", "axis.1 = snail.flux 1 0 3\n", "axis.1 = snail.flux 0 1 0\n",
                            "axis.1 = nothing 0 1 3\n", "axis.1 = snail.flux 0 1 3 cubic\n",
                            "axis.1 = pump.amplitude_mhz 0 100 3 geometric\n", "axis.4 = snail.flux 0 1 3\n",
                            "axis.1 = snail.flux 0 1 3\naxis.2 = snail.flux 0 1 3\n", "pump.rule = sometimes\n",
                            "model.counter_rotating = keep\nsolver.method = sectors\n", "solver.method = magic\n",
                            "run.threads = 0\n", "snail.c_s_ff = -3\n", "atom.strict_labels = maybe\n"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(cfg_from(bad), ConfigError);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"), IoError);
}

TEST_CASE("counter-rotating terms switch the default solver") {
    CHECK(cfg_from("model.counter_rotating = keep\n").solver.method == GapMethod::Auto);
    CHECK(cfg_from("").solver.method == GapMethod::Sectors);
}

TEST_CASE("axis values") {
    AxisSpec lin{"snail.flux", 0.0, 1.0, 5, false};
    auto v = lin.values();
    CHECK(v == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    AxisSpec geo{"pump.amplitude_mhz", 175.0, 700.0, 3, true};
    auto g = geo.values();
    CHECK(g[0] == 175.0);
    CHECK(g[1] == doctest::Approx(350.0));
    CHECK(g[2] == 700.0);
    AxisSpec one{"snail.flux", 0.3, 0.3, 1, false};
    CHECK(one.values() == std::vector<double>{0.3});
}

TEST_CASE("config hash tracks content") {
    auto a = cfg_from(small_sweep);
    auto b = cfg_from(std::string("# different comments\n") + small_sweep);
    CHECK(a.hash() == b.hash());
    CHECK(a.hash() == fnv1a64(a.canonical()));
    auto c = cfg_from(std::string(small_sweep) + "snail.flux = 0.231\n");
    CHECK(a.hash() != c.hash());
    CHECK(fnv1a64("") == 14695981039346656037ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("a one-point sweep equals a direct evaluation") {
    auto cfg = cfg_from(
        "transmon.frequency_ghz = 6.963\n"
        "axis.1 = pump.frequency_ghz 12.69 12.69 1\n");
    auto grid = run_sweep(cfg, {1, true});
    REQUIRE(grid.records.size() == 1);
    auto p = cfg.params;
    p["pump.frequency_ghz"] = 12.69;
    ComponentCache cache(false);
    auto direct = evaluate_point(cfg, p, cache);
    REQUIRE(direct.status == PointStatus::Ok);
    CHECK(*grid.records[0].occupation == *direct.occupation);
    CHECK(*grid.records[0].linewidth_hz == *direct.linewidth_hz);
    CHECK(*direct.residual < 1e-10);
    CHECK(*direct.occupation > 1.0);
}

TEST_CASE("sweeps are deterministic across threads and caching") {
    auto cfg = cfg_from(small_sweep);
    auto serial = run_sweep(cfg, {1, true});
    auto threaded = run_sweep(cfg, {3, true});
    auto uncached = run_sweep(cfg, {2, false});
    CHECK(csv(serial) == csv(threaded));
    CHECK(csv(serial) == csv(uncached));
    for (std::size_t i = 0; i < serial.records.size(); ++i) {
        CHECK(*serial.records[i].occupation == *threaded.records[i].occupation);
        CHECK(*serial.records[i].linewidth_hz == *uncached.records[i].linewidth_hz);
    }
    CHECK(serial.config_hash == cfg.hash());
}

TEST_CASE("sweep CSV layout") {
    auto cfg = cfg_from(small_sweep);
    auto grid = run_sweep(cfg, {1, true});
    auto text = csv(grid);
    std::istringstream in(text);
    std::string header;
    std::getline(in, header);
    CHECK(header == "pump.frequency_ghz,pump.amplitude_mhz,occupation,linewidth_hz,emission_offset_hz,residual,status");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.substr(line.size() - 3) == ",ok");
    }
    CHECK(rows == 6);
    // last axis varies fastest
    CHECK(grid.coordinates[0] == std::vector<double>{12.68, 175.0});
    CHECK(grid.coordinates[1] == std::vector<double>{12.68, 700.0});
    CHECK(grid.index({1, 1}) == 3);
    CHECK(grid.unravel(5) == std::vector<std::size_t>{2, 1});

    std::ostringstream meta;
    grid.write_metadata(meta, cfg);
    CHECK(meta.str().find("config_hash = ") != std::string::npos);
    CHECK(meta.str().find("points = 6") != std::string::npos);
}

TEST_CASE("invalid points carry no payload") {
    auto cfg = cfg_from("axis.1 = transmon.frequency_ghz 6.963 40 2\n");
    auto grid = run_sweep(cfg, {1, true});
    REQUIRE(grid.records.size() == 2);
    CHECK(grid.records[0].status == PointStatus::Ok);
    const auto& bad = grid.records[1];
    CHECK(bad.status == PointStatus::Invalid);
    CHECK_FALSE(bad.occupation.has_value());
    CHECK_FALSE(bad.linewidth_hz.has_value());
    CHECK_FALSE(bad.residual.has_value());
    CHECK_FALSE(bad.message.empty());
    auto text = csv(grid);
    CHECK(text.find("40,,,,,invalid") != std::string::npos);
    CHECK(to_string(PointStatus::Multistable) == "multistable");
    CHECK(to_string(PointStatus::SolverFailed) == "solver_failed");
}

TEST_CASE("extrema on synthetic grids") {
    SUBCASE("single point") {
        auto g = synthetic_grid({ok_record(0.5, 100.0)}, 1, 1);
        auto e = locate_extrema(g);
        CHECK(e.max_occupation.value == 0.5);
        CHECK(e.min_linewidth.index == std::vector<std::size_t>{0, 0});
    }
    SUBCASE("planted extrema and failed points") {
        std::vector<PointRecord> r(6, ok_record(0.1, 1000.0));
        r[4] = ok_record(2.0, 900.0);
        r[2] = ok_record(0.2, 40.0);
        PointRecord failed;
        failed.status = PointStatus::SolverFailed;
        r[5] = failed;
        auto g = synthetic_grid(r, 3, 2);
        auto e = locate_extrema(g);
        CHECK(e.max_occupation.index == std::vector<std::size_t>{2, 0});
        CHECK(e.max_occupation.coordinates == g.coordinates[4]);
        CHECK(e.min_linewidth.index == std::vector<std::size_t>{1, 0});
        CHECK(e.min_linewidth.value == 40.0);
    }
    SUBCASE("ties go to the lowest index") {
        std::vector<PointRecord> r(4, ok_record(1.0, 10.0));
        auto e = locate_extrema(synthetic_grid(r, 2, 2));
        CHECK(e.max_occupation.index == std::vector<std::size_t>{0, 0});
        CHECK(e.min_linewidth.index == std::vector<std::size_t>{0, 0});
    }
    SUBCASE("no successful points") {
        PointRecord failed;
        failed.status = PointStatus::Invalid;
        CHECK_THROWS_AS(locate_extrema(synthetic_grid({failed}, 1, 1)), SolverError);
    }
}

TEST_CASE("device_from converts units") {
    auto d = device_from(default_parameters());
    CHECK(d.snail.flux_ext == doctest::Approx(units::two_pi * 0.23));
    CHECK(d.rates.cavity == doctest::Approx(units::two_pi * 19.7e3));
    CHECK(d.grids.cavity_spacing == doctest::Approx(4.2 / 2000.0));
    auto pump = pump_from(default_parameters(), PumpRule::Strict);
    CHECK(pump.amplitude == doctest::Approx(units::two_pi * 175e6));
    CHECK(pump.frequency == doctest::Approx(units::two_pi * 12.693e9));
    CHECK(std::isnan(default_parameters().at("transmon.frequency_ghz")));
}
