#include <doctest.h>

#include <cmath>
#include <vector>

#include "maser/errors.hpp"
#include "maser/grid.hpp"
#include "maser/linalg.hpp"

using namespace maser;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

std::vector<double> sample(const PhaseGrid& g, double (*f)(double)) {
    std::vector<double> v;
    for (double x : g.coordinates()) v.push_back(f(x));
    return v;
}

// Lowest levels of -1/2 d^2 + x^2/2 on an open grid of width 20.
std::vector<double> harmonic_levels(std::size_t n) {
    auto g = PhaseGrid::open(n, 20.0 / static_cast<double>(n));
    auto h = build_second_derivative(g).scaled(-0.5);
    std::vector<double> u;
    for (double x : g.coordinates()) u.push_back(0.5 * x * x);
    auto e = lowest_eigenpairs(h.plus_diagonal(u), 6).values;
    return {e.data(), e.data() + e.size()};
}

}  // namespace

TEST_CASE("periodic grid geometry") {
    auto g = PhaseGrid::periodic(1000, 2.0 * M_PI);
    CHECK(std::abs(g.spacing * 1000 - 2.0 * M_PI) < 1e-12 * 2.0 * M_PI);
    CHECK_THROWS_AS(PhaseGrid::periodic(2, 2.0 * M_PI), ConfigError);
    CHECK_THROWS_AS(PhaseGrid::open(2, 0.1), ConfigError);
    CHECK_THROWS_AS(PhaseGrid::open(10, -0.1), ConfigError);
}

TEST_CASE("open grid is centred on zero") {
    auto g = PhaseGrid::open(2001, 0.01);
    CHECK(std::abs(g.coordinate(1000)) < 1e-14);
    CHECK(std::abs(g.coordinate(0) + g.coordinate(2000)) < 1e-12);
}

TEST_CASE("derivative of a constant vanishes on periodic grids") {
    for (std::size_t n : {3u, 17u, 1000u}) {
        auto g = PhaseGrid::periodic(n, 4.0 * M_PI);
        std::vector<double> one(n, 1.0);
        for (double v : build_first_derivative(g).apply(one)) CHECK(v == 0.0);
        for (double v : build_second_derivative(g).apply(one)) CHECK(std::abs(v) < 1e-9);
    }
}

TEST_CASE("first derivative of sin is cos within h^2") {
    auto g = PhaseGrid::periodic(1000, 2.0 * M_PI);
    auto d = build_first_derivative(g).apply(sample(g, std::sin));
    CHECK(max_abs_diff(d, sample(g, std::cos)) <= g.spacing * g.spacing);
}

TEST_CASE("second derivative of cos is -cos within h^2") {
    auto g = PhaseGrid::periodic(1000, 2.0 * M_PI);
    auto d = build_second_derivative(g).apply(sample(g, std::cos));
    std::vector<double> expect;
    for (double x : g.coordinates()) expect.push_back(-std::cos(x));
    CHECK(max_abs_diff(d, expect) <= g.spacing * g.spacing);
}

TEST_CASE("operator symmetry is exact") {
    for (std::size_t n : {3u, 4u, 101u, 1000u}) {
        auto p = PhaseGrid::periodic(n, 2.0 * M_PI);
        auto o = PhaseGrid::open(n, 0.01);
        auto d1 = build_first_derivative(p).to_dense();
        auto d2 = build_second_derivative(p).to_dense();
        CHECK((d1 + d1.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((d2 - d2.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(build_first_derivative(o).is_antisymmetric());
        CHECK(build_second_derivative(o).is_symmetric());
    }
}

TEST_CASE("periodic corners wrap around") {
    auto g = PhaseGrid::periodic(10, 2.0 * M_PI);
    auto d1 = build_first_derivative(g);
    CHECK(d1.top_right == doctest::Approx(-1.0 / (2.0 * g.spacing)));
    CHECK(d1.bottom_left == doctest::Approx(1.0 / (2.0 * g.spacing)));
    auto open = build_first_derivative(PhaseGrid::open(10, 0.1));
    CHECK_FALSE(open.has_corners());
}

TEST_CASE("periodic second derivative rows sum to zero") {
    auto m = build_second_derivative(PhaseGrid::periodic(50, 2.0 * M_PI)).to_dense();
    CHECK(m.rowwise().sum().cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("D1 D1 approximates D2 on smooth vectors") {
    auto g = PhaseGrid::periodic(400, 2.0 * M_PI);
    auto d1 = build_first_derivative(g);
    auto d2 = build_second_derivative(g);
    for (auto f : {+[](double x) { return std::sin(x); }, +[](double x) { return std::cos(2.0 * x); }}) {
        auto v = sample(g, f);
        auto a = d1.apply(d1.apply(v));
        auto b = d2.apply(v);
        CHECK(max_abs_diff(a, b) <= 10.0 * g.spacing * g.spacing * 4.0);
    }
}

TEST_CASE("derivative builders reject tiny grids") {
    PhaseGrid g;
    g.n_points = 2;
    g.spacing = 0.1;
    CHECK_THROWS_AS(build_first_derivative(g), ConfigError);
    CHECK_THROWS_AS(build_second_derivative(g), ConfigError);
}

TEST_CASE("three point stencil converges at second order") {
    // Harmonic oscillator levels are n + 1/2 in these units.
    auto coarse = harmonic_levels(500);
    auto fine = harmonic_levels(1000);
    for (std::size_t k = 1; k < 5; ++k) {
        double exact = static_cast<double>(k) + 0.5;
        double ratio = (coarse[k] - exact) / (fine[k] - exact);
        CHECK(ratio >= 3.5);
        CHECK(ratio <= 4.5);
    }
}

TEST_CASE("convergence scan") {
    auto table = convergence_scan(harmonic_levels, {500, 2000}, 5);
    REQUIRE(table.fractional_differences.size() == 2);
    for (double d : table.fractional_differences.back()) CHECK(d == 0.0);
    CHECK(table.max_difference(0) > 0.0);
    // spacing error shrinks with h^2: compare with an independent finer solve
    auto finer = convergence_scan(harmonic_levels, {1000, 2000}, 5);
    CHECK(finer.max_difference(0) < table.max_difference(0) / 3.0);
    CHECK_THROWS_AS(convergence_scan(harmonic_levels, {2000, 500}, 5), ConfigError);
}
