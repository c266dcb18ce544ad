#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "maser/errors.hpp"
#include "maser/lindblad.hpp"
#include "maser/linalg.hpp"
#include "maser/sweep.hpp"
#include "maser/units.hpp"
#include "maser/validation.hpp"

using namespace maser;

namespace {

ComponentCache& shared_cache() {
    static ComponentCache cache;
    return cache;
}

OperatingPoint desk_point(double transmon_ghz, double pump_ghz, double amp_mhz) {
    std::istringstream in("transmon.frequency_ghz = " + std::to_string(transmon_ghz) + "\npump.frequency_ghz = " +
                          std::to_string(pump_ghz) + "\npump.amplitude_mhz = " + std::to_string(amp_mhz) + "\n");
    auto cfg = parse_config(in);
    return build_operating_point(cfg, cfg.params, shared_cache());
}

SolverOptions with(GapMethod m) {
    SolverOptions o;
    o.method = m;
    return o;
}

// Cavity occupation of rho = exp(L0 T) |ground><ground| on the q = 0 block.
double evolved_occupation(const Liouvillian& l, double t_final) {
    const auto d = l.hilbert_dim;
    const auto& g = l.metadata.grading;
    std::vector<Eigen::Index> idx;
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i)
            if (g[i] == g[j]) idx.push_back(static_cast<Eigen::Index>(i + j * d));
    Eigen::MatrixXcd full = l.dense();
    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXcd block(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) block(r, c) = full(idx[r], idx[c]);
    const int squarings = 24;
    Eigen::MatrixXcd step = (block * (t_final / std::pow(2.0, squarings))).exp();
    for (int k = 0; k < squarings; ++k) step = (step * step).eval();
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n);
    y(0) = 1.0;  // |0,0><0,0| sits at vectorized index 0
    y = step * y;
    double occ = 0.0;
    const auto nc = l.metadata.cavity_dim;
    for (Eigen::Index r = 0; r < n; ++r) {
        auto i = static_cast<std::size_t>(idx[r]) % d, j = static_cast<std::size_t>(idx[r]) / d;
        if (i == j) occ += static_cast<double>(i % nc) * y(r).real();
    }
    return occ;
}

}  // namespace

TEST_CASE("vectorization convention") {
    std::mt19937_64 rng(3);
    auto a = random_density_matrix(rng, 4), x = random_density_matrix(rng, 4), b = random_density_matrix(rng, 4);
    Eigen::VectorXcd lhs = vectorize(a * x * b);
    Eigen::VectorXcd rhs = Eigen::kroneckerProduct(Eigen::MatrixXcd(b.transpose()), a) * vectorize(x);
    CHECK((lhs - rhs).norm() < 1e-13);
    CHECK((unvectorize(vectorize(x), 4) - x).norm() == 0.0);
}

TEST_CASE("jump inventory on the desk atom") {
    auto op = desk_point(6.963, 12.69, 175.0);
    auto inv = build_jump_inventory(*op.atom, 4, 1.0, 2.0, 3.0);
    CHECK(inv.snail_jumps.size() == 6);
    CHECK(inv.transmon_jumps.size() == 6);
    REQUIRE(inv.cavity_jump.has_value());
    CHECK(inv.all().size() == 13);
    const auto& c = inv.cavity_jump->op;
    for (Eigen::Index a = 0; a < 9; ++a)
        for (Eigen::Index n = 1; n < 4; ++n) CHECK(c(a * 4 + n - 1, a * 4 + n).real() == doctest::Approx(std::sqrt(double(n))));
    // (2,t) -> (1,t) carries sqrt(2)
    for (const auto& j : inv.snail_jumps) {
        double w = j.op.cwiseAbs().maxCoeff();
        CHECK((w == doctest::Approx(1.0) || w == doctest::Approx(std::sqrt(2.0))));
    }
    CHECK_THROWS_AS(build_jump_inventory(*op.atom, 4, -1.0, 0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(build_jump_inventory(*op.atom, 0, 1.0, 0.0, 0.0), ConfigError);
}

TEST_CASE("zero-rate jumps drop out of the generator") {
    auto op = desk_point(6.963, 12.69, 175.0);
    auto inv = build_jump_inventory(*op.atom, 4, 0.0, 1.0, 1.0);
    auto without = inv;
    without.snail_jumps.clear();
    auto a = build_liouvillian(op.model, inv).dense();
    auto b = build_liouvillian(op.model, without).dense();
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("identity is a left null vector of random generators") {
    std::mt19937_64 rng(11);
    for (std::size_t dim : {2u, 5u, 9u}) {
        auto m = random_model(rng, dim);
        auto r = check_liouvillian(build_liouvillian(m.h, m.jumps));
        CHECK(r.trace_residual < 1e-13);
        CHECK(r.max_real_part < 1e-10);
        CHECK(r.steady_residual < 1e-10);
        CHECK(r.trace_error < 1e-12);
        CHECK(r.hermiticity < 1e-12);
        CHECK(r.min_eigenvalue > -1e-10);
    }
}

TEST_CASE("damped cavity spectrum is -chi (m + n) / 2") {
    const double chi = 0.7;
    const int n = 5;
    auto ev = general_eigenvalues(lossy_cavity(n, chi).dense());
    std::vector<double> got, want;
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        CHECK(std::abs(ev(k).imag()) < 1e-9);
        got.push_back(ev(k).real());
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) want.push_back(-chi * (a + b) / 2.0);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    for (std::size_t k = 0; k < got.size(); ++k) CHECK(std::abs(got[k] - want[k]) < 1e-9);
    for (auto m : {GapMethod::Dense, GapMethod::ShiftInvert})
        CHECK(spectral_gap(lossy_cavity(n, chi), with(m)).linewidth == doctest::Approx(chi / 2.0).epsilon(1e-10));
}

TEST_CASE("driven two-level atom matches the Bloch solution") {
    for (auto m : {GapMethod::Auto, GapMethod::Dense, GapMethod::ShiftInvert})
        for (double w : {0.05, 0.5, 1.0, 4.0}) {
            auto ss = steady_state(driven_two_level(w, 1.3), with(m));
            CHECK(std::abs(ss.rho(1, 1).real() - bloch_excited_population(w, 1.3)) < 1e-10);
            CHECK(ss.min_eigenvalue > -1e-12);
        }
    CHECK_THROWS_AS(steady_state(driven_two_level(1.0, 1.0), with(GapMethod::Sectors)), SolverError);
}

TEST_CASE("shift-invert Arnoldi finds eigenvalues nearest the shift") {
    const Eigen::Index n = 60;
    SparseMatrixC a(n, n);
    std::vector<Eigen::Triplet<cplx>> t;
    for (Eigen::Index k = 0; k < n; ++k) t.emplace_back(k, k, cplx(-0.1 * double(k), 0.37 * double(k % 7)));
    for (Eigen::Index k = 0; k + 1 < n; ++k) t.emplace_back(k, k + 1, cplx(0.01, 0.0));
    a.setFromTriplets(t.begin(), t.end());
    cplx sigma(-2.05, 1.1);
    auto r = shift_invert_arnoldi(a, sigma, 4, 40, 1e-10);
    REQUIRE(r.values.size() >= 4);
    // triangular: eigenvalues are the diagonal
    std::vector<cplx> diag;
    for (Eigen::Index k = 0; k < n; ++k) diag.push_back(cplx(-0.1 * double(k), 0.37 * double(k % 7)));
    std::sort(diag.begin(), diag.end(), [&](cplx x, cplx y) { return std::abs(x - sigma) < std::abs(y - sigma); });
    for (int k = 0; k < 4; ++k) {
        double best = 1e9;
        for (Eigen::Index j = 0; j < r.values.size(); ++j) best = std::min(best, std::abs(r.values(j) - diag[k]));
        CHECK(best < 1e-9);
    }
    CHECK(r.residuals.maxCoeff() < 1e-9);
}

TEST_CASE("gap method names") {
    for (auto m : {GapMethod::Auto, GapMethod::Dense, GapMethod::ShiftInvert, GapMethod::Sectors})
        CHECK(parse_gap_method(to_string(m)) == m);
    CHECK_THROWS_AS(parse_gap_method("lanczos"), ConfigError);
}

TEST_CASE("zero pump relaxes to the ground state") {
    auto op = desk_point(6.963, 12.69, 0.0);
    auto ss = steady_state(op.liouvillian, with(GapMethod::Sectors));
    CHECK(std::abs(ss.rho(0, 0).real() - 1.0) < 1e-9);
    CHECK(ss.cavity_occupation < 1e-12);
}

TEST_CASE("desk ge resonance masing and detuned points") {
    auto on = desk_point(6.963, 12.69, 175.0);
    auto rep = analyze(on.liouvillian, with(GapMethod::Sectors));
    MESSAGE("on-resonance occupation " << rep.cavity_occupation << ", linewidth "
                                      << units::angular_to_hz(rep.linewidth) << " Hz");
    CHECK(rep.cavity_occupation > 1.0);
    CHECK(rep.null_residual < 1e-8 * on.liouvillian.norm());
    CHECK(rep.linewidth < 0.5 * on.device.rates.cavity);
    CHECK(std::abs(rep.cavity_occupation - evolved_occupation(on.liouvillian, 0.02)) < 1e-3 * rep.cavity_occupation);

    for (double ft : {6.94, 7.00}) {
        auto off = desk_point(ft, 12.69, 175.0);
        auto r = steady_state(off.liouvillian, with(GapMethod::Sectors));
        CHECK(r.cavity_occupation < 0.1);
        CHECK(std::abs(r.cavity_occupation - evolved_occupation(off.liouvillian, 0.02)) < 1e-6 + 1e-3 * r.cavity_occupation);
    }
}

TEST_CASE("sector, sparse and dense solvers agree") {
    auto op = desk_point(6.963, 12.69, 175.0);
    auto sec = analyze(op.liouvillian, with(GapMethod::Sectors));
    auto den = analyze(op.liouvillian, with(GapMethod::Dense));
    auto sil = analyze(op.liouvillian, with(GapMethod::ShiftInvert));
    CHECK(std::abs(sec.cavity_occupation / den.cavity_occupation - 1.0) < 1e-8);
    CHECK(std::abs(sil.cavity_occupation / den.cavity_occupation - 1.0) < 1e-8);
    CHECK(std::abs(sec.linewidth / den.linewidth - 1.0) < 1e-6);
    CHECK(std::abs(sil.linewidth / den.linewidth - 1.0) < 1e-6);
    CHECK(std::abs(sec.coherence_linewidth / den.coherence_linewidth - 1.0) < 1e-6);
    CHECK(sec.method == "sectors");
}

TEST_CASE("steady-state report serializes to JSON") {
    auto op = desk_point(6.963, 12.69, 175.0);
    auto rep = analyze(op.liouvillian, with(GapMethod::Sectors));
    auto j = nlohmann::json::parse(rep.to_json());
    CHECK(j["cavity_occupation"].get<double>() == doctest::Approx(rep.cavity_occupation));
    CHECK(j["linewidth_hz"].get<double>() == doctest::Approx(units::angular_to_hz(rep.linewidth)));
    CHECK(j["method"] == "sectors");
}

TEST_CASE("two decoupled steady states are reported as multistable") {
    // level 2 is dark and undamped, level 1 decays into level 0
    JumpOperator down;
    down.op = Eigen::MatrixXcd::Zero(3, 3);
    down.op(0, 1) = 1.0;
    down.rate = 1.0;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(3, 3);
    h(0, 1) = h(1, 0) = 0.3;
    auto l = build_liouvillian(h, {down});
    for (auto m : {GapMethod::Dense, GapMethod::ShiftInvert}) CHECK_THROWS_AS(steady_state(l, with(m)), MultistabilityError);
}
