#include <doctest.h>

#include <cmath>
#include <complex>

#include <unsupported/Eigen/KroneckerProduct>

#include "maser/composite.hpp"
#include "maser/device.hpp"
#include "maser/errors.hpp"
#include "maser/lindblad.hpp"
#include "maser/sweep.hpp"
#include "maser/units.hpp"

using namespace maser;

namespace {

// Ladder spectrum with the given energies and d1 elements sqrt(n) scaled.
ComponentSpectrum ladder(const std::vector<double>& energies, double scale = 1.0) {
    const auto n = static_cast<Eigen::Index>(energies.size());
    ComponentSpectrum s;
    s.energies = Eigen::Map<const Eigen::VectorXd>(energies.data(), n);
    s.wavefunctions = Eigen::MatrixXd::Identity(n, n);
    s.d1_elements = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        s.d1_elements(k, k + 1) = scale * std::sqrt(static_cast<double>(k + 1));
        s.d1_elements(k + 1, k) = -s.d1_elements(k, k + 1);
    }
    return s;
}

DeviceParams desk_device() { return device_from(default_parameters()); }

struct DeskFixture {
    DeviceParams device = desk_device();
    ComponentSpectrum snail = solve_snail(device, 3);
    ComponentSpectrum transmon = solve_transmon(device, 3);
    ComponentSpectrum cavity = solve_cavity(device, 4);
    AtomBasis atom = build_atom(device, snail, transmon);
};

const DeskFixture& desk() {
    static const DeskFixture f;
    return f;
}

}  // namespace

TEST_CASE("first-order inverse capacitance") {
    CouplingParams none;
    auto inv = inverse_capacitance_first_order(341.0, 70.0, 200.0, none);
    CHECK(inv.isApprox(Eigen::Vector3d(1.0 / 341.0, 1.0 / 70.0, 1.0 / 200.0).asDiagonal().toDenseMatrix(), 1e-15));

    auto error_at = [](double scale) {
        CouplingParams k{5.0 * scale, 0.015 * scale * 100.0};
        auto approx = inverse_capacitance_first_order(341.0, 70.0, 200.0, k);
        Eigen::Matrix3d exact = capacitance_matrix(341.0, 70.0, 200.0, k).inverse();
        CHECK(approx(0, 2) == 0.0);
        CHECK(approx(2, 0) == 0.0);
        CHECK((approx - approx.transpose()).cwiseAbs().maxCoeff() == 0.0);
        return (approx - exact).cwiseAbs().maxCoeff();
    };
    double e1 = error_at(1.0), e2 = error_at(0.5);
    CHECK(e1 / e2 > 3.5);
    CHECK(e1 / e2 < 4.5);
    const double eps = 5.0 / 70.0;
    CHECK(e1 < 3.0 * eps * eps / 70.0);
}

TEST_CASE("coupling validation") {
    CouplingParams bad{-1.0, 0.0};
    CHECK_THROWS_AS(bad.validate(341.0, 70.0, 200.0), ConfigError);
    CouplingParams big{10.0, 0.0};
    CHECK(big.validate(341.0, 70.0, 200.0).size() == 1);
    CouplingParams desk_k{5.0, 0.015};
    CHECK(desk_k.validate(341.0, 70.0, 200.0).empty());
}

TEST_CASE("coupling table is symmetric and obeys the ladder selection rule") {
    auto a = ladder({0.0, 1.0, 2.0, 3.0});
    auto b = ladder({0.0, 1.5, 3.0});
    auto t = coupling_matrix_element_table(a, b, 0.7);
    CHECK((t - t.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 3; ++j)
            for (Eigen::Index k = 0; k < 4; ++k)
                for (Eigen::Index l = 0; l < 3; ++l) {
                    double v = t(i * 3 + j, k * 3 + l);
                    bool allowed = std::abs(i - k) == 1 && std::abs(j - l) == 1;
                    if (!allowed) CHECK(v == 0.0);
                    else CHECK(v != 0.0);
                }
    CHECK(coupling_matrix_element_table(a, b, 0.0).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(coupling_matrix_element_table(Eigen::MatrixXd::Zero(2, 3), b.d1_elements, 1.0), ConfigError);
}

TEST_CASE("uncoupled atom is the product basis") {
    auto s = ladder({0.0, 5.0, 9.7});
    auto t = ladder({0.0, 7.0, 13.6});
    auto atom = build_artificial_atom(s, t, 0.0, 3, 3);
    for (std::size_t k = 0; k < atom.dimension(); ++k) {
        CHECK(atom.overlaps[k] == doctest::Approx(1.0));
        const auto& l = atom.labels[k];
        CHECK(atom.energies(static_cast<Eigen::Index>(k)) == doctest::Approx(s.energies(l.snail) + t.energies(l.transmon)));
    }
}

TEST_CASE("resonant two-level components split by twice the coupling") {
    auto s = ladder({0.0, 5.0}, 0.8);
    auto t = ladder({0.0, 5.0}, 1.3);
    const double k = 0.01;
    auto atom = build_artificial_atom(s, t, k, 2, 2);
    double g = k * 0.8 * 1.3;
    CHECK(atom.energies(2) - atom.energies(1) == doctest::Approx(2.0 * g).epsilon(1e-10));
}

TEST_CASE("dispersive shift agrees with second-order perturbation theory") {
    auto s = ladder({0.0, 5.0, 9.8});
    auto t = ladder({0.0, 6.0, 11.7});
    const double k = 0.05;
    auto atom = build_artificial_atom(s, t, k, 3, 3);
    // independent oracle on the same product space
    Eigen::MatrixXd v = coupling_matrix_element_table(s, t, k);
    auto e0 = [&](Eigen::Index p) { return s.energies(p / 3) + t.energies(p % 3); };
    for (int sl = 0; sl < 3; ++sl)
        for (int tl = 0; tl < 3; ++tl) {
            Eigen::Index p = sl * 3 + tl;
            double shift = 0.0;
            for (Eigen::Index q = 0; q < 9; ++q)
                if (q != p) shift += v(p, q) * v(p, q) / (e0(p) - e0(q));
            double exact = atom.energy(sl, tl) - e0(p);
            if (std::abs(shift) > 1e-6) CHECK(std::abs(exact / shift - 1.0) < 0.1);
        }
}

TEST_CASE("desk atom labels form a bijection") {
    const auto& atom = desk().atom;
    REQUIRE(atom.dimension() == 9);
    std::vector<bool> seen(9, false);
    for (std::size_t k = 0; k < 9; ++k) {
        const auto& l = atom.labels[k];
        REQUIRE(l.snail >= 0);
        REQUIRE(l.snail < 3);
        REQUIRE(l.transmon >= 0);
        REQUIRE(l.transmon < 3);
        auto p = static_cast<std::size_t>(l.snail * 3 + l.transmon);
        CHECK_FALSE(seen[p]);
        seen[p] = true;
        CHECK(atom.index_of(l.snail, l.transmon) == k);
        CHECK(atom.overlaps[k] > 0.9);
    }
    CHECK_THROWS_AS(atom.index_of(3, 0), ConfigError);
}

TEST_CASE("reduced pump keeps only snail-raising transmon-changing elements") {
    const auto& atom = desk().atom;
    const double omega = units::mhz_to_angular(175.0);
    for (auto rule : {PumpRule::Strict, PumpRule::Loose}) {
        auto p = build_reduced_pump(atom, atom.snail_d1, omega, 1.0, rule);
        auto p2 = build_reduced_pump(atom, atom.snail_d1, 2.0 * omega, 1.0, rule);
        CHECK((p2.raising - 2.0 * p.raising).cwiseAbs().maxCoeff() <= 1e-12 * p2.raising.cwiseAbs().maxCoeff());
        for (std::size_t i = 0; i < 9; ++i)
            for (std::size_t j = 0; j < 9; ++j) {
                int ds = atom.labels[j].snail - atom.labels[i].snail;
                int dt = atom.labels[j].transmon - atom.labels[i].transmon;
                bool keep = ds == 1 && (rule == PumpRule::Strict ? dt == 1 : std::abs(dt) == 1);
                double v = p.raising(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
                if (keep) CHECK(v == doctest::Approx(omega * std::abs(atom.snail_d1(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)))));
                else CHECK(v == 0.0);
            }
        CHECK((p.hermitian() - p.hermitian().transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK_THROWS_AS(build_reduced_pump(atom, Eigen::MatrixXd::Zero(3, 3), omega, 1.0), ConfigError);
}

TEST_CASE("rotating frame keeps same-snail couplings and energy differences") {
    const auto& f = desk();
    PumpSettings pump{units::mhz_to_angular(175.0), units::ghz_to_angular(12.69), PumpRule::Strict};
    auto m = build_frame_model(f.device, f.atom, f.cavity, pump);
    auto h_tc = transmon_cavity_coupling(f.atom, f.cavity, f.device.transmon_cavity_coefficient());
    const Eigen::Index nc = 4;
    for (Eigen::Index a = 0; a < 9; ++a)
        for (Eigen::Index b = 0; b < 9; ++b) {
            if (f.atom.labels[a].snail != f.atom.labels[b].snail) continue;
            for (Eigen::Index n = 0; n < nc; ++n)
                for (Eigen::Index k = 0; k < nc; ++k) {
                    if (a == b && n == k) continue;
                    CHECK(m.h_static(a * nc + n, b * nc + k) == h_tc(a * nc + n, b * nc + k));
                }
        }
    // diagonal differences are lab differences minus whole pump quanta
    auto diag = [&](Eigen::Index a, Eigen::Index n) { return m.h_static(a * nc + n, a * nc + n); };
    for (Eigen::Index a = 0; a < 9; ++a)
        for (Eigen::Index n = 0; n < nc; ++n) {
            double lab = f.atom.energies(a) - f.atom.energies(0) + f.cavity.energies(n) - f.cavity.energies(0);
            double expect = lab - f.atom.labels[a].snail * pump.frequency;
            CHECK(std::abs(diag(a, n) - diag(0, 0) - expect) < 1e-6 * pump.frequency);
        }
    CHECK(m.dropped_terms_norm / m.retained_coupling_norm < 0.2);
    CHECK(m.dimension() == 36);
}

TEST_CASE("excitation grading and conserving part") {
    const auto& f = desk();
    PumpSettings pump{units::mhz_to_angular(175.0), units::ghz_to_angular(12.69), PumpRule::Strict};
    auto m = build_frame_model(f.device, f.atom, f.cavity, pump);
    auto c = excitation_conserving_part(m);
    auto g = excitation_grading(m);
    double removed = 0.0;
    for (Eigen::Index i = 0; i < 36; ++i)
        for (Eigen::Index j = 0; j < 36; ++j) {
            if (g[i] == g[j]) CHECK(c.h_static(i, j) == m.h_static(i, j));
            else {
                CHECK(c.h_static(i, j) == 0.0);
                removed += m.h_static(i, j) * m.h_static(i, j);
            }
        }
    CHECK(c.nonconserving_norm == doctest::Approx(std::sqrt(removed)));
    // the strict pump raises snail and transmon together, so it conserves the grading
    CHECK((c.pump_static - m.pump_static).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rotating frame steady state matches lab-frame time evolution") {
    // Two snail labels, two transmon labels, two cavity levels, in reduced units.
    AtomBasis atom;
    atom.n_snail = 2;
    atom.n_transmon = 2;
    atom.energies = Eigen::Vector4d(0.0, 3.0, 5.0, 8.0);
    atom.labels = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    atom.overlaps.assign(4, 1.0);
    atom.states = Eigen::MatrixXd::Identity(4, 4);
    atom.snail_d1 = Eigen::MatrixXd::Zero(4, 4);
    atom.snail_d1(2, 0) = 1.0;
    atom.snail_d1(3, 1) = 1.0;
    atom.snail_d1(3, 0) = 0.4;  // pump path |0,g> -> |1,e>
    atom.snail_d1 -= Eigen::MatrixXd(atom.snail_d1.transpose());
    atom.transmon_d1 = Eigen::MatrixXd::Zero(4, 4);
    atom.transmon_d1(1, 0) = 1.0;
    atom.transmon_d1(3, 2) = 1.0;
    atom.transmon_d1(2, 1) = 0.3;  // hybridization across snail labels
    atom.transmon_d1 -= Eigen::MatrixXd(atom.transmon_d1.transpose());
    auto cavity = ladder({0.0, 3.0});

    const double omega_p = 8.0, amp = 0.05, k_tc = 0.02;
    auto pump = build_reduced_pump(atom, atom.snail_d1, amp, omega_p);
    auto h_tc = transmon_cavity_coupling(atom, cavity, k_tc);
    auto model = apply_rotating_frame(atom, cavity, h_tc, pump);
    CHECK(model.dropped_terms_norm > 0.0);
    auto jumps = build_jump_inventory(atom, 2, 0.5, 0.01, 0.1);
    SolverOptions dense;
    dense.method = GapMethod::Dense;
    auto rot = steady_state(build_liouvillian(model, jumps), dense);

    // Lab frame: H(t) = H0 + P e^{-i w t} + P^T e^{i w t}, column-stacked generators.
    const Eigen::Index d = 8;
    Eigen::MatrixXcd h0 = h_tc.cast<std::complex<double>>();
    for (Eigen::Index a = 0; a < 4; ++a)
        for (Eigen::Index n = 0; n < 2; ++n) h0(a * 2 + n, a * 2 + n) += atom.energies(a) + cavity.energies(n);
    Eigen::MatrixXcd p = Eigen::kroneckerProduct(pump.raising, Eigen::MatrixXd::Identity(2, 2)).cast<std::complex<double>>();
    Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
    const std::complex<double> i1(0.0, 1.0);
    auto commutator = [&](const Eigen::MatrixXcd& x) -> Eigen::MatrixXcd {
        return -i1 * (Eigen::kroneckerProduct(id, x) - Eigen::kroneckerProduct(x.transpose(), id)).eval();
    };
    Eigen::MatrixXcd l0 = build_liouvillian(Eigen::MatrixXcd::Zero(d, d), jumps.all()).dense() + commutator(h0);
    Eigen::MatrixXcd lp = commutator(p);
    Eigen::MatrixXcd lm = commutator(Eigen::MatrixXcd(p.transpose()));
    auto gen = [&](double t) -> Eigen::MatrixXcd {
        return l0 + std::exp(-i1 * omega_p * t) * lp + std::exp(i1 * omega_p * t) * lm;
    };
    const double period = units::two_pi / omega_p;
    const int per_period = 64;
    const double h = period / per_period;
    const int periods = static_cast<int>(std::ceil(300.0 / period));
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(d * d);
    y(0) = 1.0;
    double occupation = 0.0;
    for (int s = 0; s < periods * per_period; ++s) {
        double t = s * h;
        Eigen::MatrixXcd gm = gen(t + 0.5 * h);
        Eigen::VectorXcd k1 = gen(t) * y;
        Eigen::VectorXcd k2 = gm * (y + 0.5 * h * k1);
        Eigen::VectorXcd k3 = gm * (y + 0.5 * h * k2);
        Eigen::VectorXcd k4 = gen(t + h) * (y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (s >= (periods - 1) * per_period) {
            double n = 0.0;
            for (Eigen::Index a = 0; a < 4; ++a) n += y((a * 2 + 1) * (d + 1)).real();
            occupation += n / per_period;
        }
    }
    double rot_n = 0.0;
    for (Eigen::Index a = 0; a < 4; ++a) rot_n += rot.rho(a * 2 + 1, a * 2 + 1).real();
    CHECK(rot_n > 0.01);
    CHECK(std::abs(occupation / rot_n - 1.0) < 0.05);
}

TEST_CASE("minimize_splitting recovers a planted avoided crossing") {
    const double g = 0.37, x0 = 0.123;
    auto split = [&](double x) { double dx = 40.0 * (x - x0); return std::sqrt(dx * dx + 4.0 * g * g); };
    std::vector<double> scan;
    for (int k = 0; k <= 10; ++k) scan.push_back(0.1 + 0.005 * k);
    auto r = minimize_splitting(split, scan);
    CHECK(std::abs(r.coupling / g - 1.0) < 0.05);
    CHECK(std::abs(r.location - x0) < 1e-4);
    CHECK_THROWS_AS(minimize_splitting(split, {0.2, 0.3, 0.4}), SolverError);
    CHECK_THROWS_AS(minimize_splitting(split, {0.1, 0.2}), ConfigError);
    CHECK_THROWS_AS(minimize_splitting(split, {0.3, 0.2, 0.1}), ConfigError);
}

TEST_CASE("transmon-cavity crossing") {
    auto d = desk_device();
    double flux = transmon_flux_for_frequency(d, units::angular_to_ghz(d.cavity.bare_frequency()));
    std::vector<double> scan;
    for (int k = -4; k <= 4; ++k) scan.push_back(flux + 0.0005 * k);
    auto r = avoided_crossing_splitting(d, scan, Transition::ge);
    double g_mhz = r.coupling / units::mhz_to_angular(1.0);
    MESSAGE("g_tc = " << g_mhz << " MHz");
    CHECK(std::abs(g_mhz / 0.44 - 1.0) < 0.2);

    d.coupling.c_tc = 0.0;
    auto zero = avoided_crossing_splitting(d, scan, Transition::ge);
    CHECK(zero.coupling < 1e-3 * r.coupling);
}
