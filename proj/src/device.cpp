#include "maser/device.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/roots.hpp>

#include "maser/errors.hpp"
#include "maser/linalg.hpp"
#include "maser/units.hpp"

namespace maser {

Eigen::Matrix3d DeviceParams::inverse_capacitance() const {
    return inverse_capacitance_first_order(snail.c_s, transmon.c_t, cavity.c_c, coupling);
}

double DeviceParams::snail_transmon_coefficient() const {
    return units::kinetic_coefficient(inverse_capacitance()(0, 1));
}

double DeviceParams::transmon_cavity_coefficient() const {
    return units::kinetic_coefficient(inverse_capacitance()(1, 2));
}

std::vector<std::string> DeviceParams::validate() const {
    snail.validate();
    transmon.validate();
    cavity.validate();
    if (cutoffs.snail < 1 || cutoffs.transmon < 1 || cutoffs.cavity < 1) throw ConfigError("cutoffs must be positive");
    if (rates.snail < 0.0 || rates.transmon < 0.0 || rates.cavity < 0.0) throw ConfigError("rates must be non-negative");
    return coupling.validate(snail.c_s, transmon.c_t, cavity.c_c);
}

ComponentSpectrum solve_snail(const DeviceParams& d, std::size_t levels) {
    auto grid = PhaseGrid::periodic(d.grids.snail_points, 2.0 * units::two_pi);
    return solve_spectrum(build_snail_hamiltonian(d.snail, grid, d.inverse_capacitance()(0, 0)), grid, levels);
}

ComponentSpectrum solve_transmon(const DeviceParams& d, std::size_t levels) {
    auto grid = PhaseGrid::periodic(d.grids.transmon_points, units::two_pi);
    return solve_spectrum(build_transmon_hamiltonian(d.transmon, grid, d.inverse_capacitance()(1, 1)), grid, levels);
}

ComponentSpectrum solve_cavity(const DeviceParams& d, std::size_t levels) {
    auto grid = PhaseGrid::open(d.grids.cavity_points, d.grids.cavity_spacing);
    return solve_spectrum(build_cavity_hamiltonian(d.cavity, grid, d.inverse_capacitance()(2, 2)), grid, levels);
}

AtomBasis build_atom(const DeviceParams& d, const ComponentSpectrum& snail, const ComponentSpectrum& transmon,
                     bool strict) {
    return build_artificial_atom(snail, transmon, d.snail_transmon_coefficient(), d.cutoffs.snail,
                                 d.cutoffs.transmon, strict);
}

double transmon_frequency_ghz(const DeviceParams& d) {
    return units::angular_to_ghz(solve_transmon(d, 2).transition(0, 1));
}

double transmon_flux_for_frequency(const DeviceParams& d, double frequency_ghz) {
    DeviceParams q = d;
    auto f = [&](double flux) {
        q.transmon.flux_ext = units::flux_quanta_to_phase(flux);
        return transmon_frequency_ghz(q) - frequency_ghz;
    };
    double lo = f(0.0), hi = f(0.5);
    if (lo == 0.0) return 0.0;
    if (lo * hi > 0.0) throw ConfigError("transmon frequency " + std::to_string(frequency_ghz) + " GHz is outside the tunable range");
    boost::uintmax_t iters = 100;
    auto r = boost::math::tools::toms748_solve(f, 0.0, 0.5, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (r.first + r.second);
}

RotatingFrameModel build_frame_model(const DeviceParams& d, const AtomBasis& atom, const ComponentSpectrum& cavity,
                                     const PumpSettings& pump) {
    auto cav = cavity.truncated(d.cutoffs.cavity);
    auto h_tc = transmon_cavity_coupling(atom, cav, d.transmon_cavity_coefficient());
    auto p = build_reduced_pump(atom, atom.snail_d1, pump.amplitude, pump.frequency, pump.rule);
    return apply_rotating_frame(atom, cav, h_tc, p);
}

Eigen::MatrixXd lab_hamiltonian(const DeviceParams& d, const AtomBasis& atom, const ComponentSpectrum& cavity) {
    const auto na = static_cast<Eigen::Index>(atom.dimension());
    const auto nc = static_cast<Eigen::Index>(cavity.levels());
    Eigen::MatrixXd h = transmon_cavity_coupling(atom, cavity, d.transmon_cavity_coefficient());
    for (Eigen::Index a = 0; a < na; ++a)
        for (Eigen::Index n = 0; n < nc; ++n)
            h(a * nc + n, a * nc + n) += atom.energies(a) - atom.energies(0) + cavity.energies(n) - cavity.energies(0);
    return h;
}

namespace {

struct CrossingContext {
    DeviceParams device;
    ComponentSpectrum snail;
    ComponentSpectrum cavity;
};

CrossingContext crossing_context(const DeviceParams& d) {
    CrossingContext c{d, {}, {}};
    c.device.cutoffs.transmon = std::max<std::size_t>(d.cutoffs.transmon, 3);
    c.device.cutoffs.cavity = std::max<std::size_t>(d.cutoffs.cavity, 3);
    c.snail = solve_snail(c.device, c.device.cutoffs.snail);
    c.cavity = solve_cavity(c.device, c.device.cutoffs.cavity);
    return c;
}

double splitting_at(CrossingContext& c, double flux, Transition tr) {
    c.device.transmon.flux_ext = units::flux_quanta_to_phase(flux);
    auto t = solve_transmon(c.device, c.device.cutoffs.transmon);
    auto atom = build_atom(c.device, c.snail, t);
    auto h = lab_hamiltonian(c.device, atom, c.cavity);
    auto eig = all_eigenpairs_dense(h);
    const auto nc = static_cast<Eigen::Index>(c.cavity.levels());
    auto idx = [&](int s, int tt, int n) { return static_cast<Eigen::Index>(atom.index_of(s, tt)) * nc + n; };
    Eigen::Index a = 0, b = 0;
    switch (tr) {
        case Transition::ge: a = idx(0, 1, 0); b = idx(0, 0, 1); break;
        case Transition::gf_half: a = idx(0, 2, 0); b = idx(0, 0, 2); break;
        case Transition::ef: a = idx(0, 2, 0); b = idx(0, 1, 1); break;
    }
    Eigen::VectorXd w = eig.vectors.row(a).cwiseAbs2() + eig.vectors.row(b).cwiseAbs2();
    Eigen::Index k1 = 0;
    w.maxCoeff(&k1);
    w(k1) = -1.0;
    Eigen::Index k2 = 0;
    w.maxCoeff(&k2);
    return std::abs(eig.values(k1) - eig.values(k2));
}

}  // namespace

double crossing_splitting(const DeviceParams& d, double transmon_flux, Transition transition) {
    auto c = crossing_context(d);
    return splitting_at(c, transmon_flux, transition);
}

CrossingResult avoided_crossing_splitting(const DeviceParams& d, const std::vector<double>& flux_scan,
                                          Transition transition) {
    auto c = crossing_context(d);
    return minimize_splitting([&](double x) { return splitting_at(c, x, transition); }, flux_scan);
}

DressedTransitions dressed_transitions(const AtomBasis& atom) {
    DressedTransitions t;
    double g = atom.energy(0, 0);
    double e = atom.energy(0, 1);
    t.ge = e - g;
    if (atom.n_transmon > 2) {
        double f = atom.energy(0, 2);
        t.gf_half = 0.5 * (f - g);
        t.ef = f - e;
    }
    if (atom.n_snail > 1) {
        t.pump_ge = atom.energy(1, 1) - g;
        if (atom.n_transmon > 2) t.pump_ef = atom.energy(1, 2) - e;
    }
    return t;
}

}  // namespace maser
