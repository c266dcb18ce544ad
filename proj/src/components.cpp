#include "maser/components.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "maser/errors.hpp"
#include "maser/least_squares.hpp"
#include "maser/linalg.hpp"
#include "maser/units.hpp"

namespace maser {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
}

BandedOperator kinetic_plus_potential(const PhaseGrid& grid, double inverse_capacitance,
                                      const std::vector<double>& potential) {
    require_positive(inverse_capacitance, "inverse capacitance");
    double k = units::kinetic_coefficient(inverse_capacitance);
    return build_second_derivative(grid).scaled(-0.5 * k).plus_diagonal(potential);
}

}  // namespace

void SnailParams::validate() const {
    require_positive(i_s1, "snail i_s1");
    require_positive(i_s2, "snail i_s2");
    require_positive(l_lin, "snail L_lin");
    require_positive(c_s, "snail C_s");
    if (!std::isfinite(flux_ext)) throw ConfigError("snail flux must be finite");
    if (alpha && std::abs(*alpha - ratio()) > 1e-9 * std::max(1.0, std::abs(*alpha)))
        throw ConfigError("snail alpha inconsistent with i_s1 / i_s2");
}

void TransmonParams::validate() const {
    require_positive(i_t1, "transmon i_t1");
    require_positive(i_t2, "transmon i_t2");
    require_positive(c_t, "transmon C_t");
    if (!std::isfinite(flux_ext)) throw ConfigError("transmon flux must be finite");
}

double CavityParams::bare_frequency() const {
    return 1.0 / std::sqrt(l_c * 1e-9 * c_c * 1e-15);
}

void CavityParams::validate() const {
    require_positive(c_c, "cavity C_c");
    require_positive(l_c, "cavity L_c");
    if (!std::isfinite(bare_frequency())) throw ConfigError("cavity frequency not finite");
}

ComponentSpectrum ComponentSpectrum::truncated(std::size_t n) const {
    if (n > levels()) throw ConfigError("spectrum has fewer levels than requested");
    auto k = static_cast<Eigen::Index>(n);
    ComponentSpectrum s;
    s.grid = grid;
    s.energies = energies.head(k);
    s.wavefunctions = wavefunctions.leftCols(k);
    s.d1_elements = d1_elements.topLeftCorner(k, k);
    return s;
}

double snail_potential_at(const SnailParams& p, double phi_s, double x) {
    double e1 = units::josephson_energy(p.i_s1);
    double e2 = units::josephson_energy(p.i_s2);
    double el = units::inductive_energy(p.l_lin);
    double d = phi_s - x;
    return -e1 * std::cos(x + p.flux_ext) - 2.0 * e2 * std::cos(0.5 * x) + 0.5 * el * d * d;
}

double snail_internal_phase(const SnailParams& p, double phi_s, std::optional<double> guess) {
    const double e1 = units::josephson_energy(p.i_s1);
    const double e2 = units::josephson_energy(p.i_s2);
    const double el = units::inductive_energy(p.l_lin);
    const double scale = e1 + 0.5 * e2 + el;
    auto grad = [&](double x) { return e1 * std::sin(x + p.flux_ext) + e2 * std::sin(0.5 * x) - el * (phi_s - x); };
    auto curv = [&](double x) { return e1 * std::cos(x + p.flux_ext) + 0.5 * e2 * std::cos(0.5 * x) + el; };

    double x = guess.value_or(phi_s);
    for (int it = 0; it < 200; ++it) {
        double g = grad(x);
        double c = curv(x);
        if (std::abs(g) < 1e-10 * scale && c > 0.0) return x;
        if (c > 0.0) {
            x += std::clamp(-g / c, -0.5, 0.5);
            continue;
        }
        // negative curvature: descend along the gradient with backtracking
        double step = -std::copysign(0.25, g);
        double u0 = snail_potential_at(p, phi_s, x);
        while (std::abs(step) > 1e-12 && snail_potential_at(p, phi_s, x + step) >= u0) step *= 0.5;
        x += step;
    }
    throw SolverError("snail internal phase minimization did not converge");
}

std::vector<double> snail_potential(const SnailParams& p, const PhaseGrid& grid) {
    p.validate();
    std::vector<double> u(grid.n_points);
    std::optional<double> prev;
    for (std::size_t k = 0; k < grid.n_points; ++k) {
        double phi = grid.coordinate(k);
        double guess = prev ? *prev + grid.spacing : phi;
        double x = snail_internal_phase(p, phi, guess);
        u[k] = snail_potential_at(p, phi, x);
        prev = x;
    }
    return u;
}

std::vector<double> transmon_potential(const TransmonParams& p, const PhaseGrid& grid) {
    p.validate();
    double e1 = units::josephson_energy(p.i_t1);
    double e2 = units::josephson_energy(p.i_t2);
    std::vector<double> u(grid.n_points);
    for (std::size_t k = 0; k < grid.n_points; ++k) {
        double phi = grid.coordinate(k);
        u[k] = -e1 * std::cos(phi + p.flux_ext) - e2 * std::cos(phi);
    }
    return u;
}

std::vector<double> cavity_potential(const CavityParams& p, const PhaseGrid& grid) {
    p.validate();
    double el = units::inductive_energy(p.l_c);
    std::vector<double> u(grid.n_points);
    for (std::size_t k = 0; k < grid.n_points; ++k) {
        double phi = grid.coordinate(k);
        u[k] = 0.5 * el * phi * phi;
    }
    return u;
}

BandedOperator build_snail_hamiltonian(const SnailParams& p, const PhaseGrid& grid,
                                       std::optional<double> inverse_capacitance) {
    if (grid.boundary != Boundary::Periodic || std::abs(grid.period - 2.0 * units::two_pi) > 1e-12 * grid.period)
        throw ConfigError("snail grid must be periodic with period 4 pi");
    return kinetic_plus_potential(grid, inverse_capacitance.value_or(1.0 / p.c_s), snail_potential(p, grid));
}

BandedOperator build_transmon_hamiltonian(const TransmonParams& p, const PhaseGrid& grid,
                                          std::optional<double> inverse_capacitance) {
    if (grid.boundary != Boundary::Periodic || std::abs(grid.period - units::two_pi) > 1e-12 * grid.period)
        throw ConfigError("transmon grid must be periodic with period 2 pi");
    return kinetic_plus_potential(grid, inverse_capacitance.value_or(1.0 / p.c_t), transmon_potential(p, grid));
}

BandedOperator build_cavity_hamiltonian(const CavityParams& p, const PhaseGrid& grid,
                                        std::optional<double> inverse_capacitance) {
    if (grid.boundary != Boundary::Open) throw ConfigError("cavity grid must be open");
    return kinetic_plus_potential(grid, inverse_capacitance.value_or(1.0 / p.c_c), cavity_potential(p, grid));
}

ComponentSpectrum solve_spectrum(const BandedOperator& h, const PhaseGrid& grid, std::size_t n_levels) {
    if (h.dimension() != grid.n_points) throw ConfigError("hamiltonian and grid sizes differ");
    auto pairs = lowest_eigenpairs(h, n_levels);
    ComponentSpectrum s;
    s.grid = grid;
    s.energies = pairs.values;
    s.wavefunctions = std::move(pairs.vectors);
    auto d1 = build_first_derivative(grid);
    const auto k = s.wavefunctions.cols();
    Eigen::MatrixXd dv(s.wavefunctions.rows(), k);
    for (Eigen::Index j = 0; j < k; ++j) dv.col(j) = d1.apply(Eigen::VectorXd(s.wavefunctions.col(j)));
    Eigen::MatrixXd m = s.wavefunctions.transpose() * dv;
    s.d1_elements = 0.5 * (m - m.transpose());
    return s;
}

double snail_transition_ghz(const SnailParams& p, const PhaseGrid& grid) {
    auto s = solve_spectrum(build_snail_hamiltonian(p, grid), grid, 2);
    return units::angular_to_ghz(s.transition(0, 1));
}

SnailFitResult fit_snail_parameters(const std::vector<FluxPoint>& data, const SnailParams& initial, double fixed_c_s,
                                    const SnailFitOptions& options) {
    if (data.size() < 3) throw ConfigError("snail fit needs at least 3 data points");
    std::vector<double> fluxes;
    for (const auto& d : data) fluxes.push_back(d.flux);
    std::sort(fluxes.begin(), fluxes.end());
    if (std::unique(fluxes.begin(), fluxes.end()) - fluxes.begin() < 3)
        throw ConfigError("snail fit needs at least 3 distinct flux values");
    require_positive(fixed_c_s, "fixed C_s");

    auto grid = PhaseGrid::periodic(options.grid_points, 2.0 * units::two_pi);
    SnailParams base = initial;
    base.c_s = fixed_c_s;
    base.alpha.reset();
    base.validate();

    auto make = [&](const Eigen::VectorXd& x) {
        SnailParams q = base;
        q.i_s1 = std::exp(x(0));
        q.i_s2 = std::exp(x(1));
        q.l_lin = std::exp(x(2));
        return q;
    };
    const auto m = static_cast<Eigen::Index>(data.size());
    ResidualFunction f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        SnailParams q = make(x);
        for (Eigen::Index k = 0; k < m; ++k) {
            q.flux_ext = units::flux_quanta_to_phase(data[static_cast<std::size_t>(k)].flux);
            r(k) = snail_transition_ghz(q, grid) - data[static_cast<std::size_t>(k)].frequency_ghz;
        }
    };
    Eigen::VectorXd x0(3);
    x0 << std::log(base.i_s1), std::log(base.i_s2), std::log(base.l_lin);
    LeastSquaresOptions lso;
    lso.max_evaluations = options.max_evaluations;
    lso.xtol = options.tolerance;
    lso.ftol = options.tolerance;
    auto res = least_squares(f, x0, m, lso);
    if (!res.converged) throw SolverError("snail fit did not converge within the evaluation budget");
    if (res.conditioning() < 1e-10) throw SolverError("snail fit jacobian is singular (degenerate data)");

    SnailFitResult out;
    out.params = make(res.x);
    out.params.alpha = out.params.ratio();
    out.evaluations = res.evaluations;
    out.iterations = res.iterations;
    Eigen::VectorXd r(m);
    f(res.x, r);
    out.residuals_ghz.assign(r.data(), r.data() + m);
    out.rms_residual_ghz = std::sqrt(r.squaredNorm() / static_cast<double>(m));
    return out;
}

std::vector<FluxPoint> read_flux_data(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open flux data file " + path);
    std::vector<FluxPoint> out;
    std::string line;
    while (std::getline(in, line)) {
        for (char& c : line)
            if (c == ',' || c == ';' || c == '\t') c = ' ';
        std::istringstream ss(line);
        FluxPoint p;
        if (!(ss >> p.flux >> p.frequency_ghz)) {
            // header or comment lines are skipped only before the first data row
            if (out.empty()) continue;
            if (line.find_first_not_of(" \r") == std::string::npos) continue;
            throw IoError("malformed row in " + path + ": " + line);
        }
        out.push_back(p);
    }
    return out;
}

void write_snail_record(const SnailFitResult& fit, std::ostream& out) {
    out << std::setprecision(12);
    out << "snail.i_s1_ua = " << fit.params.i_s1 << "\n";
    out << "snail.i_s2_ua = " << fit.params.i_s2 << "\n";
    out << "snail.l_lin_nh = " << fit.params.l_lin << "\n";
    out << "snail.c_s_ff = " << fit.params.c_s << "\n";
    out << "# alpha (i_s1 / i_s2) = " << fit.params.ratio() << "\n";
    out << "# rms residual (GHz) " << fit.rms_residual_ghz << ", evaluations " << fit.evaluations << "\n";
}

}  // namespace maser
