#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maser/grid.hpp"

namespace maser {

// Currents in uA, inductance in nH, capacitance in fF. flux_ext is a phase
// (one flux quantum = 2 pi).
struct SnailParams {
    double i_s1 = 0.0;
    double i_s2 = 0.0;
    double l_lin = 0.0;
    double c_s = 0.0;
    double flux_ext = 0.0;
    std::optional<double> alpha;

    double ratio() const { return i_s1 / i_s2; }
    void validate() const;
};

struct TransmonParams {
    double i_t1 = 0.0;
    double i_t2 = 0.0;
    double c_t = 0.0;
    double flux_ext = 0.0;

    void validate() const;
};

struct CavityParams {
    double c_c = 0.0;
    double l_c = 0.0;

    double bare_frequency() const;  // rad/s
    void validate() const;
};

struct ComponentSpectrum {
    PhaseGrid grid;
    Eigen::VectorXd energies;         // rad/s, ascending
    Eigen::MatrixXd wavefunctions;    // unit-norm columns; psi = v / sqrt(h)
    Eigen::MatrixXd d1_elements;      // <n| d/dphi |m>

    std::size_t levels() const { return static_cast<std::size_t>(energies.size()); }
    double transition(std::size_t from, std::size_t to) const { return energies(to) - energies(from); }
    ComponentSpectrum truncated(std::size_t n) const;
};

// Internal phase of the SNAIL minimizing its potential at node phase phi_s.
// guess warm-starts the Newton iteration; default is phi_s.
double snail_internal_phase(const SnailParams& p, double phi_s, std::optional<double> guess = {});
double snail_potential_at(const SnailParams& p, double phi_s, double phi_s1);
// Potential on every grid point with the internal phase tracked continuously.
std::vector<double> snail_potential(const SnailParams& p, const PhaseGrid& grid);
std::vector<double> transmon_potential(const TransmonParams& p, const PhaseGrid& grid);
std::vector<double> cavity_potential(const CavityParams& p, const PhaseGrid& grid);

// Hamiltonians -K/2 d^2 + U. inverse_capacitance (1/fF) defaults to the bare 1/C.
BandedOperator build_snail_hamiltonian(const SnailParams& p, const PhaseGrid& grid,
                                       std::optional<double> inverse_capacitance = {});
BandedOperator build_transmon_hamiltonian(const TransmonParams& p, const PhaseGrid& grid,
                                          std::optional<double> inverse_capacitance = {});
BandedOperator build_cavity_hamiltonian(const CavityParams& p, const PhaseGrid& grid,
                                        std::optional<double> inverse_capacitance = {});

ComponentSpectrum solve_spectrum(const BandedOperator& h, const PhaseGrid& grid, std::size_t n_levels);

// SNAIL g->e frequency in GHz at the given parameters.
double snail_transition_ghz(const SnailParams& p, const PhaseGrid& grid);

struct FluxPoint {
    double flux = 0.0;          // flux quanta
    double frequency_ghz = 0.0;
};

struct SnailFitOptions {
    std::size_t grid_points = 1000;
    int max_evaluations = 4000;
    double tolerance = 1e-12;
};

struct SnailFitResult {
    SnailParams params;
    double rms_residual_ghz = 0.0;
    std::vector<double> residuals_ghz;
    int evaluations = 0;
    int iterations = 0;
};

SnailFitResult fit_snail_parameters(const std::vector<FluxPoint>& data, const SnailParams& initial, double fixed_c_s,
                                    const SnailFitOptions& options = {});

std::vector<FluxPoint> read_flux_data(const std::string& path);
void write_snail_record(const SnailFitResult& fit, std::ostream& out);

}  // namespace maser
