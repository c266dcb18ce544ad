#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "maser/lindblad.hpp"

namespace maser {

struct RandomModel {
    Eigen::MatrixXcd h;
    std::vector<JumpOperator> jumps;
    double min_rate = 0.0;
};
// Random Hermitian Hamiltonian and 1-3 dense jump operators with rates in [0.5, 1].
RandomModel random_model(std::mt19937_64& rng, std::size_t dim);
Eigen::MatrixXcd random_density_matrix(std::mt19937_64& rng, std::size_t dim);

struct InvariantReport {
    double trace_residual = 0.0;   // ||vec(I)^H L|| / ||L||
    double max_real_part = 0.0;    // max Re(lambda) / spectral radius
    double steady_residual = 0.0;  // ||L rho|| / ||L||
    double trace_error = 0.0;      // |tr rho - 1|
    double hermiticity = 0.0;      // ||rho - rho^H||
    double min_eigenvalue = 0.0;
};
InvariantReport check_liouvillian(const Liouvillian& l);

// Classic RK4 on d rho / dt = L rho.
Eigen::MatrixXcd integrate_rk4(const Liouvillian& l, const Eigen::MatrixXcd& rho0, double t_final, std::size_t steps);
double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// Resonant two-level atom, H = (omega_r / 2) sigma_x, decay gamma.
double bloch_excited_population(double omega_r, double gamma);
Liouvillian driven_two_level(double omega_r, double gamma);
// Truncated lossy cavity without drive.
Liouvillian lossy_cavity(std::size_t levels, double chi);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct ValidationOptions {
    std::size_t random_models = 20;
    std::size_t max_dim = 12;
    std::uint64_t seed = 20240601;
};

std::vector<CheckResult> run_invariant_suite(const ValidationOptions& options = {});

}  // namespace maser
