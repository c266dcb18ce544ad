#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "maser/composite.hpp"

namespace maser {

using cplx = std::complex<double>;
using SparseMatrixC = Eigen::SparseMatrix<cplx>;

struct JumpOperator {
    Eigen::MatrixXcd op;
    double rate = 0.0;
    std::string label;
};

struct JumpInventory {
    std::vector<JumpOperator> snail_jumps;
    std::vector<JumpOperator> transmon_jumps;
    std::optional<JumpOperator> cavity_jump;

    std::vector<JumpOperator> all() const;
};

// One rank-one lowering operator per labelled pair, weighted sqrt(n) like a
// harmonic ladder, plus the collective cavity annihilation operator.
JumpInventory build_jump_inventory(const AtomBasis& atom, std::size_t n_c, double chi_s, double chi_t, double chi_c);

struct LiouvillianMetadata {
    std::size_t atom_dim = 0;
    std::size_t cavity_dim = 0;
    double omega_p = 0.0;
    double cavity_frequency = 0.0;
    std::vector<AtomLabel> labels;
    std::vector<int> grading;  // excitation number per basis state, empty if unknown
};

// Column-stacking convention: vec(rho)[i + j d] = rho(i, j), so that
// vec(A X B) = (B^T (x) A) vec(X).
struct Liouvillian {
    SparseMatrixC generator;
    std::size_t hilbert_dim = 0;
    LiouvillianMetadata metadata;

    double norm() const;  // induced 1-norm
    Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(generator); }
    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;
};

Liouvillian build_liouvillian(const Eigen::MatrixXcd& h, const std::vector<JumpOperator>& jumps);
Liouvillian build_liouvillian(const RotatingFrameModel& model, const JumpInventory& jumps);

Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& rho);
Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& v, std::size_t d);

// Sectors requires a generator that conserves the excitation grading (see
// excitation_conserving_part) and works on the coherence-order blocks q = 0, 1.
enum class GapMethod { Auto, Dense, ShiftInvert, Sectors };

GapMethod parse_gap_method(const std::string& name);
std::string to_string(GapMethod m);

struct SolverOptions {
    GapMethod method = GapMethod::Auto;
    std::size_t dense_limit = 4096;  // on d^2
    int arnoldi_nev = 8;
    int arnoldi_max_dim = 120;
    double arnoldi_tol = 1e-10;      // residual relative to ||L||
    std::vector<double> probe_frequencies;  // extra shift-invert centers (rad/s)
};

struct GapResult {
    double linewidth = std::numeric_limits<double>::quiet_NaN();        // |Re lambda_1|, rad/s
    double emission_offset = std::numeric_limits<double>::quiet_NaN();  // Im lambda_1, rad/s
    double coherence_linewidth = std::numeric_limits<double>::quiet_NaN();
    double coherence_offset = std::numeric_limits<double>::quiet_NaN();
    double residual = 0.0;  // relative residual of the gap eigenpair
    cplx eigenvalue{0.0, 0.0};
    std::vector<cplx> eigenvalues;  // all eigenvalues examined
};

struct SteadyStateReport {
    Eigen::MatrixXcd rho;
    double cavity_occupation = 0.0;
    double linewidth = std::numeric_limits<double>::quiet_NaN();
    double emission_offset = std::numeric_limits<double>::quiet_NaN();
    double coherence_linewidth = std::numeric_limits<double>::quiet_NaN();
    double null_residual = 0.0;  // ||L vec(rho)|| before hermitization
    double min_eigenvalue = 0.0;
    std::vector<double> atom_populations;    // per labelled atom state
    std::vector<double> cavity_populations;
    std::vector<AtomLabel> labels;
    std::vector<std::string> diagnostics;
    std::string method;

    std::string to_json() const;
};

// Shares factorizations between the steady state and the gap.
class LiouvillianSolver {
public:
    LiouvillianSolver(const Liouvillian& l, SolverOptions options = {});
    ~LiouvillianSolver();

    SteadyStateReport steady_state();
    GapResult spectral_gap();
    GapMethod method() const;
    double spectral_radius();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

SteadyStateReport steady_state(const Liouvillian& l, const SolverOptions& options = {});
GapResult spectral_gap(const Liouvillian& l, const SolverOptions& options = {});
// Steady state with the gap fields filled in.
SteadyStateReport analyze(const Liouvillian& l, const SolverOptions& options = {});

struct RitzPairs {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;
    Eigen::VectorXd residuals;  // ||L y - lambda y|| / ||L||
};

// Eigenpairs of l nearest sigma by shift-invert Arnoldi with full
// reorthogonalization. The Krylov space grows until nev pairs reach tol.
RitzPairs shift_invert_arnoldi(const SparseMatrixC& l, cplx sigma, int nev, int max_dim, double tol);

}  // namespace maser
