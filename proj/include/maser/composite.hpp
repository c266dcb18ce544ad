#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maser/components.hpp"

namespace maser {

struct CouplingParams {
    double c_st = 0.0;  // fF
    double c_tc = 0.0;  // fF

    // Throws on negative values; returns warnings when a coupling ratio exceeds 0.1.
    std::vector<std::string> validate(double c_s, double c_t, double c_c) const;
};

// Exact capacitance matrix in the (snail, transmon, cavity) node basis.
Eigen::Matrix3d capacitance_matrix(double c_s, double c_t, double c_c, const CouplingParams& k);
// Inverse to first order in the coupling capacitances (1/fF).
Eigen::Matrix3d inverse_capacitance_first_order(double c_s, double c_t, double c_c, const CouplingParams& k);

// Cross kinetic operator -prefactor * (d1_a (x) d1_b) on the product space
// (index i_a * n_b + i_b). prefactor is the kinetic coefficient built from the
// off-diagonal inverse capacitance; the minus sign comes from the product of
// the two momenta -i d/dphi.
Eigen::MatrixXd coupling_matrix_element_table(const Eigen::MatrixXd& d1_a, const Eigen::MatrixXd& d1_b,
                                              double prefactor);
Eigen::MatrixXd coupling_matrix_element_table(const ComponentSpectrum& a, const ComponentSpectrum& b,
                                              double prefactor);

struct AtomLabel {
    int snail = 0;
    int transmon = 0;
    bool operator==(const AtomLabel&) const = default;
};

struct AtomBasis {
    std::size_t n_snail = 0;
    std::size_t n_transmon = 0;
    Eigen::VectorXd energies;   // ascending, rad/s, component ground energies removed
    Eigen::MatrixXd states;     // columns in the product basis s * n_transmon + t
    std::vector<AtomLabel> labels;
    std::vector<double> overlaps;
    std::vector<std::string> warnings;
    Eigen::MatrixXd snail_d1;     // d/dphi_s in the eigenbasis
    Eigen::MatrixXd transmon_d1;  // d/dphi_t in the eigenbasis

    std::size_t dimension() const { return labels.size(); }
    std::size_t index_of(int snail, int transmon) const;
    double energy(int snail, int transmon) const { return energies(static_cast<Eigen::Index>(index_of(snail, transmon))); }
};

// Diagonalizes H_s + H_t + T_st on the n_s x n_t product space and labels
// eigenstates by greedy maximum overlap. coupling_coefficient is the
// snail-transmon kinetic coefficient (rad/s).
AtomBasis build_artificial_atom(const ComponentSpectrum& snail, const ComponentSpectrum& transmon,
                                double coupling_coefficient, std::size_t n_s, std::size_t n_t, bool strict = false);

// Greedy labeling of eigenvectors (columns of states) on an n_a x n_b product
// basis. Exposed for testing.
void assign_labels(AtomBasis& atom, bool strict);

enum class PumpRule { Strict, Loose };

struct ReducedPump {
    Eigen::MatrixXd raising;  // (j, i) nonzero only where snail label of j = snail label of i + 1
    double amplitude = 0.0;   // Omega
    double omega_p = 0.0;
    PumpRule rule = PumpRule::Strict;

    Eigen::MatrixXd hermitian() const { return raising + raising.transpose(); }
};

ReducedPump build_reduced_pump(const AtomBasis& atom, const Eigen::MatrixXd& snail_d1_atom, double omega,
                               double omega_p, PumpRule rule = PumpRule::Strict);

// Transmon-cavity coupling -k_tc (transmon_d1 (x) cavity_d1) on atom (x) cavity.
Eigen::MatrixXd transmon_cavity_coupling(const AtomBasis& atom, const ComponentSpectrum& cavity, double k_tc);

struct RotatingFrameModel {
    Eigen::MatrixXd h_static;     // atom (x) cavity, index a * n_c + n
    Eigen::MatrixXd pump_static;  // raising part of the stationary pump on the full space
    double dropped_terms_norm = 0.0;
    double retained_coupling_norm = 0.0;
    double nonconserving_norm = 0.0;  // removed by excitation_conserving_part
    double omega_p = 0.0;
    double omega_pump_amplitude = 0.0;
    double cavity_frequency = 0.0;
    std::size_t atom_dim = 0;
    std::size_t cavity_dim = 0;
    std::vector<AtomLabel> labels;

    std::size_t dimension() const { return atom_dim * cavity_dim; }
};

RotatingFrameModel apply_rotating_frame(const AtomBasis& atom, const ComponentSpectrum& cavity,
                                        const Eigen::MatrixXd& h_tc, const ReducedPump& pump);

// Excitation number N = n_transmon + n_cavity - n_snail of each basis state.
std::vector<int> excitation_grading(const RotatingFrameModel& m);
// Drops every element of h_static that changes N (counter-rotating coupling
// terms); the removed Frobenius norm is stored in nonconserving_norm.
RotatingFrameModel excitation_conserving_part(const RotatingFrameModel& m);

enum class Transition { ge, gf_half, ef };

struct CrossingResult {
    double coupling = 0.0;        // half the minimum splitting
    double min_splitting = 0.0;
    double location = 0.0;        // scan coordinate at the minimum
};

// Minimizes a splitting function over a scan; the minimum must be interior.
CrossingResult minimize_splitting(const std::function<double(double)>& splitting, const std::vector<double>& scan);

}  // namespace maser
