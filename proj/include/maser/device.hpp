#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "maser/components.hpp"
#include "maser/composite.hpp"

namespace maser {

struct GridSettings {
    std::size_t snail_points = 1000;
    std::size_t transmon_points = 1000;
    std::size_t cavity_points = 14000;
    double cavity_spacing = 0.0003;
};

struct Cutoffs {
    std::size_t snail = 3;
    std::size_t transmon = 3;
    std::size_t cavity = 4;
};

// Decay rates chi (rad/s).
struct Rates {
    double snail = 0.0;
    double transmon = 0.0;
    double cavity = 0.0;
};

struct PumpSettings {
    double amplitude = 0.0;  // Omega, rad/s
    double frequency = 0.0;  // omega_p, rad/s
    PumpRule rule = PumpRule::Strict;
};

struct DeviceParams {
    SnailParams snail;
    TransmonParams transmon;
    CavityParams cavity;
    CouplingParams coupling;
    GridSettings grids;
    Cutoffs cutoffs;
    Rates rates;

    Eigen::Matrix3d inverse_capacitance() const;
    // Kinetic coefficients (rad/s) of the snail-transmon and transmon-cavity cross terms.
    double snail_transmon_coefficient() const;
    double transmon_cavity_coefficient() const;
    std::vector<std::string> validate() const;
};

// Component spectra with first-order corrected kinetic terms.
ComponentSpectrum solve_snail(const DeviceParams& d, std::size_t levels);
ComponentSpectrum solve_transmon(const DeviceParams& d, std::size_t levels);
ComponentSpectrum solve_cavity(const DeviceParams& d, std::size_t levels);

AtomBasis build_atom(const DeviceParams& d, const ComponentSpectrum& snail, const ComponentSpectrum& transmon,
                     bool strict = false);

// Transmon flux (flux quanta, in [0, 0.5]) whose component g->e transition
// equals the target frequency.
double transmon_flux_for_frequency(const DeviceParams& d, double frequency_ghz);
double transmon_frequency_ghz(const DeviceParams& d);

RotatingFrameModel build_frame_model(const DeviceParams& d, const AtomBasis& atom, const ComponentSpectrum& cavity,
                                     const PumpSettings& pump);

// Lab-frame undriven Hamiltonian of atom (x) cavity with the full
// transmon-cavity coupling; used for avoided-crossing analysis.
Eigen::MatrixXd lab_hamiltonian(const DeviceParams& d, const AtomBasis& atom, const ComponentSpectrum& cavity);

// Splitting of the two hybridized branches of the given transition with the
// cavity at the transmon flux given in flux quanta.
double crossing_splitting(const DeviceParams& d, double transmon_flux, Transition transition);
CrossingResult avoided_crossing_splitting(const DeviceParams& d, const std::vector<double>& flux_scan,
                                          Transition transition);

// Dressed transmon transition frequencies (rad/s) at snail label 0.
struct DressedTransitions {
    double ge = 0.0;
    double gf_half = 0.0;
    double ef = 0.0;
    double pump_ge = 0.0;  // |0,g> -> |1,e>
    double pump_ef = 0.0;  // |0,e> -> |1,f>
};
DressedTransitions dressed_transitions(const AtomBasis& atom);

}  // namespace maser
