#pragma once

#include <numbers>

// Internal unit system: energies as angular frequencies (rad/s, hbar = 1),
// currents in uA, capacitances in fF, inductances in nH.
namespace maser::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double electron_charge = 1.602176634e-19;
// reduced flux quantum hbar / 2e (Wb)
inline constexpr double phi0 = hbar / (2.0 * electron_charge);

inline constexpr double josephson_energy(double critical_current_ua) {
    return phi0 * critical_current_ua * 1e-6 / hbar;
}

// Coefficient K of the kinetic term -K/2 d^2/dphi^2 for an inverse
// capacitance given in 1/fF.
inline constexpr double kinetic_coefficient(double inverse_capacitance_per_ff) {
    return hbar * inverse_capacitance_per_ff * 1e15 / (phi0 * phi0);
}

// Coefficient E_L of the potential E_L phi^2 / 2.
inline constexpr double inductive_energy(double inductance_nh) {
    return phi0 * phi0 / (hbar * inductance_nh * 1e-9);
}

inline constexpr double ghz_to_angular(double f) { return two_pi * f * 1e9; }
inline constexpr double mhz_to_angular(double f) { return two_pi * f * 1e6; }
inline constexpr double khz_to_angular(double f) { return two_pi * f * 1e3; }
inline constexpr double angular_to_ghz(double w) { return w / two_pi * 1e-9; }
inline constexpr double angular_to_hz(double w) { return w / two_pi; }

// Flux in units of the flux quantum to a phase in units of the reduced one.
inline constexpr double flux_quanta_to_phase(double flux) { return two_pi * flux; }

}  // namespace maser::units

namespace maser::reference {

// Values reported for the fabricated device; kept for documentation and
// comparison output, never used as test targets at desk scale.
inline constexpr double snail_frequency_ghz = 5.76;
inline constexpr double snail_decay_mhz = 24.5;
inline constexpr double snail_alpha = 0.3;
inline constexpr double cavity_frequency_ghz = 6.971;
inline constexpr double coupling_tc_mhz = 0.44;
inline constexpr double coupling_gf_half_khz = 15.12;
inline constexpr double bare_cavity_linewidth_hz = 19.7e3;
inline constexpr double maser_linewidth_hz = 54.0;
inline constexpr double maser_linewidth_best_hz = 53.028;
inline constexpr double phase_correlation_time_s = 0.026;
inline constexpr double time_domain_linewidth_hz = 38.0;
inline constexpr int cavity_grid_points = 14000;
inline constexpr double cavity_grid_spacing = 0.0003;
inline constexpr int component_grid_points = 1000;
// transmon inversion rates (MHz) at pump powers P0, 2P0, 4P0, 8P0
inline constexpr double inversion_rates_mhz[4] = {0.178, 0.475, 1.19, 2.81};

}  // namespace maser::reference
